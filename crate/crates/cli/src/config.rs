//! JSON job descriptions.
//!
//! Every field is optional; each subcommand documents the defaults it uses.
//! Unknown fields are rejected so that typos surface as usage errors.

use std::path::Path;

use anyhow::{bail, Context};
use geovisc::manifold::ModelSpec;
use geovisc::operators::{OperatorConfig, ScalarField};
use geovisc::solver::SolveOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Informational; a mismatch with the subcommand is rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// For `solve`: the operator `G` in `u + G(x, du, d²u) = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    /// For `solve`: extra resolutions for a refinement table against `exact`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolutions: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Geodesic length range for `hessian-sign`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell_range: Option<(f64, f64)>,
    /// Restrict `hessian-sign` test vectors to the normal space of the
    /// geodesic (default true), where the closed form applies to `‖v‖²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_only: Option<bool>,
    /// Lower curvature bound `−K₀` for the `hessian-sign` bound check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    /// Penalty schedule for `comparison-demo`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    /// Models for the (*) candidate sweep in `comparison-demo`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star_models: Option<Vec<ModelSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<ScalarField<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<ScalarField<f64>>,
    /// Constant initial iterates for `solve` and `yamabe`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    /// Exact solution for error reporting in `solve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ScalarField<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<DirichletConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perron: Option<PerronConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yamabe: Option<YamabeConfig>,
    #[serde(default)]
    pub outputs: OutputNames,
}

/// Numeric tolerances with their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub geometry: f64,
    pub sign: f64,
    /// Relative deviation from the constant-curvature closed form.
    pub closed_form: f64,
    /// Margin for the (*) and `P ≤ L(Q)` checks.
    pub star: f64,
    /// Sup error against `exact`.
    pub solution: f64,
    /// Constant `C` of the residual threshold `C·h`.
    pub residual_c: f64,
    pub invariance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            geometry: 1e-9,
            sign: 1e-8,
            closed_form: 1e-6,
            star: 1e-9,
            solution: 1e-6,
            residual_c: 1.0,
            invariance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub theta: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub growth: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self { theta: d.theta, tol: d.tol, max_iter: d.max_iter, growth: d.growth }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions { theta: self.theta, tol: self.tol, max_iter: self.max_iter, growth: self.growth }
    }
}

/// Dirichlet problem on the geodesic ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletConfig {
    pub center: Vec<f64>,
    pub radius: f64,
    pub data: ScalarField<f64>,
}

/// Constant sub- and supersolution for Perron sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerronConfig {
    pub sub: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YamabeConfig {
    pub n: usize,
    #[serde(rename = "S")]
    pub s: ScalarField<f64>,
    #[serde(rename = "S_prime")]
    pub s_prime: f64,
}

impl Default for YamabeConfig {
    fn default() -> Self {
        Self { n: 3, s: ScalarField::Const(6.0), s_prime: -1.0 }
    }
}

/// File names (relative to `--out`) overriding the per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputNames {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
}

impl JobConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("invalid job description")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text)
    }

    /// Schema checks that serde cannot express.
    pub fn validate(&self) -> anyhow::Result<()> {
        if let Some(n) = self.samples {
            if n == 0 {
                bail!("`samples` must be positive");
            }
        }
        if let Some((lo, hi)) = self.ell_range {
            if !(lo > 0.0 && hi >= lo) {
                bail!("`ell_range` must satisfy 0 < lo <= hi");
            }
        }
        if let Some(a) = &self.alphas {
            if a.is_empty() || a.windows(2).any(|w| w[1] <= w[0]) || a[0] <= 0.0 {
                bail!("`alphas` must be positive and strictly increasing");
            }
        }
        if let Some(p) = &self.perron {
            if p.sub > p.sup {
                bail!("`perron.sub` must not exceed `perron.sup`");
            }
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            bail!("`solver.tol` and `solver.max_iter` must be positive");
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
