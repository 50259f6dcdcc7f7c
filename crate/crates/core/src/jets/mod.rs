//! Second-order jets: membership tests through the exponential chart, the
//! chart correction term, limiting jets, the block-matrix condition (*)
//! relating `P`, `Q` to `A_α = d²φ_α`, and the doubling-of-variables trace.
//!
//! Jet membership is only semidecidable numerically: ACCEPT means no
//! violation was found at the sampled resolution, REJECT carries a concrete
//! witness direction.

mod doubling;
mod star;

pub use doubling::{doubling_diagnostic, DoublingRecord, DoublingTrace};
pub use star::{
    canonical_epsilon, check_p_leq_lq, generate_star_candidates, star_consequence_sweep, verify_condition_star, LqCheck,
    StarCandidates, StarCondition, StarSample, StarSweepReport, StarVerdict,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, domain, Result};
use crate::linalg::{self, Matrix};
use crate::manifold::{ManifoldModel, Point, SymBilinear, TangentVector};
use crate::report::sample_rng;
use crate::scalar::Real;

/// `(x, r, ζ, A)`: a point, a value, a covector (as a tangent vector) and a
/// symmetric form in the canonical frame at `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet2<T> {
    pub x: Point<T>,
    pub value: T,
    pub zeta: TangentVector<T>,
    pub a: SymBilinear<T>,
}

impl<T: Real> Jet2<T> {
    pub fn new(x: Point<T>, value: T, zeta: TangentVector<T>, a: SymBilinear<T>) -> Result<Self> {
        if !zeta.base.same_as(&x) || !a.base.same_as(&x) {
            return Err(arg("jet components must be based at the jet's point"));
        }
        Ok(Self { x, value, zeta, a })
    }

    /// Builds a jet from frame coefficients of `ζ` and the matrix of `A`.
    pub fn from_frame(m: &ManifoldModel<T>, x: &Point<T>, value: T, zeta: &[T], a: Matrix<T>) -> Result<Self> {
        if zeta.len() != m.dim() || a.rows() != m.dim() {
            return Err(arg("jet dimension does not match the model"));
        }
        Ok(Self {
            x: x.clone(),
            value,
            zeta: m.from_frame(x, zeta),
            a: SymBilinear::new(x.clone(), a)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JetKind {
    /// `(ζ, A) ∈ J^{2,−}f(x)`: the quadratic touches from below.
    Sub,
    /// `(ζ, A) ∈ J^{2,+}f(x)`: the quadratic touches from above.
    Super,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject {
        /// Frame coefficients of the offending displacement `v`.
        witness: Vec<f64>,
        radius: f64,
        normalized_residual: f64,
    },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Sampling schedule for [`quadratic_jet_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetTestOptions {
    pub radii: Vec<f64>,
    /// Random unit directions per radius (frame axes, `±ζ̂` and the
    /// eigenvectors of `A` are always added).
    pub directions: usize,
    /// Tolerance at radius `ρ` is `tol_factor · ρ`.
    pub tol_factor: f64,
    /// Only radii `≤ decisive_radius` can produce a REJECT.
    pub decisive_radius: f64,
    pub seed: u64,
}

impl Default for JetTestOptions {
    fn default() -> Self {
        Self { radii: vec![1e-1, 1e-2, 1e-3, 1e-4], directions: 200, tol_factor: 10.0, decisive_radius: 1e-2, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusStat {
    pub radius: f64,
    pub tolerance: f64,
    /// Smallest `residual / ‖v‖²` over the directions (sign-adjusted so that
    /// negative means violation).
    pub min_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetTestReport {
    pub kind: JetKind,
    pub verdict: Verdict,
    /// `min over decisive radii of (min_normalized + tol)`; negative iff REJECT.
    pub margin: f64,
    pub per_radius: Vec<RadiusStat>,
}

/// Unit directions (frame coefficients) used by the jet tests.
fn test_directions<T: Real>(jet: &Jet2<T>, m: &ManifoldModel<T>, opts: &JetTestOptions) -> Vec<Vec<T>> {
    let n = m.dim();
    let mut dirs: Vec<Vec<T>> = Vec::new();
    for i in 0..n {
        for s in [T::one(), -T::one()] {
            let mut e = vec![T::zero(); n];
            e[i] = s;
            dirs.push(e);
        }
    }
    let z = m.to_frame(&jet.zeta);
    let nz = linalg::norm(&z);
    if nz > T::zero() {
        dirs.push(linalg::scaled(&z, T::one() / nz));
        dirs.push(linalg::scaled(&z, -T::one() / nz));
    }
    let eig = linalg::sym_eigen(&jet.a.matrix);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| eig.vectors[(i, j)]).collect();
        dirs.push(linalg::scaled(&col, -T::one()));
        dirs.push(col);
    }
    let mut rng = sample_rng(opts.seed, 0);
    let mut added = 0;
    while added < opts.directions {
        let g: Vec<T> = (0..n).map(|_| T::lit(rng.sample::<f64, _>(rand_distr::StandardNormal))).collect();
        let ng = linalg::norm(&g);
        if ng > T::lit(1e-8) {
            dirs.push(linalg::scaled(&g, T::one() / ng));
            added += 1;
        }
    }
    dirs
}

/// Core of the jet test on a function given in exponential-chart
/// coordinates `g(c) = f(exp_x(Σ cᵢEᵢ))`.
fn chart_jet_test<T: Real>(
    g: &(dyn Fn(&[T]) -> T + Sync),
    value: T,
    zeta: &[T],
    a: &Matrix<T>,
    dirs: &[Vec<T>],
    kind: JetKind,
    opts: &JetTestOptions,
) -> (JetTestReport, Vec<Vec<f64>>) {
    let sign = match kind {
        JetKind::Sub => T::one(),
        JetKind::Super => -T::one(),
    };
    let mut per_radius = Vec::new();
    let mut margin = f64::INFINITY;
    let mut witness: Option<(Vec<f64>, f64, f64)> = None;
    let mut raw = Vec::new();
    for &rho in &opts.radii {
        let r = T::lit(rho);
        let tol = opts.tol_factor * rho;
        let residuals: Vec<f64> = dirs
            .par_iter()
            .map(|d| {
                let v = linalg::scaled(d, r);
                let q = value + linalg::dot(zeta, &v) + T::lit(0.5) * a.bilinear(&v, &v);
                (sign * (g(&v) - q) / (r * r)).to_f64_lossy()
            })
            .collect();
        let (arg_min, min) = residuals
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, &x)| if x < acc.1 { (k, x) } else { acc });
        per_radius.push(RadiusStat { radius: rho, tolerance: tol, min_normalized: min });
        if rho <= opts.decisive_radius * (1.0 + 1e-12) {
            margin = margin.min(min + tol);
            let violated = min < -tol || min.is_nan();
            if violated && witness.as_ref().map_or(true, |w| min < w.2) {
                let wv = dirs[arg_min].iter().map(|c| c.to_f64_lossy() * rho).collect();
                witness = Some((wv, rho, min));
            }
        }
        raw.push(residuals);
    }
    let verdict = match witness {
        None => Verdict::Accept,
        Some((w, radius, res)) => Verdict::Reject { witness: w, radius, normalized_residual: res },
    };
    (JetTestReport { kind, verdict, margin, per_radius }, raw)
}

fn check_radii<T: Real>(m: &ManifoldModel<T>, opts: &JetTestOptions) -> Result<()> {
    let inj = m.global_injectivity_radius().to_f64_lossy();
    if opts.radii.is_empty() {
        return Err(arg("at least one radius is required"));
    }
    if opts.radii.iter().any(|&r| !(r > 0.0) || r >= inj) {
        return Err(domain("test radii must be positive and below the injectivity radius"));
    }
    Ok(())
}

/// Tests `f(exp_x(v)) ≥ r + ⟨ζ,v⟩ + ½⟨Av,v⟩ + o(‖v‖²)` (sub) or the reverse
/// inequality (super) on shrinking spheres of directions.
///
/// The normalized residual `(f(exp_x v) − quadratic)/‖v‖²` must stay above
/// `−tol_factor·ρ` at every decisive radius `ρ`; otherwise the worst
/// direction is returned as a witness.
pub fn quadratic_jet_test<T: Real>(
    m: &ManifoldModel<T>,
    f: &(dyn Fn(&Point<T>) -> T + Sync),
    jet: &Jet2<T>,
    kind: JetKind,
    opts: &JetTestOptions,
) -> Result<JetTestReport> {
    check_radii(m, opts)?;
    let dirs = test_directions(jet, m, opts);
    let x = &jet.x;
    let g = |c: &[T]| f(&Point::new(m.exp_raw(&x.coords, &m.from_frame_raw(&x.coords, c))));
    let zeta = m.to_frame(&jet.zeta);
    Ok(chart_jet_test(&g, jet.value, &zeta, &jet.a.matrix, &dirs, kind, opts).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartTransferReport {
    pub manifold: JetTestReport,
    pub chart: JetTestReport,
    pub agree: bool,
    /// Largest difference between the normalized residuals of the two runs.
    pub max_residual_gap: f64,
}

/// Runs the jet test on `f` over `M` and on `f ∘ exp_x` over `T_x M`
/// (a Euclidean space, in frame coordinates) with the same samples.
pub fn chart_transfer_check<T: Real>(
    m: &ManifoldModel<T>,
    f: &(dyn Fn(&Point<T>) -> T + Sync),
    jet: &Jet2<T>,
    kind: JetKind,
    opts: &JetTestOptions,
) -> Result<ChartTransferReport> {
    check_radii(m, opts)?;
    let dirs = test_directions(jet, m, opts);
    let x = &jet.x;
    let zeta = m.to_frame(&jet.zeta);
    let on_m = |c: &[T]| {
        let v = m.from_frame_raw(&x.coords, c);
        f(&Point::new(m.exp_raw(&x.coords, &v)))
    };
    let (rm, raw_m) = chart_jet_test(&on_m, jet.value, &zeta, &jet.a.matrix, &dirs, kind, opts);
    // the pulled-back function on the Euclidean tangent space
    let psi = |w: &[T]| -> T {
        let v = m.from_frame_raw(&x.coords, w);
        f(&Point::new(m.exp_raw(&x.coords, &v)))
    };
    let flat = ManifoldModel::<T>::euclidean(m.dim())?;
    let origin = vec![T::zero(); m.dim()];
    let g = |c: &[T]| psi(&flat.exp_raw(&origin, c));
    let (rc, raw_c) = chart_jet_test(&g, jet.value, &zeta, &jet.a.matrix, &dirs, kind, opts);
    let gap = raw_m
        .iter()
        .flatten()
        .zip(raw_c.iter().flatten())
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    Ok(ChartTransferReport { agree: rm.verdict.is_accept() == rc.verdict.is_accept(), manifold: rm, chart: rc, max_residual_gap: gap })
}

/// Hessian of `f ∘ exp_x` at `0` in frame coordinates, by central
/// differences with step `h`. Equals the Riemannian Hessian `d²f(x)`.
pub fn chart_hessian<T: Real>(m: &ManifoldModel<T>, f: &dyn Fn(&Point<T>) -> T, x: &Point<T>, h: T) -> Matrix<T> {
    let n = m.dim();
    let g = |c: &[T]| f(&Point::new(m.exp_raw(&x.coords, &m.from_frame_raw(&x.coords, c))));
    let unit = |i: usize, s: T| {
        let mut e = vec![T::zero(); n];
        e[i] = s;
        e
    };
    let f0 = g(&vec![T::zero(); n]);
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = (g(&unit(i, h)) - T::lit(2.0) * f0 + g(&unit(i, -h))) / (h * h);
        for j in 0..i {
            let pp = linalg::add(&unit(i, h), &unit(j, h));
            let pm = linalg::add(&unit(i, h), &unit(j, -h));
            let mp = linalg::add(&unit(i, -h), &unit(j, h));
            let mm = linalg::add(&unit(i, -h), &unit(j, -h));
            let v = (g(&pp) - g(&pm) - g(&mp) + g(&mm)) / (T::lit(4.0) * h * h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Gradient of `f` at `y` in the canonical frame, by central differences.
fn gradient_at<T: Real>(m: &ManifoldModel<T>, f: &dyn Fn(&Point<T>) -> T, y: &[T], h: T) -> Vec<T> {
    let frame = m.frame_raw(y);
    let mut grad = vec![T::zero(); m.ambient_dim()];
    for e in &frame {
        let p = f(&Point::new(m.exp_raw(y, &linalg::scaled(e, h))));
        let q = f(&Point::new(m.exp_raw(y, &linalg::scaled(e, -h))));
        grad = linalg::axpy(&grad, (p - q) / (T::lit(2.0) * h), e);
    }
    grad
}

/// The curve `σ_y(t) = exp_x(w_y + t Ṽ(w_y))`, `w_y = exp_x⁻¹(y)`, with `Ṽ`
/// given in frame coordinates at `x`.
fn sigma<'a, T: Real>(
    m: &'a ManifoldModel<T>,
    x: &'a Point<T>,
    w: &'a [T],
    dir: &'a [T],
) -> impl Fn(T) -> Vec<T> + 'a {
    move |t: T| {
        let c: Vec<T> = w.iter().zip(dir).map(|(&a, &b)| a + t * b).collect();
        m.exp_raw(&x.coords, &m.from_frame_raw(&x.coords, &c))
    }
}

/// `⟨∇φ(y), σ_y″(0)⟩`: the difference between the second derivative of
/// `ψ = φ ∘ exp_x` along `Ṽ` at `w_y` and the Riemannian Hessian
/// `d²φ(y)(V, V)` with `V = d exp_x(w_y) Ṽ(w_y)`.
///
/// The covariant acceleration is the ordinary second derivative of
/// `exp_y⁻¹ ∘ σ_y` at `0`, since normal coordinates at `y` have vanishing
/// Christoffel symbols there.
pub fn lemma_correction_term<T: Real>(
    m: &ManifoldModel<T>,
    phi: &dyn Fn(&Point<T>) -> T,
    x: &Point<T>,
    y: &Point<T>,
    v_tilde: &dyn Fn(&[T]) -> Vec<T>,
) -> Result<T> {
    let w = chart_point(m, x, y)?;
    let dir = v_tilde(&w);
    if dir.len() != m.dim() {
        return Err(arg("the chart vector field must return frame coefficients"));
    }
    let s = sigma(m, x, &w, &dir);
    let y0 = s(T::zero());
    let c = |t: T| m.log_raw(&y0, &s(t));
    let h = T::lit(1e-3);
    let two = T::lit(2.0);
    let (p2, p1, m1, m2) = (c(two * h)?, c(h)?, c(-h)?, c(-two * h)?);
    let acc: Vec<T> = (0..p1.len())
        .map(|i| (-p2[i] + T::lit(16.0) * p1[i] + T::lit(16.0) * m1[i] - m2[i]) / (T::lit(12.0) * h * h))
        .collect();
    let acc = m.project_tangent_raw(&y0, &acc);
    let grad = gradient_at(m, phi, &y0, T::lit(1e-5));
    Ok(m.inner_raw(&grad, &acc))
}

/// Finite-difference defect `D²ψ(Ṽ,Ṽ)(w_y) − d²φ(y)(V,V)` with step `h`;
/// the oracle for [`lemma_correction_term`].
pub fn lemma_correction_defect<T: Real>(
    m: &ManifoldModel<T>,
    phi: &dyn Fn(&Point<T>) -> T,
    x: &Point<T>,
    y: &Point<T>,
    v_tilde: &dyn Fn(&[T]) -> Vec<T>,
    h: T,
) -> Result<T> {
    let w = chart_point(m, x, y)?;
    let dir = v_tilde(&w);
    let s = sigma(m, x, &w, &dir);
    let psi = |t: T| phi(&Point::new(s(t)));
    let lhs = (psi(h) - T::lit(2.0) * psi(T::zero()) + psi(-h)) / (h * h);
    // V(y) = σ′(0), from a central difference read in normal coordinates at y
    let y0 = s(T::zero());
    let dh = T::lit(1e-5);
    let vy = linalg::scaled(&linalg::sub(&m.log_raw(&y0, &s(dh))?, &m.log_raw(&y0, &s(-dh))?), T::one() / (T::lit(2.0) * dh));
    let vy = m.project_tangent_raw(&y0, &vy);
    let g = |t: T| phi(&Point::new(m.exp_raw(&y0, &linalg::scaled(&vy, t))));
    let hess = (g(h) - T::lit(2.0) * g(T::zero()) + g(-h)) / (h * h);
    Ok(lhs - hess)
}

fn chart_point<T: Real>(m: &ManifoldModel<T>, x: &Point<T>, y: &Point<T>) -> Result<Vec<T>> {
    let inj = m.global_injectivity_radius();
    if m.distance(x, y)? >= inj {
        return Err(domain("y lies outside the exponential chart at x"));
    }
    let log = m.log(x, y)?;
    Ok(m.to_frame(&log))
}

/// Options for [`jet_limit_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetLimitOptions {
    /// Absolute tolerance on the paired evaluations.
    pub tolerance: f64,
    /// Allowed error per unit of `d(x_n, x)`.
    pub lipschitz: f64,
}

impl Default for JetLimitOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, lipschitz: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetLimitReport {
    pub converged: bool,
    /// Per-term error: `d(x_n,x) + |r_n − r| + max |⟨ζ_n,V⟩ − ⟨ζ,V⟩| + max |⟨A_n V,W⟩ − ⟨A V,W⟩|`.
    pub errors: Vec<f64>,
    pub distances: Vec<f64>,
}

/// Decides whether `(x_n, r_n, ζ_n, A_n) → (x, r, ζ, A)` when tested against
/// the spanning family of fields obtained by projecting the ambient
/// coordinate axes onto each tangent space.
///
/// Moving the base point by `d` changes the paired evaluations of a fixed
/// jet by at most about `2(1 + ‖ζ‖ + ‖A‖)·d`, since the fields have unit
/// size and unit derivative; the default `lipschitz = 4` doubles that.
///
/// The sequence converges iff every term in its second half satisfies
/// `err_n ≤ tolerance + lipschitz·(1 + ‖ζ‖ + ‖A‖)·d(x_n, x)` and the base
/// points do not move away from `x` over that half.
pub fn jet_limit_check<T: Real>(
    m: &ManifoldModel<T>,
    sequence: &[Jet2<T>],
    limit: &Jet2<T>,
    opts: &JetLimitOptions,
) -> Result<JetLimitReport> {
    if sequence.is_empty() {
        return Err(arg("empty jet sequence"));
    }
    let pairs = |j: &Jet2<T>| -> (Vec<T>, Vec<T>) {
        let fields = m.spanning_fields(&j.x.coords);
        let coeffs: Vec<Vec<T>> = fields.iter().map(|v| m.to_frame_raw(&j.x.coords, v)).collect();
        let z = m.to_frame(&j.zeta);
        let first: Vec<T> = coeffs.iter().map(|c| linalg::dot(&z, c)).collect();
        let mut second = Vec::new();
        for a in &coeffs {
            for b in &coeffs {
                second.push(j.a.matrix.bilinear(a, b));
            }
        }
        (first, second)
    };
    let (lz, la) = pairs(limit);
    let scale = 1.0 + m.norm(&limit.zeta).to_f64_lossy() + limit.a.norm().to_f64_lossy();
    let mut errors = Vec::with_capacity(sequence.len());
    let mut distances = Vec::with_capacity(sequence.len());
    for j in sequence {
        let (z, a) = pairs(j);
        let d = m.distance(&j.x, &limit.x)?.to_f64_lossy();
        let ez = z.iter().zip(&lz).fold(0.0f64, |acc, (p, q)| acc.max((*p - *q).abs().to_f64_lossy()));
        let ea = a.iter().zip(&la).fold(0.0f64, |acc, (p, q)| acc.max((*p - *q).abs().to_f64_lossy()));
        let er = (j.value - limit.value).abs().to_f64_lossy();
        errors.push(d + er + ez + ea);
        distances.push(d);
    }
    let half = sequence.len() / 2;
    let mut converged = true;
    for k in half..sequence.len() {
        if !(errors[k] <= opts.tolerance + opts.lipschitz * scale * distances[k]) {
            converged = false;
        }
    }
    if distances[sequence.len() - 1] > distances[half] + opts.tolerance {
        converged = false;
    }
    Ok(JetLimitReport { converged, errors, distances })
}

#[cfg(test)]
mod tests;
