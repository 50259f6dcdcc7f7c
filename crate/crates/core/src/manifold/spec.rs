//! JSON descriptions of model manifolds, e.g.
//! `{"model": "sphere", "dim": 2, "radius": 1.0}`.

use serde::{Deserialize, Serialize};

use super::ManifoldModel;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Serializable model description.
///
/// | `model`      | fields                                               |
/// |--------------|------------------------------------------------------|
/// | `euclidean`  | `dim`                                                |
/// | `sphere`     | `dim`, `radius` (default 1)                          |
/// | `hyperbolic` | `dim`, `k0 > 0` or `curvature < 0` (default `k0 = 1`) |
/// | `torus`      | `periods`, or `dim` with a shared `period` (default 1) |
/// | `product`    | `factors`: list of model descriptions                |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Euclidean {
        dim: usize,
    },
    Sphere {
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    Hyperbolic {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        curvature: Option<f64>,
    },
    #[serde(alias = "flat_torus")]
    Torus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        periods: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<f64>,
    },
    Product {
        factors: Vec<ModelSpec>,
    },
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model description: {e}")))
    }

    pub fn from_value(value: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(value.clone()).map_err(|e| Error::Parse(format!("model description: {e}")))
    }

    pub fn build<T: Real>(&self) -> Result<ManifoldModel<T>> {
        match self {
            Self::Euclidean { dim } => ManifoldModel::euclidean(*dim),
            Self::Sphere { dim, radius } => ManifoldModel::sphere(*dim, T::lit(*radius)),
            Self::Hyperbolic { dim, k0, curvature } => {
                let k = match (k0, curvature) {
                    (Some(_), Some(_)) => {
                        return Err(Error::Parse("hyperbolic model takes either k0 or curvature, not both".into()))
                    }
                    (Some(k), None) => *k,
                    (None, Some(c)) => -*c,
                    (None, None) => 1.0,
                };
                ManifoldModel::hyperbolic(*dim, T::lit(k))
            }
            Self::Torus { periods, dim, period } => {
                let p = match (periods, dim) {
                    (Some(p), None) if period.is_none() => p.clone(),
                    (None, Some(d)) => vec![period.unwrap_or(1.0); *d],
                    _ => {
                        return Err(Error::Parse(
                            "torus model takes `periods`, or `dim` with an optional `period`".into(),
                        ))
                    }
                };
                ManifoldModel::flat_torus(p.into_iter().map(T::lit).collect())
            }
            Self::Product { factors } => {
                let f = factors.iter().map(Self::build).collect::<Result<Vec<_>>>()?;
                ManifoldModel::product(f)
            }
        }
    }

    pub fn of<T: Real>(model: &ManifoldModel<T>) -> Self {
        match model {
            ManifoldModel::Euclidean { dim } => Self::Euclidean { dim: *dim },
            ManifoldModel::Sphere { dim, radius } => Self::Sphere { dim: *dim, radius: radius.to_f64_lossy() },
            ManifoldModel::Hyperbolic { dim, k0 } => {
                Self::Hyperbolic { dim: *dim, k0: Some(k0.to_f64_lossy()), curvature: None }
            }
            ManifoldModel::FlatTorus { periods } => Self::Torus {
                periods: Some(periods.iter().map(|p| p.to_f64_lossy()).collect()),
                dim: None,
                period: None,
            },
            ManifoldModel::Product(f) => Self::Product { factors: f.iter().map(Self::of).collect() },
        }
    }
}
