//! Shared report records and deterministic sampling streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Summary record emitted by every sampled check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub model: String,
    pub samples: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    /// Builds a report whose verdict is `max_violation ≤ tolerance`.
    pub fn from_violation(model: impl Into<String>, samples: usize, max_violation: f64, tolerance: f64) -> Self {
        let pass = max_violation.is_finite() && max_violation <= tolerance;
        Self { model: model.into(), samples, max_violation, tolerance, pass }
    }
}

/// Independent random stream `index` derived from `seed`.
///
/// Each sample of a parallel sweep draws from its own stream, so results do
/// not depend on the thread count or scheduling.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
