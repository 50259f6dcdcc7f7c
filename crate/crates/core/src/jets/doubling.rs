use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::scalar::Real;
use crate::solver::{Grid, GridFunction, PairDistances};

/// One row of a [`DoublingTrace`]; the field names are the CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingRecord {
    pub alpha: f64,
    pub m_alpha: f64,
    pub d: f64,
    pub alpha_d_sq: f64,
    pub x_idx: usize,
    pub y_idx: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingTrace {
    pub records: Vec<DoublingRecord>,
    /// `max_i (u − v)(i)` over the grid.
    pub diagonal_max: f64,
    /// Modulus of `u − v` at the grid spacing.
    pub modulus: f64,
}

impl DoublingTrace {
    /// `m_α` never increases along the schedule (up to rounding).
    pub fn is_monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[1].m_alpha <= w[0].m_alpha + 1e-12 * (1.0 + w[0].m_alpha.abs()))
    }

    /// `|m_final − max(u − v)| ≤ modulus`.
    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.m_alpha - self.diagonal_max)
    }
}

/// For each `α`, maximizes `u(x) − v(y) − (α/2) d(x, y)²` exactly over all
/// pairs of grid nodes. Ties go to the smallest `(x_idx, y_idx)`.
pub fn doubling_diagnostic<T: Real>(
    grid: &Grid<T>,
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    alphas: &[f64],
    distances: &PairDistances<T>,
) -> Result<DoublingTrace> {
    let n = grid.len();
    if n == 0 {
        return Err(arg("empty grid"));
    }
    if u.len() != n || v.len() != n || distances.len() != n {
        return Err(arg("grid functions and distance table must match the grid"));
    }
    if alphas.is_empty() || alphas.windows(2).any(|w| !(w[1] > w[0])) || !(alphas[0] > 0.0) {
        return Err(arg("alphas must be positive and strictly increasing"));
    }
    let records = alphas
        .iter()
        .map(|&alpha| {
            let half = T::lit(0.5 * alpha);
            let (m, i, j) = (0..n)
                .into_par_iter()
                .map(|i| {
                    let row = distances.row(i);
                    let ui = u.values[i];
                    let mut best = (T::neg_infinity(), i, 0usize);
                    for j in 0..n {
                        let val = ui - v.values[j] - half * row[j] * row[j];
                        if val > best.0 {
                            best = (val, i, j);
                        }
                    }
                    best
                })
                .reduce(
                    || (T::neg_infinity(), usize::MAX, usize::MAX),
                    |a, b| if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a },
                );
            let d = distances.get(i, j).to_f64_lossy();
            DoublingRecord { alpha, m_alpha: m.to_f64_lossy(), d, alpha_d_sq: alpha * d * d, x_idx: i, y_idx: j }
        })
        .collect();
    let diff = u.sub(v);
    Ok(DoublingTrace {
        records,
        diagonal_max: diff.max().to_f64_lossy(),
        modulus: distances.modulus(&diff, grid.spacing()).to_f64_lossy(),
    })
}
