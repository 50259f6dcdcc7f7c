use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridFunction};
use crate::error::{arg, Result};
use crate::linalg::{self, Matrix};
use crate::operators::OperatorSpec;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max F(x, u(x), ζ, A⁺)⁺` over nodes, `(ζ, A⁺)` from the fit touching from above.
    pub sub_violation: f64,
    /// `max (−F(x, u(x), ζ, A⁻))⁺`, `(ζ, A⁻)` from the fit touching from below.
    pub super_violation: f64,
    pub worst_sub_node: usize,
    pub worst_super_node: usize,
    /// `C·h`.
    pub threshold: f64,
    pub pass: bool,
}

/// Fits `u(exp_x c) ≈ u(x) + ζ·c + ½cᵀAc` by least squares over the stencil
/// foot points, then widens `A` by multiples of the identity until the
/// quadratic lies above (resp. below) every sample. The two resulting jets
/// are candidate super- and subjets at `x`, and `F` is evaluated on them.
///
/// PASS iff both violations are at most `c_threshold · h`.
pub fn verify_viscosity_residual<T: Real>(
    op: &OperatorSpec<T>,
    grid: &Grid<T>,
    u: &GridFunction<T>,
    c_threshold: f64,
) -> Result<ResidualReport> {
    if u.len() != grid.len() || !u.is_finite() {
        return Err(arg("u must be finite and match the grid"));
    }
    let disp = grid.shape.displacements();
    // least-squares design in (ζ₁, ζ₂, A₁₁, A₂₂, A₁₂)
    let half = T::lit(0.5);
    let rows: Vec<Vec<T>> = disp.iter().map(|c| vec![c[0], c[1], half * c[0] * c[0], half * c[1] * c[1], c[0] * c[1]]).collect();
    let design = Matrix::from_rows(&rows);
    let normal = design.transpose().matmul(&design);
    let normal_inv = linalg::inverse(&normal)?;
    let solve = normal_inv.matmul(&design.transpose());
    let norms: Vec<T> = disp.iter().map(|c| c[0] * c[0] + c[1] * c[1]).collect();
    let per_node: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let ux = u.values[i];
            let diffs: Vec<T> = grid.stencils[i].iter().map(|p| p.apply(&u.values) - ux).collect();
            let coef = solve.matvec(&diffs);
            let zeta = vec![coef[0], coef[1]];
            let a = Matrix::from_rows(&[vec![coef[2], coef[4]], vec![coef[4], coef[3]]]);
            let fitted = design.matvec(&coef);
            let (mut up, mut down) = (T::zero(), T::zero());
            for k in 0..diffs.len() {
                let e = T::lit(2.0) * (diffs[k] - fitted[k]) / norms[k];
                up = up.max(e);
                down = down.max(-e);
            }
            let x = &grid.nodes[i].coords;
            let f_up = op.eval_frame(x, ux, &zeta, &a.shift(up))?;
            let f_down = op.eval_frame(x, ux, &zeta, &a.shift(-down))?;
            Ok((f_up.to_f64_lossy().max(0.0), (-f_down.to_f64_lossy()).max(0.0)))
        })
        .collect::<Result<_>>()?;
    let argmax = |sel: fn(&(f64, f64)) -> f64| {
        per_node.iter().enumerate().fold((0, 0.0f64), |acc, (i, v)| if sel(v) > acc.1 { (i, sel(v)) } else { acc })
    };
    let (worst_sub_node, sub_violation) = argmax(|v| v.0);
    let (worst_super_node, super_violation) = argmax(|v| v.1);
    let threshold = c_threshold * grid.spacing().to_f64_lossy();
    Ok(ResidualReport {
        sub_violation,
        super_violation,
        worst_sub_node,
        worst_super_node,
        threshold,
        pass: sub_violation <= threshold && super_violation <= threshold,
    })
}
