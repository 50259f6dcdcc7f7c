use rand::Rng;
use rayon::prelude::*;

use super::grid::{Grid, GridFunction};
use crate::error::{arg, Result};
use crate::linalg::Matrix;
use crate::operators::OperatorSpec;
use crate::report::sample_rng;
use crate::scalar::Real;

/// Gradient and Hessian proxies at a node, in the node frame.
///
/// With `S_k = u(+p_k) + u(−p_k) − 2u(x)` over the four stencil directions,
/// `A₁₁ = S₀/h₁²`, `A₂₂ = S₁/h₂²`, `A₁₂ = (S₂ − S₃)/(4ab)` for diagonals
/// `(a, ±b)`, and `∂ᵢu = (u(+hᵢeᵢ) − u(−hᵢeᵢ))/(2hᵢ)`.
pub fn derivative_proxies<T: Real>(grid: &Grid<T>, values: &[T], node: usize) -> (Vec<T>, Matrix<T>) {
    let st = &grid.stencils[node];
    let u0 = values[node];
    let f: Vec<T> = st.iter().map(|p| p.apply(values)).collect();
    let two = T::lit(2.0);
    let [h1, h2] = grid.shape.steps;
    let [a, b] = grid.shape.diagonal;
    let s = |k: usize| f[2 * k] + f[2 * k + 1] - two * u0;
    let grad = vec![(f[0] - f[1]) / (two * h1), (f[2] - f[3]) / (two * h2)];
    let a11 = s(0) / (h1 * h1);
    let a22 = s(1) / (h2 * h2);
    let a12 = (s(2) - s(3)) / (T::lit(4.0) * a * b);
    (grad, Matrix::from_rows(&[vec![a11, a12], vec![a12, a22]]))
}

/// `G_h(x_i, u)`: the operator evaluated on the derivative proxies.
pub fn discretize<T: Real>(op: &OperatorSpec<T>, grid: &Grid<T>, u: &GridFunction<T>, node: usize) -> Result<T> {
    let (g, a) = derivative_proxies(grid, &u.values, node);
    op.eval_frame(&grid.nodes[node].coords, u.values[node], &g, &a)
}

/// `G_h` at every node.
pub fn apply_scheme<T: Real>(op: &OperatorSpec<T>, grid: &Grid<T>, u: &GridFunction<T>) -> Result<GridFunction<T>> {
    if u.len() != grid.len() {
        return Err(arg("grid function does not match the grid"));
    }
    let values = (0..grid.len()).into_par_iter().map(|i| discretize(op, grid, u, i)).collect::<Result<_>>()?;
    Ok(GridFunction::new(values))
}

/// Nodes whose value enters the stencil of `node`, other than `node` itself.
pub fn stencil_support<T: Real>(grid: &Grid<T>, node: usize) -> Vec<usize> {
    let mut out: Vec<usize> = grid.stencils[node]
        .iter()
        .flat_map(|p| p.nodes.iter().zip(&p.weights).filter(|(_, w)| **w > T::zero()).map(|(n, _)| *n))
        .filter(|&n| n != node)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Largest increase of `G_h(x_i)` caused by raising one neighbour value by
/// `delta`, over `n_nodes` random nodes and all their neighbours. A monotone
/// scheme gives a value `≤ 0`.
pub fn monotonicity_probe<T: Real>(
    op: &OperatorSpec<T>,
    grid: &Grid<T>,
    u: &GridFunction<T>,
    n_nodes: usize,
    delta: T,
    seed: u64,
) -> Result<f64> {
    let worst = (0..n_nodes)
        .into_par_iter()
        .map(|k| {
            let node = sample_rng(seed, k as u64).gen_range(0..grid.len());
            let base = discretize(op, grid, u, node)?;
            let mut w = u.clone();
            let mut worst = f64::NEG_INFINITY;
            for j in stencil_support(grid, node) {
                w.values[j] = u.values[j] + delta;
                let v = discretize(op, grid, &w, node)?;
                w.values[j] = u.values[j];
                worst = worst.max((v - base).to_f64_lossy());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(f64::NEG_INFINITY, f64::max))
}
