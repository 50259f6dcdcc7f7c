use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridFunction};
use super::scheme::{apply_scheme, discretize, stencil_support};
use crate::error::{arg, Error, Result};
use crate::manifold::{ManifoldModel, Point};
use crate::operators::{self, OperatorSpec, ScalarField};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Damping `θ`; `None` uses `1/(1 + L̂)` with `L̂` the largest
    /// self-derivative of `G_h` measured at the initial iterate.
    pub theta: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Divergence is declared when the residual exceeds `growth` times its
    /// running minimum, or stops being finite.
    pub growth: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { theta: None, tol: 1e-9, max_iter: 200_000, growth: 1e3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Sup-norm residual `max |F_h(u_k)|` before each update, and at the end.
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub converged: bool,
    pub theta: f64,
    /// Seconds.
    pub wall_time: f64,
}

impl SolveReport {
    /// Residuals never increase after the first `burn_in` entries (up to a
    /// relative slack for rounding).
    pub fn is_nonincreasing_after(&self, burn_in: usize) -> bool {
        self.residual_history
            .iter()
            .skip(burn_in)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| *w[1] <= *w[0] * (1.0 + 1e-9) + 1e-15)
    }
}

/// `F = r + G`.
pub fn with_value_term<T: Real>(g: &OperatorSpec<T>) -> Result<OperatorSpec<T>> {
    operators::sum(vec![operators::value(), g.clone()])
}

/// Largest `∂F_h(x_i)/∂u_i` over the active nodes, by one-sided probing.
fn self_derivative<T: Real>(f: &OperatorSpec<T>, grid: &Grid<T>, u: &GridFunction<T>, active: &[bool]) -> Result<f64> {
    let vals = (0..grid.len())
        .into_par_iter()
        .filter(|&i| active[i])
        .map(|i| {
            let base = discretize(f, grid, u, i)?;
            let delta = T::lit(1e-6) * (T::one() + u.values[i].abs());
            let mut w = u.clone();
            w.values[i] = w.values[i] + delta;
            Ok(((discretize(f, grid, &w, i)? - base) / delta).to_f64_lossy())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Damped monotone iteration `u ← u − θ F_h(u)` on the active nodes, until
/// `max |F_h(u)| ≤ tol`. With `θ ≤ 1/∂F_h/∂u_i` the update is a monotone
/// map, and a contraction when `F` is strongly increasing in `r`.
fn iterate<T: Real>(
    f: &OperatorSpec<T>,
    grid: &Grid<T>,
    u0: &GridFunction<T>,
    active: &[bool],
    opts: &SolveOptions,
    mut clamp: impl FnMut(usize, T, T) -> T,
) -> Result<(GridFunction<T>, SolveReport)> {
    let start = Instant::now();
    if u0.len() != grid.len() {
        return Err(arg("initial iterate does not match the grid"));
    }
    if !u0.is_finite() {
        return Err(arg("initial iterate must be finite"));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(arg("tolerance and iteration budget must be positive"));
    }
    let theta = match opts.theta {
        Some(t) if t > 0.0 && t <= 1.0 => t,
        Some(_) => return Err(arg("damping must lie in (0, 1]")),
        None => 1.0 / (1.0 + 1.05 * (self_derivative(f, grid, u0, active)? - 1.0).max(0.0)),
    };
    let th = T::lit(theta);
    let mut u = u0.clone();
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut iterations = 0;
    loop {
        let res = apply_scheme(f, grid, &u)?;
        let sup = (0..grid.len())
            .filter(|&i| active[i])
            .fold(0.0f64, |m, i| m.max(res.values[i].abs().to_f64_lossy()));
        history.push(sup);
        if !sup.is_finite() || sup > opts.growth * best.max(opts.tol) {
            return Err(Error::Divergence { iterations, residual: sup });
        }
        best = best.min(sup);
        if sup <= opts.tol || iterations >= opts.max_iter {
            let report = SolveReport {
                iterations,
                final_residual: sup,
                converged: sup <= opts.tol,
                residual_history: history,
                theta,
                wall_time: start.elapsed().as_secs_f64(),
            };
            return Ok((u, report));
        }
        let next: Vec<T> = (0..grid.len())
            .into_par_iter()
            .map(|i| if active[i] { u.values[i] - th * res.values[i] } else { u.values[i] })
            .collect();
        for (i, v) in next.into_iter().enumerate() {
            u.values[i] = if active[i] { clamp(i, u.values[i], v) } else { v };
        }
        iterations += 1;
    }
}

/// Solves the discrete equation `u + G_h(x, u) = 0` on the whole grid.
pub fn solve_fixed_point<T: Real>(
    g: &OperatorSpec<T>,
    grid: &Grid<T>,
    u0: &GridFunction<T>,
    opts: &SolveOptions,
) -> Result<(GridFunction<T>, SolveReport)> {
    let f = with_value_term(g)?;
    solve_equation(&f, grid, u0, opts)
}

/// Solves `F_h(x, u) = 0` on the whole grid.
pub fn solve_equation<T: Real>(
    f: &OperatorSpec<T>,
    grid: &Grid<T>,
    u0: &GridFunction<T>,
    opts: &SolveOptions,
) -> Result<(GridFunction<T>, SolveReport)> {
    let active = vec![true; grid.len()];
    iterate(f, grid, u0, &active, opts, |_, _, v| v)
}

/// Boundary mask for the Dirichlet problem on the geodesic ball
/// `B(center, radius)`: a node is interior when it lies in the ball and its
/// whole stencil does too; every other node is pinned.
pub fn ball_boundary_mask<T: Real>(grid: &Grid<T>, center: &Point<T>, radius: T) -> Vec<bool> {
    let inside = grid.ball_mask(center, radius);
    (0..grid.len())
        .map(|i| !(inside[i] && stencil_support(grid, i).iter().all(|&j| inside[j])))
        .collect()
}

/// Solves `F_h(x, u) = 0` at unpinned nodes with `u = f` on the pinned
/// (`boundary[i] == true`) ones.
pub fn solve_dirichlet<T: Real>(
    f_op: &OperatorSpec<T>,
    grid: &Grid<T>,
    boundary: &[bool],
    f: &GridFunction<T>,
    opts: &SolveOptions,
) -> Result<(GridFunction<T>, SolveReport)> {
    if boundary.len() != grid.len() || f.len() != grid.len() {
        return Err(arg("boundary mask and data must match the grid"));
    }
    if !boundary.iter().any(|&b| b) {
        return Err(arg("the boundary mask is empty"));
    }
    let active: Vec<bool> = boundary.iter().map(|b| !b).collect();
    if !active.iter().any(|&a| a) {
        let report = SolveReport {
            iterations: 0,
            residual_history: vec![0.0],
            final_residual: 0.0,
            converged: true,
            theta: 1.0,
            wall_time: 0.0,
        };
        return Ok((f.clone(), report));
    }
    iterate(f_op, grid, f, &active, opts, |_, _, v| v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronResult<T> {
    pub solution: GridFunction<T>,
    pub report: SolveReport,
    /// Smallest nodewise increment seen over all sweeps (never negative).
    pub min_increment: f64,
    /// Whether `usub ≤ w_k ≤ usuper` held after every sweep.
    pub ordered: bool,
}

/// Perron-style sweeps `w_{k+1} = min(max(T(w_k), w_k), usuper)` with the
/// monotone update `T(w) = w − θ F_h(w)`, starting at `usub`.
///
/// `usub ≤ usuper` is required; `usub` must be a discrete subsolution
/// (`F_h ≤ h`) and `usuper` a supersolution (`F_h ≥ −h`), with `h` the grid
/// step.
pub fn perron_iterate<T: Real>(
    f: &OperatorSpec<T>,
    grid: &Grid<T>,
    usub: &GridFunction<T>,
    usuper: &GridFunction<T>,
    opts: &SolveOptions,
) -> Result<PerronResult<T>> {
    if usub.len() != grid.len() || usuper.len() != grid.len() {
        return Err(arg("sub- and supersolution must match the grid"));
    }
    if usub.values.iter().zip(&usuper.values).any(|(a, b)| a > b) {
        return Err(arg("usub must lie below usuper at every node"));
    }
    let h = grid.spacing();
    let fsub = apply_scheme(f, grid, usub)?;
    if fsub.max() > h {
        return Err(Error::Precondition(format!(
            "usub is not a discrete subsolution (max F_h = {})",
            fsub.max().to_f64_lossy()
        )));
    }
    let fsup = apply_scheme(f, grid, usuper)?;
    if fsup.min() < -h {
        return Err(Error::Precondition(format!(
            "usuper is not a discrete supersolution (min F_h = {})",
            fsup.min().to_f64_lossy()
        )));
    }
    let mut min_increment = f64::INFINITY;
    let mut ordered = true;
    let upper = usuper.values.clone();
    let lower = usub.values.clone();
    let active = vec![true; grid.len()];
    let (solution, report) = iterate(f, grid, usub, &active, opts, |i, old, new| {
        let w = new.max(old).min(upper[i]);
        min_increment = min_increment.min((w - old).to_f64_lossy());
        ordered &= w >= lower[i] && w <= upper[i];
        w
    })?;
    Ok(PerronResult {
        solution,
        report,
        min_increment: if min_increment.is_finite() { min_increment } else { 0.0 },
        ordered,
    })
}

/// `max(u − v)` against the bound `slack/γ` for a discrete subsolution `u`
/// and supersolution `v`, where `slack = max F_h(u)⁺ + max (−F_h(v))⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub max_difference: f64,
    pub slack: f64,
    pub gamma: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn discrete_comparison<T: Real>(
    f: &OperatorSpec<T>,
    grid: &Grid<T>,
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    gamma: f64,
) -> Result<ComparisonReport> {
    if !(gamma > 0.0) {
        return Err(arg("comparison needs a positive monotonicity constant"));
    }
    let fu = apply_scheme(f, grid, u)?;
    let fv = apply_scheme(f, grid, v)?;
    let slack = fu.max().to_f64_lossy().max(0.0) + (-fv.min().to_f64_lossy()).max(0.0);
    let max_difference = u.sub(v).max().to_f64_lossy();
    let bound = slack / gamma;
    Ok(ComparisonReport { max_difference, slack, gamma, bound, holds: max_difference <= bound + 1e-12 })
}

/// Solves the Yamabe-type equation
/// `S(x)u − S′u^{(n+2)/(n−2)} − 4(n−1)/(n−2) Δu = 0` on a grid over
/// `Sphere(2, r)`, with the formal dimension `n ≥ 3` supplied separately.
/// The 2-sphere is only a computational domain here.
pub fn yamabe_solve<T: Real>(
    grid: &Grid<T>,
    n: usize,
    s: ScalarField<T>,
    s_prime: T,
    u0: &GridFunction<T>,
    opts: &SolveOptions,
) -> Result<(GridFunction<T>, SolveReport)> {
    if !matches!(grid.model, ManifoldModel::Sphere { dim: 2, .. }) {
        return Err(Error::Precondition("the Yamabe driver runs on Sphere(2, r) grids".into()));
    }
    if grid.nodes.iter().any(|p| !(s.eval(&p.coords) > T::zero())) {
        return Err(Error::Precondition("S must be positive at every node".into()));
    }
    if s_prime > T::zero() {
        return Err(Error::Precondition("S′ must be nonpositive".into()));
    }
    if u0.values.iter().any(|&v| v < T::zero()) {
        return Err(Error::Precondition("the initial iterate must be nonnegative".into()));
    }
    let f = operators::yamabe(n, s, s_prime)?;
    solve_equation(&f, grid, u0, opts)
}
