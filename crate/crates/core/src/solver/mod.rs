//! Monotone semi-Lagrangian schemes for `F(x, u, du, d²u) = 0` on compact
//! two-dimensional models.

mod grid;
mod residual;
mod scheme;
mod solve;

pub use grid::{
    build_grid, build_sphere_grid, Grid, GridFunction, GridKind, Interp, PairDistances, StencilShape,
    SPHERE_STEP_FACTOR, STENCIL_POINTS,
};
pub use residual::{verify_viscosity_residual, ResidualReport};
pub use scheme::{apply_scheme, derivative_proxies, discretize, monotonicity_probe, stencil_support};
pub use solve::{
    ball_boundary_mask, discrete_comparison, perron_iterate, solve_dirichlet, solve_equation, solve_fixed_point,
    with_value_term, yamabe_solve, ComparisonReport, PerronResult, SolveOptions, SolveReport,
};

#[cfg(test)]
mod tests;
