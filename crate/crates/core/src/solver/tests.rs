use super::*;
use crate::manifold::{ManifoldModel, Point};
use crate::operators::{self, ScalarField};
use crate::report::sample_rng;
use std::f64::consts::PI;

fn sphere_grid(res: usize) -> Grid<f64> {
    build_grid(&ManifoldModel::sphere(2, 1.0).unwrap(), res).unwrap()
}

fn torus_grid(res: usize) -> Grid<f64> {
    build_grid(&ManifoldModel::flat_torus(vec![1.0, 1.0]).unwrap(), res).unwrap()
}

fn torus_grid_checked(res: usize) -> crate::Result<Grid<f64>> {
    build_grid(&ManifoldModel::flat_torus(vec![1.0, 1.0]).unwrap(), res)
}

fn z(p: &Point<f64>) -> f64 {
    p.coords[2]
}

/// `u − Δu = z` written as `G = −trace(A) − z`.
fn z_problem() -> operators::OperatorSpec<f64> {
    operators::sum(vec![operators::neg_trace(), operators::source(ScalarField::Coord(2))]).unwrap()
}

fn constant_problem() -> operators::OperatorSpec<f64> {
    operators::sum(vec![operators::neg_trace(), operators::source(ScalarField::Const(2.0))]).unwrap()
}

fn opts(tol: f64) -> SolveOptions {
    SolveOptions { tol, ..Default::default() }
}

#[test]
fn grid_sizes_and_weights() {
    assert_eq!(sphere_grid(2).len(), 162);
    assert_eq!(sphere_grid(0).len(), 12);
    assert_eq!(torus_grid(32).len(), 1024);
    for g in [sphere_grid(3), torus_grid(12)] {
        assert_eq!(g.stencils.iter().map(Vec::len).max(), Some(STENCIL_POINTS));
        for st in &g.stencils {
            for p in st {
                assert!(p.weights.iter().all(|&w| w >= 0.0));
                assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        let inj = g.model.global_injectivity_radius();
        assert!(g.spacing() < inj / 4.0);
    }
    assert!(build_grid(&ManifoldModel::<f64>::hyperbolic(2, 1.0).unwrap(), 2).is_err());
    assert!(build_grid(&ManifoldModel::<f64>::sphere(3, 1.0).unwrap(), 2).is_err());
    assert!(torus_grid_checked(8).is_err());
}

#[test]
fn torus_stencils_hit_nodes() {
    let g = torus_grid(12);
    for (i, st) in g.stencils.iter().enumerate() {
        for (p, d) in st.iter().zip(g.shape.displacements()) {
            assert_eq!(p.weights[0], 1.0);
            let expected = g.model.exp_raw(&g.nodes[i].coords, &d);
            assert!(g.model.dist_raw(&expected, &g.nodes[p.nodes[0]].coords) < 1e-12);
        }
    }
}

#[test]
fn sphere_foot_points_are_interpolated_nearby() {
    let g = sphere_grid(3);
    for (i, st) in g.stencils.iter().enumerate() {
        for (p, d) in st.iter().zip(g.shape.displacements()) {
            let [e1, e2] = &g.frames[i];
            let v: Vec<f64> = (0..3).map(|k| d[0] * e1[k] + d[1] * e2[k]).collect();
            let foot = g.model.exp_raw(&g.nodes[i].coords, &v);
            for &n in &p.nodes {
                assert!(g.model.dist_raw(&foot, &g.nodes[n].coords) <= 1.01 * g.max_edge);
            }
        }
    }
}

#[test]
fn proxies_vanish_on_constants() {
    let g = sphere_grid(2);
    let u = g.constant(3.5);
    for i in 0..g.len() {
        let (grad, a) = derivative_proxies(&g, &u.values, i);
        assert!(grad.iter().all(|v| v.abs() < 1e-12));
        assert!(a.max_abs() < 1e-9);
    }
}

#[test]
fn trace_proxy_converges_to_laplacian_of_z() {
    let mut errs = Vec::new();
    for res in [2, 3, 4] {
        let g = sphere_grid(res);
        let u = g.sample(z);
        let err = (0..g.len())
            .map(|i| {
                let (_, a) = derivative_proxies(&g, &u.values, i);
                (a.trace() + 2.0 * u.values[i]).abs()
            })
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn gradient_proxy_converges_for_z() {
    let mut errs = Vec::new();
    for res in [2, 3, 4] {
        let g = sphere_grid(res);
        let u = g.sample(z);
        let err = (0..g.len())
            .map(|i| {
                let (grad, _) = derivative_proxies(&g, &u.values, i);
                let [e1, e2] = &g.frames[i];
                // gradient of z is the tangential part of the third axis
                ((grad[0] - e1[2]).powi(2) + (grad[1] - e2[2]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn torus_second_difference_matches_fourier_symbol() {
    let g = torus_grid(32);
    let u = g.sample(|p| (2.0 * PI * p.coords[0]).sin());
    let h = 1.0 / 32.0;
    let symbol = -4.0 * (PI * h).sin().powi(2) / (h * h);
    for i in 0..g.len() {
        let (_, a) = derivative_proxies(&g, &u.values, i);
        assert!((a[(0, 0)] - symbol * u.values[i]).abs() < 1e-9);
        assert!((a[(0, 0)] + 4.0 * PI * PI * u.values[i]).abs() < 0.2);
        assert!(a[(1, 1)].abs() < 1e-9 && a[(0, 1)].abs() < 1e-9);
    }
}

#[test]
fn scheme_is_monotone_for_trace_operators() {
    let g = sphere_grid(3);
    let mut rng = sample_rng(3, 0);
    let u = g.sample(|p| p.coords[0] * p.coords[1] + rand::Rng::gen_range(&mut rng.clone(), 0.0..1.0) * z(p));
    let _ = &mut rng;
    for op in [z_problem(), operators::yamabe(3, ScalarField::Const(6.0), -1.0).unwrap()] {
        assert!(monotonicity_probe(&op, &g, &u, 100, 1e-3, 1).unwrap() <= 1e-12);
    }
}

#[test]
fn cross_term_proxy_breaks_monotonicity_of_eigenvalue_operators() {
    // the rotated-direction cross term enters with both signs, so
    // −λ_min(A_h) need not be monotone in the neighbour values
    let g = sphere_grid(3);
    let u = g.sample(|p| p.coords[0] * p.coords[1]);
    assert!(monotonicity_probe(&operators::neg_min_eigenvalue(), &g, &u, 100, 1e-3, 1).unwrap() > 0.0);
}

#[test]
fn constants_are_exact() {
    let g = sphere_grid(3);
    let (u, r) = solve_fixed_point(&constant_problem(), &g, &g.constant(0.0), &opts(1e-10)).unwrap();
    assert!(r.converged);
    assert!(u.values.iter().all(|v| (v - 2.0).abs() < 1e-6));
    assert!(r.is_nonincreasing_after(1));
}

#[test]
fn eigenfunction_oracle_at_resolution_four() {
    let g = sphere_grid(4);
    let (u, r) = solve_fixed_point(&z_problem(), &g, &g.constant(0.0), &opts(1e-9)).unwrap();
    assert!(r.converged);
    let exact = g.sample(|p| z(p) / 3.0);
    assert!(u.sup_distance(&exact) <= 0.05, "{}", u.sup_distance(&exact));
}

#[test]
fn initializations_agree() {
    let g = sphere_grid(3);
    let tol = 1e-8;
    let (a, _) = solve_fixed_point(&z_problem(), &g, &g.constant(10.0), &opts(tol)).unwrap();
    let (b, _) = solve_fixed_point(&z_problem(), &g, &g.constant(-10.0), &opts(tol)).unwrap();
    assert!(a.sup_distance(&b) <= 2.0 * tol);
}

#[test]
fn divergence_is_reported() {
    let g = sphere_grid(2);
    let anti = operators::OperatorSpec::custom("anti", |_, _, _, a: &crate::linalg::Matrix<f64>| Ok(a.trace()));
    let o = SolveOptions { theta: Some(1.0), tol: 1e-9, max_iter: 10_000, growth: 1e3 };
    let u0 = g.sample(|p| p.coords[0]);
    assert!(matches!(solve_fixed_point(&anti, &g, &u0, &o), Err(crate::Error::Divergence { .. })));
}

#[test]
fn comparison_on_constructed_pair() {
    let g = sphere_grid(3);
    let f = with_value_term(&z_problem()).unwrap();
    let (exact, _) = solve_fixed_point(&z_problem(), &g, &g.constant(0.0), &opts(1e-10)).unwrap();
    let bump = g.sample(|p| 0.05 * p.coords[0]);
    let u = GridFunction::new(exact.values.iter().zip(&bump.values).map(|(a, b)| a + b - 0.02).collect());
    let v = GridFunction::new(exact.values.iter().zip(&bump.values).map(|(a, b)| a - b + 0.02).collect());
    let gamma = crate::operators::monotonicity_estimate(&f, &g.model, (-2.0, 2.0), 200, 1).unwrap();
    let c = discrete_comparison(&f, &g, &u, &v, gamma).unwrap();
    assert!(c.holds, "{c:?}");
    assert!(c.max_difference > 0.0);
}

#[test]
fn dirichlet_constant_boundary() {
    let g = sphere_grid(3);
    let north = g.model.point(vec![0.0, 0.0, 1.0]).unwrap();
    let boundary = ball_boundary_mask(&g, &north, 1.0);
    assert!(boundary.iter().any(|b| !b));
    let f = g.constant(1.5);
    let (u, r) = solve_dirichlet(&operators::neg_trace(), &g, &boundary, &f, &opts(1e-10)).unwrap();
    assert!(r.converged);
    assert!(u.values.iter().all(|v| (v - 1.5).abs() < 1e-6));
}

#[test]
fn dirichlet_maximum_principle() {
    let g = sphere_grid(3);
    let north = g.model.point(vec![0.0, 0.0, 1.0]).unwrap();
    let boundary = ball_boundary_mask(&g, &north, 1.2);
    let f = g.sample(|p| (3.0 * p.coords[0]).sin());
    let (u, _) = solve_dirichlet(&operators::neg_trace(), &g, &boundary, &f, &opts(1e-10)).unwrap();
    let pinned: Vec<f64> = (0..g.len()).filter(|&i| boundary[i]).map(|i| f.values[i]).collect();
    let (lo, hi) = pinned.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    for i in 0..g.len() {
        if boundary[i] {
            assert_eq!(u.values[i], f.values[i]);
        } else {
            assert!(u.values[i] >= lo - 1e-9 && u.values[i] <= hi + 1e-9);
        }
    }
    // u − Δu = z with boundary data z: bounded by the extremes of the data and the source
    let fz = g.sample(z);
    let op = with_value_term(&z_problem()).unwrap();
    let (u, _) = solve_dirichlet(&op, &g, &boundary, &fz, &opts(1e-10)).unwrap();
    let inside = g.ball_mask(&north, 1.2);
    let (lo, hi) = (0..g.len())
        .filter(|&i| inside[i] || boundary[i] && g.ball_mask(&north, 1.2)[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), i| (a.min(fz.values[i]), b.max(fz.values[i])));
    for i in (0..g.len()).filter(|&i| !boundary[i]) {
        assert!(u.values[i] >= lo - 1e-9 && u.values[i] <= hi + 1e-9);
    }
}

#[test]
fn dirichlet_without_interior_returns_data() {
    let g = sphere_grid(2);
    let f = g.sample(z);
    let (u, r) = solve_dirichlet(&operators::neg_trace(), &g, &vec![true; g.len()], &f, &opts(1e-9)).unwrap();
    assert_eq!(u, f);
    assert_eq!(r.iterations, 0);
    assert!(solve_dirichlet(&operators::neg_trace(), &g, &vec![false; g.len()], &f, &opts(1e-9)).is_err());
}

#[test]
fn perron_examples() {
    let g = sphere_grid(3);
    let f = with_value_term(&constant_problem()).unwrap();
    let tol = 1e-9;
    let p = perron_iterate(&f, &g, &g.constant(0.0), &g.constant(10.0), &opts(tol)).unwrap();
    assert!(p.report.converged && p.ordered && p.min_increment >= 0.0);
    assert!(p.solution.values.iter().all(|v| (v - 2.0).abs() <= 2.0 * tol));

    let exact = g.constant(2.0);
    let same = perron_iterate(&f, &g, &exact, &exact, &opts(tol)).unwrap();
    assert_eq!(same.solution, exact);

    assert!(perron_iterate(&f, &g, &g.constant(1.0), &g.constant(0.0), &opts(tol)).is_err());
    assert!(matches!(
        perron_iterate(&f, &g, &g.constant(5.0), &g.constant(10.0), &opts(tol)),
        Err(crate::Error::Precondition(_))
    ));
}

#[test]
fn yamabe_examples() {
    let g = sphere_grid(3);
    let s = ScalarField::Const(6.0);
    let o = opts(1e-9);
    let (a, r) = yamabe_solve(&g, 3, s, -1.0, &g.constant(1.0), &o).unwrap();
    assert!(r.converged);
    let (b, _) = yamabe_solve(&g, 3, s, -1.0, &g.sample(|p| 0.5 + 0.5 * z(p)), &o).unwrap();
    assert!(a.values.iter().chain(&b.values).all(|v| v.abs() < 1e-6));
    assert!(a.sup_distance(&b) <= 2e-9);
    let (c, _) = yamabe_solve(&g, 3, s, 0.0, &g.constant(1.0), &o).unwrap();
    assert!(c.values.iter().all(|v| v.abs() < 1e-6));

    assert!(yamabe_solve(&g, 3, ScalarField::Coord(2), -1.0, &g.constant(1.0), &o).is_err());
    assert!(yamabe_solve(&g, 3, s, 1.0, &g.constant(1.0), &o).is_err());
    assert!(yamabe_solve(&g, 3, s, -1.0, &g.constant(-1.0), &o).is_err());
    assert!(yamabe_solve(&torus_grid(12), 3, s, -1.0, &torus_grid(12).constant(1.0), &o).is_err());
}

#[test]
fn residual_examples() {
    let g = sphere_grid(3);
    let f = with_value_term(&constant_problem()).unwrap();
    let exact = g.constant(2.0);
    let r = verify_viscosity_residual(&f, &g, &exact, 1.0).unwrap();
    assert!(r.pass && r.sub_violation < 1e-9 && r.super_violation < 1e-9);

    let mut spiked = exact.clone();
    spiked.values[17] += 0.5;
    let r = verify_viscosity_residual(&f, &g, &spiked, 1.0).unwrap();
    assert!(!r.pass);
    assert_eq!(r.worst_sub_node, 17);
    assert!(r.sub_violation >= 0.5);

    let value = operators::value::<f64>();
    let r = verify_viscosity_residual(&value, &g, &g.constant(0.3), 1.0).unwrap();
    assert!((r.sub_violation - 0.3).abs() < 1e-12 && r.super_violation == 0.0);
    let r = verify_viscosity_residual(&value, &g, &g.constant(-0.3), 1.0).unwrap();
    assert!((r.super_violation - 0.3).abs() < 1e-12 && r.sub_violation == 0.0);
}

#[test]
fn residual_of_computed_solution_is_small() {
    let g = sphere_grid(4);
    let f = with_value_term(&z_problem()).unwrap();
    let (u, _) = solve_fixed_point(&z_problem(), &g, &g.constant(0.0), &opts(1e-9)).unwrap();
    let r = verify_viscosity_residual(&f, &g, &u, 1.0).unwrap();
    assert!(r.pass, "{r:?}");
}
