//! End-to-end acceptance run: every criterion is evaluated at its stated
//! tolerance and reported on one line. The process fails if any criterion
//! fails; no criterion stops the others from running.

use std::f64::consts::PI;
use std::time::Instant;

use geovisc::jacobi::{
    check_curvature_bound, check_sign_condition, index_form, index_minimality_check, solve_jacobi_bvp, SignCheckOptions,
    SignReport,
};
use geovisc::jets::{doubling_diagnostic, star_consequence_sweep};
use geovisc::operators::{self as ops, OperatorSpec, ScalarField};
use geovisc::report::sample_rng;
use geovisc::solver::{
    build_grid, discrete_comparison, perron_iterate, solve_fixed_point, with_value_term, yamabe_solve, GridFunction,
    PairDistances, SolveOptions,
};
use geovisc::{ManifoldModel, Point};
use rand::Rng;

type M = ManifoldModel<f64>;
type Outcome = Result<(bool, String), geovisc::Error>;

const TOL: f64 = 1e-9;

fn all_models() -> Vec<M> {
    vec![
        M::euclidean(2).unwrap(),
        M::sphere(2, 1.0).unwrap(),
        M::sphere(3, 1.7).unwrap(),
        M::hyperbolic(2, 1.0).unwrap(),
        M::hyperbolic(3, 2.0).unwrap(),
        M::flat_torus(vec![1.0, 1.5]).unwrap(),
        M::product(vec![M::sphere(2, 1.0).unwrap(), M::hyperbolic(2, 1.0).unwrap()]).unwrap(),
    ]
}

fn sphere() -> M {
    M::sphere(2, 1.0).unwrap()
}

fn solve_opts() -> SolveOptions {
    SolveOptions { tol: TOL, ..SolveOptions::default() }
}

/// Largest relative deviation of the sampled values from `f(ℓ)‖v‖²`.
fn closed_form_gap(r: &SignReport, f: impl Fn(f64) -> f64) -> f64 {
    r.records
        .iter()
        .map(|s| {
            let c = f(s.ell) * s.v_norm_sq;
            (s.value - c).abs() / c.abs().max(1e-300)
        })
        .fold(0.0, f64::max)
}

fn sign_opts(lo: f64, hi: f64, seed: u64) -> SignCheckOptions {
    SignCheckOptions { samples: 10_000, ell_range: Some((lo, hi)), normal_only: true, tolerance: 1e-8, seed }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let r = check_sign_condition(&sphere(), &sign_opts(0.05, 0.9 * PI, 1))?;
    let gap = closed_form_gap(&r, |l| -4.0 * l * (1.0 - l.cos()) / l.sin());
    let secs = t.elapsed().as_secs_f64();
    Ok((
        r.summary.pass && r.records.len() == 10_000 && gap <= 1e-6 && secs < 10.0,
        format!("max value {:.3e}, closed-form rel. error {gap:.2e}, {secs:.2}s", r.max_value),
    ))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let m = M::hyperbolic(2, 1.0)?;
    let opts = sign_opts(0.05, 3.0, 2);
    let r = check_sign_condition(&m, &opts)?;
    let gap = closed_form_gap(&r, |l| 4.0 * l * (l.cosh() - 1.0) / l.sinh());
    let b = check_curvature_bound(&m, 1.0, &opts)?;
    let secs = t.elapsed().as_secs_f64();
    Ok((
        r.summary.pass && b.summary.pass && gap <= 1e-6 && secs < 10.0,
        format!(
            "min value {:.3e}, closed-form rel. error {gap:.2e}, bound excess {:.3e}, {secs:.2}s",
            r.min_value, b.summary.max_violation
        ),
    ))
}

fn random_segment_data(m: &M, seed: u64, i: u64) -> (Point<f64>, Point<f64>, [geovisc::TangentVector<f64>; 2]) {
    let mut rng = sample_rng(seed, i);
    let x = m.random_point(&mut rng);
    let reach = (0.9 * m.global_injectivity_radius()).min(2.5);
    let y = m.random_point_at_distance(&x, rng.gen_range(0.05..1.0) * reach, &mut rng);
    let v = m.random_tangent(&x, &mut rng);
    let w = m.random_tangent(&y, &mut rng);
    (x, y, [v, w])
}

fn criterion_3() -> Outcome {
    let models = all_models();
    let per_model = 1000usize.div_ceil(models.len());
    let mut worst = 0.0f64;
    let mut count = 0;
    for (k, m) in models.iter().enumerate() {
        for i in 0..per_model {
            let (x, y, [v, w]) = random_segment_data(m, 30 + k as u64, i as u64);
            let seg = m.geodesic_segment(&x, &y)?;
            let f = solve_jacobi_bvp(&seg, &v, &w)?;
            worst = worst.max((index_form(&seg, &f) - f.boundary_term()).abs());
            count += 1;
        }
    }
    Ok((worst <= 1e-8, format!("{count} fields on {} models, max |I − boundary| {worst:.2e}", models.len())))
}

fn criterion_4() -> Outcome {
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    let models = all_models();
    for (k, m) in models.iter().enumerate() {
        let (x, y, [v, w]) = random_segment_data(m, 40, k as u64);
        let seg = m.geodesic_segment(&x, &y)?;
        let r = index_minimality_check(&seg, &v, &w, 1000, 41 + k as u64)?;
        violations += r.violations;
        tightest = tightest.min(r.min_competitor - r.jacobi_value);
    }
    Ok((
        violations == 0,
        format!("1000 competitors on each of {} models, {violations} violations, min I(Z) − I(X) {tightest:.3e}", models.len()),
    ))
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, seed) in [(sphere(), 5), (M::hyperbolic(2, 1.0)?, 6)] {
        let r = star_consequence_sweep(&m, 10_000, seed)?;
        ok &= r.pass() && r.records.len() == 10_000 && r.min_lq_margin >= -1e-9;
        parts.push(format!(
            "{}: {}/{} pass, min margin {:.3e}",
            r.model,
            r.records.len() - r.failures,
            r.records.len(),
            r.min_lq_margin
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn smooth(p: &Point<f64>, a: &[f64; 4]) -> f64 {
    let c = &p.coords;
    (a[0] * c[0] + a[1] * c[1]).sin() + a[2] * c[2] * c[0] + a[3] * c[1] * c[1]
}

fn criterion_6() -> Outcome {
    let grid = build_grid(&sphere(), 4)?;
    let dist = PairDistances::new(&grid);
    let h = grid.spacing();
    let alphas: Vec<f64> = (0..=12).map(|k| 2f64.powi(k)).collect();
    let (mut worst_ratio, mut worst_gap) = (0.0f64, 0.0f64);
    let mut ok = true;
    for i in 0..20 {
        let mut rng = sample_rng(60, i);
        let mut coeffs = || std::array::from_fn::<f64, 4, _>(|_| rng.gen_range(-2.0..2.0));
        let (a, b) = (coeffs(), coeffs());
        let u = grid.sample(|p| smooth(p, &a));
        let v = grid.sample(|p| smooth(p, &b));
        let t = doubling_diagnostic(&grid, &u, &v, &alphas, &dist)?;
        let last = t.records.last().unwrap();
        // α d² ≤ 2(v(x) − v(y)) at a maximizer, so the grid floor is 2ω_v(h)
        let floor = 2.0 * dist.modulus(&v, h);
        let below = last.alpha_d_sq <= 10.0 * floor;
        let gap_ok = t.final_gap().abs() <= t.modulus;
        ok &= below && gap_ok;
        worst_ratio = worst_ratio.max(last.alpha_d_sq / floor);
        worst_gap = worst_gap.max(t.final_gap().abs() / t.modulus);
    }
    Ok((
        ok,
        format!("20 pairs on {} nodes: max α·d²/floor {worst_ratio:.3}, max |gap|/modulus {worst_gap:.3}", grid.len()),
    ))
}

fn z_problem() -> OperatorSpec<f64> {
    ops::sum(vec![ops::neg_trace(), ops::source(ScalarField::Coord(2))]).unwrap()
}

fn constant_problem() -> OperatorSpec<f64> {
    ops::sum(vec![ops::neg_trace(), ops::source(ScalarField::Const(2.0))]).unwrap()
}

fn z_error(res: usize) -> Result<(f64, f64), geovisc::Error> {
    let g = build_grid(&sphere(), res)?;
    let t = Instant::now();
    let (u, _) = solve_fixed_point(&z_problem(), &g, &g.constant(0.0), &solve_opts())?;
    let exact = g.sample(|p| p.coords[2] / 3.0);
    Ok((u.sup_distance(&exact), t.elapsed().as_secs_f64()))
}

fn criterion_7() -> Outcome {
    let g = build_grid(&sphere(), 3)?;
    let (u, r) = solve_fixed_point(&constant_problem(), &g, &g.constant(0.0), &solve_opts())?;
    let const_err = u.sup_distance(&g.constant(2.0));
    let (e4, _) = z_error(4)?;
    let (e5, secs5) = z_error(5)?;
    Ok((
        r.converged && const_err <= 1e-6 && e4 <= 0.05 && e5 < e4 && secs5 < 60.0,
        format!("constant error {const_err:.2e}; z/3 errors res4 {e4:.4e}, res5 {e5:.4e} ({secs5:.1}s)"),
    ))
}

fn criterion_8() -> Outcome {
    let g = build_grid(&sphere(), 3)?;
    let (a, ra) = solve_fixed_point(&z_problem(), &g, &g.constant(-10.0), &solve_opts())?;
    let (b, rb) = solve_fixed_point(&z_problem(), &g, &g.constant(10.0), &solve_opts())?;
    let spread = a.sup_distance(&b);
    let f = with_value_term(&z_problem())?;
    let bump = g.sample(|p| 0.05 * p.coords[0]);
    let shift = |s: f64| GridFunction::new(a.values.iter().zip(&bump.values).map(|(x, y)| x + s * y - s * 0.02).collect());
    let (sub, sup) = (shift(1.0), shift(-1.0));
    let gamma = ops::monotonicity_estimate(&f, &g.model, (-2.0, 2.0), 1000, 8)?;
    let c = discrete_comparison(&f, &g, &sub, &sup, gamma)?;
    Ok((
        ra.converged && rb.converged && spread <= 2.0 * TOL && c.holds,
        format!(
            "±10 spread {spread:.2e}; max(u − v) {:.4e} ≤ slack/γ̂ {:.4e} (γ̂ {gamma:.6})",
            c.max_difference, c.bound
        ),
    ))
}

fn criterion_9() -> Outcome {
    let g = build_grid(&sphere(), 3)?;
    let f = with_value_term(&constant_problem())?;
    let p = perron_iterate(&f, &g, &g.constant(0.0), &g.constant(10.0), &solve_opts())?;
    let (fixed, _) = solve_fixed_point(&constant_problem(), &g, &g.constant(0.0), &solve_opts())?;
    let gap = p.solution.sup_distance(&fixed);
    Ok((
        p.report.converged && p.ordered && p.min_increment >= 0.0 && gap <= 2.0 * TOL,
        format!(
            "{} sweeps, min increment {:.3e}, ordered {}, distance to fixed point {gap:.2e}",
            p.report.iterations, p.min_increment, p.ordered
        ),
    ))
}

fn criterion_10() -> Outcome {
    let g = build_grid(&sphere(), 3)?;
    let mut worst = 0.0f64;
    let mut ok = true;
    for start in [0.5, 2.0] {
        let (u, r) = yamabe_solve(&g, 3, ScalarField::Const(6.0), -1.0, &g.constant(start), &solve_opts())?;
        ok &= r.converged;
        worst = worst.max(u.max().abs()).max(u.min().abs());
    }
    Ok((ok && worst <= 1e-6, format!("starts 0.5 and 2: sup |u| {worst:.2e}")))
}

fn shipped_builders() -> Vec<OperatorSpec<f64>> {
    use ScalarField::*;
    vec![
        ops::neg_trace(),
        ops::neg_detplus(),
        ops::neg_min_eigenvalue(),
        ops::neg_max_eigenvalue(),
        ops::scalar_term(Const(2.0)),
        ops::value(),
        ops::source(Coord(2)),
        ops::weighted_neg_trace(Affine { c: 2.0, i: 0, a: 1.0 }),
        ops::example_5_3(Const(1.0), Const(0.5)),
        ops::yamabe(3, Const(6.0), -1.0).unwrap(),
        ops::sum(vec![ops::neg_trace(), ops::value()]).unwrap(),
        ops::max(vec![ops::neg_min_eigenvalue(), ops::neg_trace()]).unwrap(),
        ops::min(vec![ops::neg_max_eigenvalue(), ops::neg_trace()]).unwrap(),
        ops::scaled(2.0, ops::neg_trace()).unwrap(),
    ]
}

fn criterion_11() -> Outcome {
    let s = sphere();
    let mut failed = Vec::new();
    let builders = shipped_builders();
    for op in &builders {
        let r = ops::ellipticity_check(op, &s, 10_000, 11)?;
        if !r.summary.pass {
            let w = r.witness.as_ref().map(|w| format!(" A={:?} B={:?}", w.a, w.b)).unwrap_or_default();
            failed.push(format!("ellipticity {} (F(B) − F(A) = {:.3e}{w})", op.name, r.summary.max_violation));
        }
    }
    let mut worst_inv = 0.0f64;
    for m in [s.clone(), M::hyperbolic(2, 1.0)?, M::flat_torus(vec![1.0, 2.0])?] {
        for op in [ops::neg_trace(), ops::neg_detplus()] {
            let r = ops::invariance_check(&op, &m, 10_000, 1e-10, 12)?;
            worst_inv = worst_inv.max(r.max_violation);
            if !r.pass {
                failed.push(format!("invariance {} on {} ({:.3e})", op.name, m.name(), r.max_violation));
            }
        }
    }
    let y = ops::yamabe(3, ScalarField::Const(6.0), -1.0)?;
    let gamma = ops::monotonicity_estimate(&y, &s, (0.0, 2.0), 10_000, 13)?;
    if gamma < 6.0 * (1.0 - 1e-12) {
        failed.push(format!("yamabe γ̂ = {gamma} < min S = 6"));
    }
    let head = format!(
        "{} builders, max invariance error {worst_inv:.2e}, yamabe γ̂ {gamma:.6}",
        builders.len()
    );
    if failed.is_empty() {
        Ok((true, head))
    } else {
        Ok((false, format!("{head}; failed: {}", failed.join("; "))))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Hessian sign, positive curvature", criterion_1),
        ("Hessian sign and bound, negative curvature", criterion_2),
        ("index form equals endpoint expression", criterion_3),
        ("Jacobi fields minimize the index form", criterion_4),
        ("(*) candidates satisfy P ≤ L(Q) + slack", criterion_5),
        ("doubling-of-variables diagnostic", criterion_6),
        ("solver oracles", criterion_7),
        ("uniqueness and discrete comparison", criterion_8),
        ("Perron sweeps", criterion_9),
        ("Yamabe zero solution", criterion_10),
        ("operator structure", criterion_11),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
