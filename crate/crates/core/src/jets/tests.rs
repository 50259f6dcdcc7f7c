use super::*;
use crate::jacobi::{hessian_distance_sq, HessianPair};
use crate::solver::{build_grid, GridFunction, PairDistances};
use proptest::prelude::*;

fn sphere() -> ManifoldModel<f64> {
    ManifoldModel::sphere(2, 1.0).unwrap()
}

fn north(m: &ManifoldModel<f64>) -> Point<f64> {
    m.point(vec![0.0, 0.0, 1.0]).unwrap()
}

fn quick() -> JetTestOptions {
    JetTestOptions { directions: 60, ..Default::default() }
}

fn jet(m: &ManifoldModel<f64>, x: &Point<f64>, r: f64, z: &[f64], a: Matrix<f64>) -> Jet2<f64> {
    Jet2::from_frame(m, x, r, z, a).unwrap()
}

/// Frame gradient of `f ∘ exp_x` at the origin.
fn chart_gradient(m: &ManifoldModel<f64>, f: &dyn Fn(&Point<f64>) -> f64, x: &Point<f64>) -> Vec<f64> {
    let h = 1e-6;
    (0..m.dim())
        .map(|i| {
            let mut e = vec![0.0; m.dim()];
            e[i] = h;
            let p = f(&Point::new(m.exp_raw(&x.coords, &m.from_frame_raw(&x.coords, &e))));
            e[i] = -h;
            let q = f(&Point::new(m.exp_raw(&x.coords, &m.from_frame_raw(&x.coords, &e))));
            (p - q) / (2.0 * h)
        })
        .collect()
}

fn height(x: &Point<f64>) -> f64 {
    x.coords[0] + 2.0 * x.coords[1] * x.coords[1] - 0.5 * x.coords[2]
}

#[test]
fn half_distance_squared_has_identity_jet() {
    let m = sphere();
    let p = north(&m);
    let f = |x: &Point<f64>| 0.5 * m.dist_raw(&x.coords, &p.coords).powi(2);
    let j = jet(&m, &p, 0.0, &[0.0, 0.0], Matrix::identity(2));
    for kind in [JetKind::Sub, JetKind::Super] {
        let r = quadratic_jet_test(&m, &f, &j, kind, &quick()).unwrap();
        assert!(r.verdict.is_accept(), "{kind:?}: {r:?}");
    }
}

#[test]
fn cone_accepts_flat_subjets_and_rejects_steep_slopes() {
    let m = sphere();
    let p = north(&m);
    let f = |x: &Point<f64>| m.dist_raw(&x.coords, &p.coords);
    for a in [Matrix::identity(2).scale(50.0), Matrix::diagonal(&[-3.0, 7.0])] {
        let j = jet(&m, &p, 0.0, &[0.0, 0.0], a);
        assert!(quadratic_jet_test(&m, &f, &j, JetKind::Sub, &quick()).unwrap().verdict.is_accept());
    }
    let zeta = [1.2, -0.9];
    let j = jet(&m, &p, 0.0, &zeta, Matrix::zeros(2, 2));
    let r = quadratic_jet_test(&m, &f, &j, JetKind::Sub, &quick()).unwrap();
    match r.verdict {
        Verdict::Reject { witness, .. } => {
            let cos = linalg::dot(&witness, &zeta) / (linalg::norm(&witness) * linalg::norm(&zeta));
            assert!(cos > 0.999, "witness {witness:?} not along zeta");
        }
        Verdict::Accept => panic!("steep slope accepted"),
    }
    // the cone has no superjet at its vertex
    let j = jet(&m, &p, 0.0, &[0.0, 0.0], Matrix::identity(2).scale(100.0));
    assert!(!quadratic_jet_test(&m, &f, &j, JetKind::Super, &quick()).unwrap().verdict.is_accept());
}

#[test]
fn smooth_function_with_slack_is_a_subjet() {
    let m = sphere();
    let x = m.point(vec![0.6, 0.0, 0.8]).unwrap();
    let g = chart_gradient(&m, &height, &x);
    let h = chart_hessian(&m, &height, &x, 1e-4);
    let j = jet(&m, &x, height(&x), &g, h.shift(-0.1));
    assert!(quadratic_jet_test(&m, &height, &j, JetKind::Sub, &quick()).unwrap().verdict.is_accept());
    let j = jet(&m, &x, height(&x), &g, h.shift(0.1));
    assert!(quadratic_jet_test(&m, &height, &j, JetKind::Super, &quick()).unwrap().verdict.is_accept());
    let j = jet(&m, &x, height(&x), &g, h.shift(0.1));
    assert!(!quadratic_jet_test(&m, &height, &j, JetKind::Sub, &quick()).unwrap().verdict.is_accept());
}

#[test]
fn radius_beyond_injectivity_is_a_domain_error() {
    let m = sphere();
    let p = north(&m);
    let j = jet(&m, &p, 0.0, &[0.0, 0.0], Matrix::zeros(2, 2));
    let opts = JetTestOptions { radii: vec![4.0, 1e-2], ..quick() };
    assert!(matches!(quadratic_jet_test(&m, &|_| 0.0, &j, JetKind::Sub, &opts), Err(crate::Error::Domain(_))));
}

#[test]
fn chart_transfer_agrees_on_examples() {
    let m = sphere();
    let p = north(&m);
    let half_sq = |x: &Point<f64>| 0.5 * m.dist_raw(&x.coords, &p.coords).powi(2);
    let cone = |x: &Point<f64>| m.dist_raw(&x.coords, &p.coords);
    let constant = |_: &Point<f64>| 3.0;
    let cases: Vec<(&(dyn Fn(&Point<f64>) -> f64 + Sync), Jet2<f64>, bool)> = vec![
        (&half_sq, jet(&m, &p, 0.0, &[0.0, 0.0], Matrix::identity(2)), true),
        (&cone, jet(&m, &p, 0.0, &[1.2, -0.9], Matrix::zeros(2, 2)), false),
        (&constant, jet(&m, &p, 3.0, &[0.0, 0.0], Matrix::zeros(2, 2)), true),
    ];
    for (f, j, expected) in cases {
        let r = chart_transfer_check(&m, f, &j, JetKind::Sub, &quick()).unwrap();
        assert!(r.agree);
        assert_eq!(r.manifold.verdict.is_accept(), expected);
        assert!(r.max_residual_gap < 1e-12);
    }
}

#[test]
fn chart_hessian_matches_height_function_hessian() {
    // on the unit sphere the Hessian of x ↦ ⟨a, x⟩ is −⟨a, x⟩ g
    let m = sphere();
    let x = m.point(vec![0.36, 0.48, 0.8]).unwrap();
    let a = [0.3, -1.1, 0.7];
    let f = |p: &Point<f64>| linalg::dot(&a, &p.coords);
    let h = chart_hessian(&m, &f, &x, 1e-4);
    let expected = Matrix::identity(2).scale(-f(&x));
    assert!(h.sub(&expected).max_abs() < 1e-6, "{h:?}");
}

fn transverse(dir: [f64; 2]) -> impl Fn(&[f64]) -> Vec<f64> {
    move |_: &[f64]| dir.to_vec()
}

#[test]
fn correction_vanishes_at_the_base_point() {
    let m = sphere();
    let x = m.point(vec![0.0, 0.6, 0.8]).unwrap();
    let v = transverse([0.4, 1.0]);
    let c = lemma_correction_term(&m, &height, &x, &x, &v).unwrap();
    assert!(c.abs() < 1e-8, "{c}");
}

#[test]
fn correction_vanishes_in_euclidean_space() {
    let m = ManifoldModel::<f64>::euclidean(2).unwrap();
    let x = m.point(vec![0.1, 0.2]).unwrap();
    let y = m.point(vec![1.5, -0.7]).unwrap();
    let phi = |p: &Point<f64>| p.coords[0].sin() * p.coords[1].exp();
    let c = lemma_correction_term(&m, &phi, &x, &y, &transverse([0.7, -0.2])).unwrap();
    assert!(c.abs() < 1e-8, "{c}");
}

#[test]
fn correction_matches_finite_difference_defect_on_sphere() {
    let m = sphere();
    let x = north(&m);
    let mut rng = sample_rng(5, 0);
    let y = m.random_point_at_distance(&x, 0.5, &mut rng);
    let v = transverse([0.3, 1.0]);
    let c = lemma_correction_term(&m, &height, &x, &y, &v).unwrap();
    let defect = lemma_correction_defect(&m, &height, &x, &y, &v, 1e-4).unwrap();
    assert!(c.abs() > 1e-3, "expected a nonzero correction, got {c}");
    assert!((c - defect).abs() < 1e-5, "{c} vs {defect}");
}

#[test]
fn radial_field_has_no_correction() {
    // t ↦ exp_x(w + t w) is a geodesic, so its acceleration vanishes
    let m = sphere();
    let x = north(&m);
    let y = m.point(vec![0.5f64.sin(), 0.0, 0.5f64.cos()]).unwrap();
    let radial = |w: &[f64]| w.to_vec();
    let c = lemma_correction_term(&m, &height, &x, &y, &radial).unwrap();
    assert!(c.abs() < 1e-8, "{c}");
}

#[test]
fn correction_outside_the_chart_is_a_domain_error() {
    let m = sphere();
    let x = north(&m);
    let y = m.point(vec![0.0, 0.0, -1.0]).unwrap();
    assert!(lemma_correction_term(&m, &height, &x, &y, &transverse([1.0, 0.0])).is_err());
}

fn sphere_pair(ell: f64, alpha: f64) -> HessianPair<f64> {
    let m = sphere();
    let x = north(&m);
    let y = m.point(vec![ell.sin(), 0.0, ell.cos()]).unwrap();
    hessian_distance_sq(&m, &x, &y).unwrap().scaled(0.5 * alpha)
}

fn zero_pair(n: usize) -> HessianPair<f64> {
    let m = sphere();
    let x = north(&m);
    HessianPair { x: x.clone(), y: x, form: Matrix::zeros(2 * n, 2 * n) }
}

#[test]
fn star_with_zero_form() {
    let a = zero_pair(2);
    let x = a.x.clone();
    let eps = 0.25;
    let check = |p: Matrix<f64>, q: Matrix<f64>| {
        let sc = StarCondition {
            a_alpha: a.clone(),
            epsilon: eps,
            p: SymBilinear::new(x.clone(), p).unwrap(),
            q: SymBilinear::new(x.clone(), q).unwrap(),
        };
        verify_condition_star(&sc).unwrap().holds
    };
    assert!(check(Matrix::identity(2).scale(-1.0), Matrix::identity(2).scale(2.0)));
    assert!(check(Matrix::identity(2).scale(-4.0), Matrix::identity(2).scale(4.0)));
    assert!(!check(Matrix::identity(2).scale(-4.1), Matrix::zeros(2, 2)));
    assert!(!check(Matrix::diagonal(&[0.1, -1.0]), Matrix::zeros(2, 2)));
    assert!(!check(Matrix::zeros(2, 2), Matrix::diagonal(&[0.0, -0.01])));
}

#[test]
fn star_with_zero_jets_and_nonnegative_form() {
    let hyp = ManifoldModel::hyperbolic(2, 1.0).unwrap();
    let x = hyp.hyperbolic_point(&[0.1, 0.2]).unwrap();
    let y = hyp.hyperbolic_point(&[0.8, -0.3]).unwrap();
    let a = hessian_distance_sq(&hyp, &x, &y).unwrap();
    let eps = canonical_epsilon(&a);
    let b = a.form.add(&a.form.matmul(&a.form).scale(eps));
    assert!(linalg::min_eigenvalue(&b) >= -1e-12);
    let sc = StarCondition::canonical(
        a.clone(),
        SymBilinear::new(a.x.clone(), Matrix::zeros(2, 2)).unwrap(),
        SymBilinear::new(a.y.clone(), Matrix::zeros(2, 2)).unwrap(),
    );
    assert_eq!(sc.epsilon, eps);
    assert!(verify_condition_star(&sc).unwrap().holds);
}

#[test]
fn zero_form_candidates_are_shifted_identities() {
    let a = zero_pair(2);
    let c = generate_star_candidates(&a, 0.5, 10, 1).unwrap();
    assert_eq!(c.pairs.len() + c.skipped, 10);
    assert_eq!(c.skipped, 0);
    for (p, q) in &c.pairs {
        let s = -p.matrix[(0, 0)];
        assert!(s >= 0.0);
        assert!(p.matrix.sub(&Matrix::identity(2).scale(-s)).max_abs() < 1e-15);
        assert!(q.matrix.sub(&Matrix::identity(2).scale(s)).max_abs() < 1e-15);
    }
}

#[test]
fn sphere_candidates_satisfy_star_and_transport_bound() {
    let m = sphere();
    let a = sphere_pair(std::f64::consts::FRAC_PI_2, 1.0);
    let eps = canonical_epsilon(&a);
    let c = generate_star_candidates(&a, eps, 50, 3).unwrap();
    assert_eq!(c.pairs.len() + c.skipped, 50);
    assert!(!c.pairs.is_empty());
    for (p, q) in &c.pairs {
        let sc = StarCondition { a_alpha: a.clone(), epsilon: eps, p: p.clone(), q: q.clone() };
        assert!(verify_condition_star(&sc).unwrap().holds);
        assert!(check_p_leq_lq(&m, &a.x, &a.y, p, q, 0.0).unwrap().holds);
    }
}

#[test]
fn transported_q_is_the_equality_case() {
    let m = sphere();
    let x = north(&m);
    let y = m.point(vec![0.6, 0.0, 0.8]).unwrap();
    let q = SymBilinear::new(y.clone(), Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, -1.0]])).unwrap();
    let p = m.parallel_transport_bilinear(&y, &x, &q).unwrap();
    let r = check_p_leq_lq(&m, &x, &y, &p, &q, 0.0).unwrap();
    assert!(r.holds && r.margin.abs() < 1e-12, "{r:?}");
}

#[test]
fn hyperbolic_candidates_satisfy_curvature_slack() {
    let m = ManifoldModel::hyperbolic(2, 1.0).unwrap();
    let mut rng = sample_rng(11, 0);
    for (k, &alpha) in [1.0, 4.0, 16.0].iter().enumerate() {
        let x = m.random_point(&mut rng);
        let y = m.random_point_at_distance(&x, 0.3 + 0.5 * k as f64, &mut rng);
        let a = hessian_distance_sq(&m, &x, &y).unwrap().scaled(0.5 * alpha);
        let d = m.distance(&x, &y).unwrap();
        let c = generate_star_candidates(&a, canonical_epsilon(&a), 40, k as u64).unwrap();
        for (p, q) in &c.pairs {
            assert!(check_p_leq_lq(&m, &x, &y, p, q, 1.5 * alpha * d * d).unwrap().holds);
        }
    }
}

fn smooth(p: &Point<f64>, a: [f64; 3]) -> f64 {
    (a[0] * p.coords[0] + a[1] * p.coords[1]).sin() + a[2] * p.coords[2] * p.coords[0]
}

#[test]
fn doubling_trace_examples() {
    let m = sphere();
    let grid = build_grid(&m, 2).unwrap();
    let dist = PairDistances::new(&grid);
    let alphas: Vec<f64> = (0..=12).map(|k| 2f64.powi(k)).collect();
    let v = grid.sample(|p| smooth(p, [1.0, 2.0, 0.5]));

    let flat = grid.constant(0.7);
    let same = doubling_diagnostic(&grid, &flat, &flat, &alphas, &dist).unwrap();
    for r in &same.records {
        assert_eq!(r.m_alpha, 0.0);
        assert_eq!((r.x_idx, r.y_idx), (0, 0));
    }
    // for a nonconstant v, m_α > 0 while α/2 is below the slope of v, and
    // the diagonal takes over once α is large
    let same = doubling_diagnostic(&grid, &v, &v, &alphas, &dist).unwrap();
    assert!(same.records.iter().all(|r| r.m_alpha >= 0.0));
    assert!(same.records[0].m_alpha > 0.0);
    let last = same.records.last().unwrap();
    assert_eq!((last.m_alpha, last.x_idx), (0.0, last.y_idx));

    let shifted = GridFunction::new(v.values.iter().map(|x| x + 0.3).collect());
    let t = doubling_diagnostic(&grid, &shifted, &v, &alphas, &dist).unwrap();
    let s = doubling_diagnostic(&grid, &v, &v, &alphas, &dist).unwrap();
    for (r, q) in t.records.iter().zip(&s.records) {
        assert!((r.m_alpha - q.m_alpha - 0.3).abs() < 1e-12);
    }
    assert!((t.records[12].m_alpha - 0.3).abs() < 1e-12);

    let u = grid.sample(|p| smooth(p, [-2.0, 0.5, 1.5]));
    let t = doubling_diagnostic(&grid, &u, &v, &alphas, &dist).unwrap();
    assert!(t.is_monotone());
    assert!(t.records[12].alpha_d_sq < t.records[4].alpha_d_sq || t.records[4].alpha_d_sq == 0.0);
    assert!(t.final_gap().abs() <= t.modulus + 1e-12);
    assert!(t.records[0].m_alpha >= t.diagonal_max);
}

#[test]
fn doubling_rejects_bad_input() {
    let m = sphere();
    let grid = build_grid(&m, 1).unwrap();
    let dist = PairDistances::new(&grid);
    let u = grid.constant(0.0);
    assert!(doubling_diagnostic(&grid, &u, &u, &[2.0, 1.0], &dist).is_err());
    assert!(doubling_diagnostic(&grid, &u, &GridFunction::new(vec![0.0]), &[1.0], &dist).is_err());
}

#[test]
fn jet_limit_examples() {
    let m = sphere();
    let x = m.point(vec![0.0, 0.6, 0.8]).unwrap();
    let a = SymBilinear::new(x.clone(), Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, -2.0]])).unwrap();
    let zeta = m.from_frame(&x, &[0.5, -0.25]);
    let limit = Jet2::new(x.clone(), 1.0, zeta.clone(), a.clone()).unwrap();
    let opts = JetLimitOptions::default();

    let constant = vec![limit.clone(); 10];
    assert!(jet_limit_check(&m, &constant, &limit, &opts).unwrap().converged);

    let dir = m.from_frame(&x, &[0.6, 0.8]);
    let seq: Vec<Jet2<f64>> = (1..=20)
        .map(|n| {
            let xn = m.exp(&x, &dir.scale(1.0 / n as f64)).unwrap();
            let zn = m.parallel_transport_vec(&x, &xn, &zeta).unwrap();
            let an = m.parallel_transport_bilinear(&x, &xn, &a).unwrap();
            Jet2::new(xn, 1.0 + 0.1 / n as f64, zn, an).unwrap()
        })
        .collect();
    assert!(jet_limit_check(&m, &seq, &limit, &opts).unwrap().converged);

    let osc: Vec<Jet2<f64>> = (1..=20)
        .map(|n| {
            let xn = m.exp(&x, &dir.scale(1.0 / (n * n) as f64)).unwrap();
            let bump = if n % 2 == 0 { 1.0 } else { -1.0 };
            let an = a.matrix.add(&Matrix::diagonal(&[bump, 0.0]));
            let an = m.parallel_transport_bilinear(&x, &xn, &SymBilinear::new(x.clone(), an).unwrap()).unwrap();
            Jet2::new(xn.clone(), 1.0, m.parallel_transport_vec(&x, &xn, &zeta).unwrap(), an).unwrap()
        })
        .collect();
    assert!(!jet_limit_check(&m, &osc, &limit, &opts).unwrap().converged);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn subjets_are_convex(z1 in prop::array::uniform2(-0.5f64..0.5), z2 in prop::array::uniform2(-0.5f64..0.5),
                          d1 in 0.05f64..2.0, d2 in 0.05f64..2.0) {
        let m = sphere();
        let p = north(&m);
        let f = |x: &Point<f64>| m.dist_raw(&x.coords, &p.coords);
        let j1 = jet(&m, &p, 0.0, &z1, Matrix::diagonal(&[d1, -d2]));
        let j2 = jet(&m, &p, 0.0, &z2, Matrix::diagonal(&[-d1, d2]));
        let opts = JetTestOptions { directions: 30, seed: 2, ..Default::default() };
        let a1 = quadratic_jet_test(&m, &f, &j1, JetKind::Sub, &opts).unwrap().verdict.is_accept();
        let a2 = quadratic_jet_test(&m, &f, &j2, JetKind::Sub, &opts).unwrap().verdict.is_accept();
        prop_assume!(a1 && a2);
        let mid = jet(&m, &p, 0.0, &linalg::scaled(&linalg::add(&z1, &z2), 0.5),
                      j1.a.matrix.add(&j2.a.matrix).scale(0.5));
        prop_assert!(quadratic_jet_test(&m, &f, &mid, JetKind::Sub, &opts).unwrap().verdict.is_accept());
    }

    #[test]
    fn smooth_shift_preserves_verdict(c in prop::array::uniform3(-1.0f64..1.0), delta in -0.3f64..0.3,
                                      kind in prop::bool::ANY) {
        let m = sphere();
        let x = m.point(vec![0.6, 0.0, 0.8]).unwrap();
        let psi = move |p: &Point<f64>| linalg::dot(&c, &p.coords) + p.coords[0] * p.coords[1];
        let fminus = |p: &Point<f64>| height(p) - psi(p);
        let g = chart_gradient(&m, &height, &x);
        let h = chart_hessian(&m, &height, &x, 1e-4).shift(delta);
        let gpsi = chart_gradient(&m, &psi, &x);
        let hpsi = chart_hessian(&m, &psi, &x, 1e-4);
        let kind = if kind { JetKind::Sub } else { JetKind::Super };
        let opts = JetTestOptions { directions: 30, seed: 4, ..Default::default() };
        let j = jet(&m, &x, height(&x), &g, h.clone());
        let js = jet(&m, &x, fminus(&x), &linalg::sub(&g, &gpsi), h.sub(&hpsi));
        let v1 = quadratic_jet_test(&m, &height, &j, kind, &opts).unwrap().verdict.is_accept();
        let v2 = quadratic_jet_test(&m, &fminus, &js, kind, &opts).unwrap().verdict.is_accept();
        prop_assert_eq!(v1, v2);
    }
}

#[test]
fn star_sweep_passes_on_sphere_and_hyperbolic() {
    for m in [sphere(), ManifoldModel::hyperbolic(2, 1.0).unwrap()] {
        let r = star_consequence_sweep(&m, 300, 5).unwrap();
        assert!(r.pass(), "{} failures={} skipped={}", r.model, r.failures, r.skipped);
        assert!(r.min_lq_margin >= -1e-9);
    }
}
