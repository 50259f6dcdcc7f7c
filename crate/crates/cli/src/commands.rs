//! Subcommand implementations. Each returns an [`Outcome`] and performs no
//! I/O; `main` writes the files.

use anyhow::{anyhow, bail, Context};
use geovisc::jacobi::{check_curvature_bound, check_sign_condition, SignCheckOptions, SignSample};
use geovisc::jets::{doubling_diagnostic, star_consequence_sweep};
use geovisc::manifold::ModelSpec;
use geovisc::operators::{self as ops, OperatorConfig, OperatorSpec, ScalarField};
use geovisc::solver::{
    ball_boundary_mask, build_grid, perron_iterate, solve_dirichlet, solve_fixed_point, verify_viscosity_residual,
    with_value_term, yamabe_solve, Grid, GridFunction, PairDistances, SolveReport,
};
use geovisc::{ManifoldModel, Point};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{JobConfig, YamabeConfig};
use crate::output::{num, Outcome, Table};

type Model = ManifoldModel<f64>;

fn model_or(cfg: &JobConfig, default: ModelSpec) -> anyhow::Result<(ModelSpec, Model)> {
    let spec = cfg.model.clone().unwrap_or(default);
    let m = spec.build::<f64>().context("invalid model")?;
    Ok((spec, m))
}

fn sphere2() -> ModelSpec {
    ModelSpec::Sphere { dim: 2, radius: 1.0 }
}

/// Models covered by `geometry-check` when the config names none.
pub fn default_geometry_models() -> Vec<ModelSpec> {
    let torus = |p: Vec<f64>| ModelSpec::Torus { periods: Some(p), dim: None, period: None };
    vec![
        ModelSpec::Euclidean { dim: 3 },
        sphere2(),
        ModelSpec::Sphere { dim: 3, radius: 2.0 },
        ModelSpec::Hyperbolic { dim: 2, k0: Some(1.0), curvature: None },
        ModelSpec::Hyperbolic { dim: 3, k0: Some(0.5), curvature: None },
        torus(vec![1.0, 2.0]),
        ModelSpec::Product { factors: vec![sphere2(), torus(vec![1.0])] },
        ModelSpec::Product {
            factors: vec![sphere2(), ModelSpec::Hyperbolic { dim: 2, k0: Some(1.0), curvature: None }],
        },
    ]
}

#[derive(Serialize)]
struct GeometryRow {
    model: String,
    suite: String,
    samples: usize,
    max_violation: f64,
    tolerance: f64,
    pass: bool,
}

/// Transport isometry, exp/log round trips, distance symmetry and
/// sectional curvature on one or several models.
pub fn geometry_check(cfg: &JobConfig) -> anyhow::Result<Outcome> {
    let specs = match &cfg.model {
        Some(s) => vec![s.clone()],
        None => default_geometry_models(),
    };
    let samples = cfg.samples.unwrap_or(1000);
    let mut out = Outcome::new("geometry-check");
    let mut rows = Vec::new();
    for spec in &specs {
        let m: Model = spec.build().context("invalid model")?;
        for s in m.geometry_suites(samples, cfg.tolerances.geometry, cfg.seed())? {
            out.push(
                format!("{}/{}", m.name(), s.suite),
                s.report.pass,
                json!({ "max_violation": s.report.max_violation, "tolerance": s.report.tolerance }),
            );
            rows.push(GeometryRow {
                model: m.name(),
                suite: s.suite,
                samples: s.report.samples,
                max_violation: s.report.max_violation,
                tolerance: s.report.tolerance,
                pass: s.report.pass,
            });
        }
    }
    out.tables.push(Table::from_records("geometry.csv", &rows)?);
    Ok(out)
}

#[derive(Serialize)]
struct SignRow {
    index: usize,
    ell: f64,
    value: f64,
    v_norm_sq: f64,
    closed_form: Option<f64>,
    bound: Option<f64>,
}

/// Sign of `d²φ(v, L_xy v)²` by curvature sign, the closed form on
/// constant-curvature models, and the `2K₀ℓ²‖v‖²` bound when the curvature
/// is bounded below by a negative constant.
pub fn hessian_sign(cfg: &JobConfig) -> anyhow::Result<Outcome> {
    let (_, m) = model_or(cfg, sphere2())?;
    let opts = SignCheckOptions {
        samples: cfg.samples.unwrap_or(10_000),
        ell_range: cfg.ell_range,
        normal_only: cfg.normal_only.unwrap_or(true),
        tolerance: cfg.tolerances.sign,
        seed: cfg.seed(),
    };
    let (klo, khi) = m.curvature_bounds();
    let k0 = cfg.k0.unwrap_or((-klo).max(0.0));
    let mut out = Outcome::new("hessian-sign");
    let mut records: Option<Vec<SignSample>> = None;
    if klo >= 0.0 || khi <= 0.0 {
        let r = check_sign_condition(&m, &opts)?;
        out.push(
            "sign",
            r.summary.pass,
            json!({
                "expected_sign": r.expected_sign, "min_value": r.min_value, "max_value": r.max_value,
                "max_violation": r.summary.max_violation, "tolerance": r.summary.tolerance,
            }),
        );
        if let Some(e) = r.max_closed_form_error {
            out.push(
                "closed_form",
                e <= cfg.tolerances.closed_form,
                json!({ "max_relative_error": e, "tolerance": cfg.tolerances.closed_form }),
            );
        }
        records = Some(r.records);
    }
    if klo < 0.0 || cfg.k0.is_some() {
        let r = check_curvature_bound(&m, k0, &opts)?;
        out.push(
            "curvature_bound",
            r.summary.pass,
            json!({ "k0": k0, "max_violation": r.summary.max_violation, "tolerance": r.summary.tolerance }),
        );
        // both checks draw the same samples from the same seed
        records = Some(match records {
            Some(mut prev) => {
                for (p, b) in prev.iter_mut().zip(r.records) {
                    p.bound = b.bound;
                }
                prev
            }
            None => r.records,
        });
    }
    let rows: Vec<SignRow> = records
        .unwrap_or_default()
        .into_iter()
        .enumerate()
        .map(|(index, s)| SignRow {
            index,
            ell: s.ell,
            value: s.value,
            v_norm_sq: s.v_norm_sq,
            closed_form: s.closed_form,
            bound: s.bound,
        })
        .collect();
    out.set("model", m.name())?;
    out.tables.push(Table::from_records("hessian_sign.csv", &rows)?);
    Ok(out)
}

#[derive(Serialize)]
struct StarRow {
    model: String,
    index: usize,
    alpha: f64,
    ell: f64,
    star_margin: f64,
    lq_margin: f64,
    pass: bool,
}

/// Doubling-of-variables trace on a grid, plus sampled (*) candidates and
/// their transport consequence.
pub fn comparison_demo(cfg: &JobConfig) -> anyhow::Result<Outcome> {
    let (_, m) = model_or(cfg, sphere2())?;
    let grid = build_grid(&m, cfg.resolution.unwrap_or(3))?;
    let alphas = cfg.alphas.clone().unwrap_or_else(|| (0..=12).map(|k| 2f64.powi(k)).collect());
    let uf = cfg.u.unwrap_or(ScalarField::Coord(0));
    let vf = cfg.v.unwrap_or(ScalarField::Affine { c: 0.0, i: 1, a: 0.5 });
    let u = grid.sample(|p| uf.eval(&p.coords));
    let v = grid.sample(|p| vf.eval(&p.coords));
    let dist = PairDistances::new(&grid);
    let h = grid.spacing();
    let mut out = Outcome::new("comparison-demo");

    let trace = doubling_diagnostic(&grid, &u, &v, &alphas, &dist)?;
    let last = *trace.records.last().ok_or_else(|| anyhow!("empty schedule"))?;
    let floor = 2.0 * dist.modulus(&v, h);
    out.push("doubling_monotone", trace.is_monotone(), json!({}));
    out.push(
        "doubling_final_gap",
        trace.final_gap().abs() <= trace.modulus,
        json!({ "gap": trace.final_gap(), "modulus": trace.modulus, "diagonal_max": trace.diagonal_max }),
    );
    out.push(
        "doubling_penalty",
        last.alpha_d_sq <= 10.0 * floor,
        json!({ "alpha": last.alpha, "alpha_d_sq": last.alpha_d_sq, "floor": floor }),
    );
    let same = doubling_diagnostic(&grid, &v, &v, &alphas, &dist)?;
    let same_last = same.records.last().map_or(f64::NAN, |r| r.m_alpha);
    out.push(
        "doubling_u_equals_v",
        same.records.iter().all(|r| r.m_alpha >= 0.0) && same_last == 0.0,
        json!({ "m_first": same.records[0].m_alpha, "m_final": same_last }),
    );
    out.tables.push(Table::from_records("doubling.csv", &trace.records)?);

    let star_specs = cfg.star_models.clone().unwrap_or_else(|| {
        vec![sphere2(), ModelSpec::Hyperbolic { dim: 2, k0: Some(1.0), curvature: None }]
    });
    let mut rows = Vec::new();
    for spec in &star_specs {
        let sm: Model = spec.build().context("invalid model")?;
        let r = star_consequence_sweep(&sm, cfg.samples.unwrap_or(10_000), cfg.seed())?;
        let pass = r.pass() && r.min_lq_margin >= -cfg.tolerances.star;
        out.push(
            format!("star/{}", r.model),
            pass,
            json!({
                "k0": r.k0, "requested": r.requested, "generated": r.records.len(), "skipped": r.skipped,
                "failures": r.failures, "min_lq_margin": r.min_lq_margin,
            }),
        );
        rows.extend(r.records.iter().map(|s| StarRow {
            model: r.model.clone(),
            index: s.index,
            alpha: s.alpha,
            ell: s.ell,
            star_margin: s.star_margin,
            lq_margin: s.lq_margin,
            pass: s.pass,
        }));
    }
    out.set("grid", json!({ "model": m.name(), "nodes": grid.len(), "spacing": h }))?;
    out.tables.push(Table::from_records("star.csv", &rows)?);
    Ok(out)
}

/// `SolveReport` without the timing and the per-iteration history, which
/// go to the terminal and to `residuals.csv`.
fn report_json(r: &SolveReport) -> Value {
    json!({
        "iterations": r.iterations,
        "final_residual": r.final_residual,
        "converged": r.converged,
        "theta": r.theta,
    })
}

fn constant_starts(cfg: &JobConfig, default: &[f64]) -> Vec<f64> {
    cfg.initial.clone().filter(|v| !v.is_empty()).unwrap_or_else(|| default.to_vec())
}

fn solution_table(file: &str, grid: &Grid<f64>, columns: &[(String, &GridFunction<f64>)]) -> anyhow::Result<Table> {
    let ambient = grid.nodes.first().map_or(0, |p| p.coords.len());
    let mut header = vec!["node".to_string()];
    header.extend((0..ambient).map(|i| format!("x{i}")));
    header.extend(columns.iter().map(|(n, _)| n.clone()));
    let rows: Vec<Vec<Option<String>>> = (0..grid.len())
        .map(|i| {
            let mut r = vec![Some(i.to_string())];
            r.extend(grid.nodes[i].coords.iter().map(|&c| num(c)));
            r.extend(columns.iter().map(|(_, f)| num(f.values[i])));
            r
        })
        .collect();
    Table::from_rows(file, &header, &rows)
}

#[derive(Serialize)]
struct ResidualRow {
    run: String,
    iteration: usize,
    residual: f64,
}

fn residual_rows(run: &str, r: &SolveReport) -> Vec<ResidualRow> {
    r.residual_history
        .iter()
        .enumerate()
        .map(|(iteration, &residual)| ResidualRow { run: run.into(), iteration, residual })
        .collect()
}

#[derive(Serialize)]
struct RefinementRow {
    resolution: usize,
    nodes: usize,
    spacing: f64,
    sup_error: f64,
    iterations: usize,
    converged: bool,
}

fn default_problem() -> OperatorConfig {
    OperatorConfig::Sum {
        terms: vec![OperatorConfig::NegTrace, OperatorConfig::Source { f: ScalarField::Const(2.0) }],
    }
}

/// `u + G(x, du, d²u) = 0` on a grid, with optional refinement table,
/// Dirichlet problem and Perron sweeps. The default problem is
/// `u − Δu = 2` on the unit sphere, whose solution is `u ≡ 2`.
pub fn solve(cfg: &JobConfig) -> anyhow::Result<Outcome> {
    let (_, m) = model_or(cfg, sphere2())?;
    let (g_cfg, exact) = match &cfg.operator {
        Some(op) => (op.clone(), cfg.exact),
        None => (default_problem(), cfg.exact.or(Some(ScalarField::Const(2.0)))),
    };
    let g: OperatorSpec<f64> = g_cfg.build().context("invalid operator")?;
    let f = with_value_term(&g)?;
    let opts = cfg.solver.options();
    let tol = opts.tol;
    let grid = build_grid(&m, cfg.resolution.unwrap_or(3))?;
    let mut out = Outcome::new("solve");
    let mut runs = Vec::new();
    let mut residuals = Vec::new();
    let mut solutions = Vec::new();
    for (k, &c) in constant_starts(cfg, &[0.0]).iter().enumerate() {
        let (u, r) = solve_fixed_point(&g, &grid, &grid.constant(c), &opts)?;
        eprintln!("solve: start {c}: {} iterations in {:.2}s", r.iterations, r.wall_time);
        out.push(format!("converged/start={c}"), r.converged, report_json(&r));
        residuals.extend(residual_rows(&format!("start={c}"), &r));
        runs.push(json!({ "start": c, "report": report_json(&r) }));
        solutions.push((format!("u{k}"), u));
    }
    let base = &solutions[0].1;
    if solutions.len() > 1 {
        let spread = solutions.iter().map(|(_, u)| u.sup_distance(base)).fold(0.0, f64::max);
        out.push("initialization_independence", spread <= 2.0 * tol, json!({ "spread": spread, "bound": 2.0 * tol }));
    }
    let mut columns: Vec<(String, &GridFunction<f64>)> = solutions.iter().map(|(n, u)| (n.clone(), u)).collect();
    let exact_values = exact.map(|e| grid.sample(|p| e.eval(&p.coords)));
    if let Some(ev) = &exact_values {
        let err = base.sup_distance(ev);
        out.push(
            "exact_error",
            err <= cfg.tolerances.solution,
            json!({ "sup_error": err, "tolerance": cfg.tolerances.solution }),
        );
        columns.push(("exact".into(), ev));
    }
    let res = verify_viscosity_residual(&f, &grid, base, cfg.tolerances.residual_c)?;
    out.push("viscosity_residual", res.pass, serde_json::to_value(&res)?);
    out.tables.push(solution_table("solution.csv", &grid, &columns)?);

    if let Some(resolutions) = &cfg.resolutions {
        let e = exact.ok_or_else(|| anyhow!("`resolutions` needs an `exact` solution"))?;
        let mut rows = Vec::new();
        for &res in resolutions {
            let gr = build_grid(&m, res)?;
            let (u, r) = solve_fixed_point(&g, &gr, &gr.constant(0.0), &opts)?;
            eprintln!("solve: resolution {res}: {} iterations in {:.2}s", r.iterations, r.wall_time);
            rows.push(RefinementRow {
                resolution: res,
                nodes: gr.len(),
                spacing: gr.spacing(),
                sup_error: u.sup_distance(&gr.sample(|p| e.eval(&p.coords))),
                iterations: r.iterations,
                converged: r.converged,
            });
        }
        let decreasing = rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
        let errors: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
        out.push("refinement_decreasing", decreasing && rows.iter().all(|r| r.converged), json!({ "errors": errors }));
        out.tables.push(Table::from_records("refinement.csv", &rows)?);
    }

    if let Some(d) = &cfg.dirichlet {
        let center = Point::new(d.center.clone());
        m.point(d.center.clone()).context("dirichlet center is not on the model")?;
        let mask = ball_boundary_mask(&grid, &center, d.radius);
        let data = grid.sample(|p| d.data.eval(&p.coords));
        let (u, r) = solve_dirichlet(&f, &grid, &mask, &data, &opts)?;
        let pinned = mask.iter().zip(u.values.iter().zip(&data.values)).all(|(&b, (a, c))| !b || a == c);
        let interior = mask.iter().filter(|&&b| !b).count();
        out.push("dirichlet_converged", r.converged, report_json(&r));
        out.push("dirichlet_boundary_pinned", pinned, json!({ "interior_nodes": interior }));
        if let Some(ev) = &exact_values {
            let err = u.sup_distance(ev);
            out.push(
                "dirichlet_exact_error",
                err <= cfg.tolerances.solution,
                json!({ "sup_error": err, "tolerance": cfg.tolerances.solution }),
            );
        }
        residuals.extend(residual_rows("dirichlet", &r));
        out.tables.push(solution_table("dirichlet.csv", &grid, &[("u".into(), &u), ("data".into(), &data)])?);
    }

    if let Some(p) = &cfg.perron {
        let pr = perron_iterate(&f, &grid, &grid.constant(p.sub), &grid.constant(p.sup), &opts)?;
        let gap = pr.solution.sup_distance(base);
        out.push("perron_converged", pr.report.converged, report_json(&pr.report));
        out.push(
            "perron_monotone",
            pr.ordered && pr.min_increment >= 0.0,
            json!({ "ordered": pr.ordered, "min_increment": pr.min_increment }),
        );
        out.push("perron_matches_fixed_point", gap <= 2.0 * tol, json!({ "gap": gap, "bound": 2.0 * tol }));
        residuals.extend(residual_rows("perron", &pr.report));
    }

    out.tables.push(Table::from_records("residuals.csv", &residuals)?);
    out.set("operator", f.name.clone())?;
    out.set("grid", json!({ "model": m.name(), "nodes": grid.len(), "spacing": grid.spacing() }))?;
    out.set("runs", runs)?;
    Ok(out)
}

/// `S u − S′u^{(n+2)/(n−2)} − 4(n−1)/(n−2) Δu = 0` on `Sphere(2, r)` from
/// several nonnegative constant starts.
pub fn yamabe(cfg: &JobConfig) -> anyhow::Result<Outcome> {
    let (_, m) = model_or(cfg, sphere2())?;
    let y: YamabeConfig = cfg.yamabe.clone().unwrap_or_default();
    let grid = build_grid(&m, cfg.resolution.unwrap_or(3))?;
    let opts = cfg.solver.options();
    let mut out = Outcome::new("yamabe");
    let mut residuals = Vec::new();
    let mut solutions = Vec::new();
    for (k, &c) in constant_starts(cfg, &[0.5, 2.0]).iter().enumerate() {
        let (u, r) = yamabe_solve(&grid, y.n, y.s, y.s_prime, &grid.constant(c), &opts)?;
        eprintln!("yamabe: start {c}: {} iterations in {:.2}s", r.iterations, r.wall_time);
        out.push(format!("converged/start={c}"), r.converged, report_json(&r));
        residuals.extend(residual_rows(&format!("start={c}"), &r));
        solutions.push((format!("u{k}"), u));
    }
    if y.s.constant_value().is_some_and(|s| s > 0.0) && y.s_prime <= 0.0 {
        let worst = solutions.iter().map(|(_, u)| u.max().abs().max(u.min().abs())).fold(0.0, f64::max);
        out.push(
            "zero_solution",
            worst <= cfg.tolerances.solution,
            json!({ "sup_norm": worst, "tolerance": cfg.tolerances.solution }),
        );
    }
    if solutions.len() > 1 {
        let base = &solutions[0].1;
        let spread = solutions.iter().map(|(_, u)| u.sup_distance(base)).fold(0.0, f64::max);
        out.push(
            "initialization_independence",
            spread <= 2.0 * opts.tol,
            json!({ "spread": spread, "bound": 2.0 * opts.tol }),
        );
    }
    let columns: Vec<(String, &GridFunction<f64>)> = solutions.iter().map(|(n, u)| (n.clone(), u)).collect();
    out.tables.push(solution_table("yamabe.csv", &grid, &columns)?);
    out.tables.push(Table::from_records("residuals.csv", &residuals)?);
    out.set("yamabe", &y)?;
    Ok(out)
}

/// Every operator builder the library ships, with representative
/// coefficient fields.
pub fn shipped_operators() -> anyhow::Result<Vec<OperatorSpec<f64>>> {
    use ScalarField::*;
    Ok(vec![
        ops::neg_trace(),
        ops::neg_detplus(),
        ops::neg_min_eigenvalue(),
        ops::neg_max_eigenvalue(),
        ops::scalar_term(Const(2.0)),
        ops::value(),
        ops::source(Coord(2)),
        ops::weighted_neg_trace(Affine { c: 2.0, i: 0, a: 1.0 }),
        ops::example_5_3(Const(1.0), Const(0.5)),
        ops::yamabe(3, Const(6.0), -1.0)?,
        ops::sum(vec![ops::neg_trace(), ops::value()])?,
        ops::max(vec![ops::neg_min_eigenvalue(), ops::neg_trace()])?,
        ops::min(vec![ops::neg_max_eigenvalue(), ops::neg_trace()])?,
        ops::scaled(2.0, ops::neg_trace())?,
    ])
}

#[derive(Serialize)]
struct OperatorRow {
    operator: String,
    check: String,
    model: String,
    samples: usize,
    value: f64,
    tolerance: f64,
    pass: bool,
}

/// Ellipticity of the shipped builders, parallel-transport invariance of
/// `−trace` and `−det₊`, and the monotonicity constant of the Yamabe
/// operator.
pub fn operator_checks(cfg: &JobConfig) -> anyhow::Result<Outcome> {
    let samples = cfg.samples.unwrap_or(10_000);
    let seed = cfg.seed();
    let sphere: Model = sphere2().build()?;
    let mut out = Outcome::new("operators");
    let mut rows = Vec::new();
    let mut record = |out: &mut Outcome, row: OperatorRow, detail: Value| {
        out.push(format!("{}/{}/{}", row.check, row.operator, row.model), row.pass, detail);
        rows.push(row);
    };
    for op in shipped_operators()? {
        let r = ops::ellipticity_check(&op, &sphere, samples, seed)?;
        let detail = json!({ "max_violation": r.summary.max_violation, "witness": r.witness });
        record(
            &mut out,
            OperatorRow {
                operator: op.name.clone(),
                check: "ellipticity".into(),
                model: sphere.name(),
                samples,
                value: r.summary.max_violation,
                tolerance: r.summary.tolerance,
                pass: r.summary.pass,
            },
            detail,
        );
    }
    let models: Vec<Model> = vec![
        sphere.clone(),
        ManifoldModel::hyperbolic(2, 1.0)?,
        ManifoldModel::flat_torus(vec![1.0, 2.0])?,
    ];
    for op in [ops::neg_trace(), ops::neg_detplus()] {
        for m in &models {
            let r = ops::invariance_check(&op, m, samples, cfg.tolerances.invariance, seed)?;
            record(
                &mut out,
                OperatorRow {
                    operator: op.name.clone(),
                    check: "invariance".into(),
                    model: m.name(),
                    samples,
                    value: r.max_violation,
                    tolerance: r.tolerance,
                    pass: r.pass,
                },
                json!({ "max_violation": r.max_violation }),
            );
        }
    }
    let y = YamabeConfig::default();
    let op = ops::yamabe(y.n, y.s, y.s_prime)?;
    let gamma = ops::monotonicity_estimate(&op, &sphere, (0.0, 2.0), samples, seed)?;
    // coordinates on the unit sphere lie in [−1, 1]
    let min_s = y.s.lower_bound(1.0);
    // the difference quotients are exact up to rounding
    let pass = gamma >= min_s * (1.0 - 1e-12);
    record(
        &mut out,
        OperatorRow {
            operator: op.name.clone(),
            check: "monotonicity".into(),
            model: sphere.name(),
            samples,
            value: gamma,
            tolerance: min_s,
            pass,
        },
        json!({ "gamma_hat": gamma, "min_S": min_s }),
    );
    out.tables.push(Table::from_records("operators.csv", &rows)?);
    Ok(out)
}

/// Configurations run by `report`, keyed by output subdirectory.
pub fn report_jobs(base: &JobConfig) -> anyhow::Result<Vec<(&'static str, &'static str, JobConfig)>> {
    let with = |v: Value| -> anyhow::Result<JobConfig> {
        let mut cfg: JobConfig = serde_json::from_value(v)?;
        cfg.seed = base.seed;
        if cfg.samples.is_none() {
            cfg.samples = base.samples;
        }
        cfg.validate()?;
        Ok(cfg)
    };
    Ok(vec![
        ("geometry", "geometry-check", with(json!({}))?),
        ("hessian-sphere", "hessian-sign", with(json!({ "model": {"model": "sphere", "dim": 2}, "ell_range": [0.05, 0.9 * std::f64::consts::PI] }))?),
        ("hessian-hyperbolic", "hessian-sign", with(json!({ "model": {"model": "hyperbolic", "dim": 2, "k0": 1.0}, "ell_range": [0.05, 3.0] }))?),
        ("hessian-euclidean", "hessian-sign", with(json!({ "model": {"model": "euclidean", "dim": 2} }))?),
        ("comparison", "comparison-demo", with(json!({ "resolution": 3 }))?),
        ("solve-constant", "solve", with(json!({
            "resolution": 3, "initial": [-10.0, 10.0],
            "perron": {"sub": 0.0, "sup": 10.0},
            "dirichlet": {"center": [0.0, 0.0, 1.0], "radius": 1.2, "data": 2.0},
        }))?),
        ("solve-oracle", "solve", with(json!({
            "operator": {"op": "sum", "terms": [{"op": "neg_trace"}, {"op": "source", "f": "coord:2"}]},
            "exact": "affine:0:2:0.3333333333333333",
            "resolution": 4, "resolutions": [3, 4, 5],
            "tolerances": {"solution": 0.05},
        }))?),
        ("yamabe", "yamabe", with(json!({ "resolution": 3 }))?),
        ("operators", "operators", with(json!({}))?),
    ])
}

pub fn run(command: &str, cfg: &JobConfig) -> anyhow::Result<Outcome> {
    match command {
        "geometry-check" => geometry_check(cfg),
        "hessian-sign" => hessian_sign(cfg),
        "comparison-demo" => comparison_demo(cfg),
        "solve" => solve(cfg),
        "yamabe" => yamabe(cfg),
        "operators" => operator_checks(cfg),
        other => bail!("unknown command `{other}`"),
    }
}
