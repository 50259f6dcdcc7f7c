use std::path::Path;
use std::process::{Command, Output};

fn geovisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geovisc")).args(args).output().expect("binary runs")
}

fn run_with(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("job.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    geovisc(&args)
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(file)).unwrap()
}

fn report(dir: &Path, file: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, file)).unwrap()
}

#[test]
fn geometry_check_passes_on_sphere_and_torus() {
    for model in [r#"{"model": "sphere", "dim": 2}"#, r#"{"model": "torus", "periods": [1.0, 2.0]}"#] {
        let dir = tempfile::tempdir().unwrap();
        let o = run_with(dir.path(), "geometry-check", &format!(r#"{{"model": {model}, "samples": 200}}"#), &[]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = read(dir.path(), "geometry.csv");
        assert!(csv.starts_with("model,suite,samples,max_violation,tolerance,pass\n"));
        assert_eq!(csv.lines().count(), 5);
        let r = report(dir.path(), "geometry-check.json");
        assert_eq!(r["pass"], true);
        assert_eq!(r["config"]["samples"], 200);
    }
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["{not json", r#"{"model": {"model": "klein_bottle"}}"#, r#"{"sampels": 3}"#, r#"{"samples": 0}"#] {
        let o = run_with(dir.path(), "geometry-check", bad, &[]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    let o = run_with(dir.path(), "solve", r#"{"command": "yamabe"}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(geovisc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(geovisc(&["solve", "--seed", "abc"]).status.code(), Some(2));
    assert_eq!(geovisc(&["solve", "--config", "/nonexistent/job.json"]).status.code(), Some(2));
}

#[test]
fn unsupported_grid_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "solve", r#"{"model": {"model": "hyperbolic", "dim": 2}}"#, &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn hessian_sign_on_three_curvature_regimes() {
    let cases = [
        (r#"{"model": "sphere", "dim": 2}"#, vec!["sign", "closed_form"]),
        (r#"{"model": "hyperbolic", "dim": 2, "k0": 1.0}"#, vec!["sign", "closed_form", "curvature_bound"]),
        (r#"{"model": "euclidean", "dim": 2}"#, vec!["sign", "closed_form"]),
    ];
    for (model, suites) in cases {
        let dir = tempfile::tempdir().unwrap();
        let o = run_with(dir.path(), "hessian-sign", &format!(r#"{{"model": {model}, "samples": 500}}"#), &[]);
        assert_eq!(o.status.code(), Some(0), "{model}");
        let r = report(dir.path(), "hessian-sign.json");
        let names: Vec<&str> = r["suites"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
        assert_eq!(names, suites);
        let csv = read(dir.path(), "hessian_sign.csv");
        assert!(csv.starts_with("index,ell,value,v_norm_sq,closed_form,bound\n"));
        assert_eq!(csv.lines().count(), 501);
    }
}

#[test]
fn outputs_are_deterministic_for_a_fixed_seed() {
    let cfg = r#"{"model": {"model": "hyperbolic", "dim": 2}, "samples": 300}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    run_with(a.path(), "hessian-sign", cfg, &["--seed", "9"]);
    run_with(b.path(), "hessian-sign", cfg, &["--seed", "9", "--threads", "2"]);
    run_with(c.path(), "hessian-sign", cfg, &["--seed", "10"]);
    for f in ["hessian_sign.csv", "hessian-sign.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f));
    }
    assert_ne!(read(a.path(), "hessian_sign.csv"), read(c.path(), "hessian_sign.csv"));
    assert_eq!(report(a.path(), "hessian-sign.json")["seed"], 9);
}

#[test]
fn comparison_demo_writes_trace_and_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "comparison-demo", r#"{"resolution": 2, "samples": 200}"#, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let trace = read(dir.path(), "doubling.csv");
    assert!(trace.starts_with("alpha,m_alpha,d,alpha_d_sq,x_idx,y_idx\n"));
    assert_eq!(trace.lines().count(), 14);
    let star = read(dir.path(), "star.csv");
    assert!(star.starts_with("model,index,alpha,ell,star_margin,lq_margin,pass\n"));
    assert!(star.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn solve_constant_problem_with_perron_and_dirichlet() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "resolution": 2,
        "initial": [-10.0, 10.0],
        "perron": {"sub": 0.0, "sup": 10.0},
        "dirichlet": {"center": [0.0, 0.0, 1.0], "radius": 1.2, "data": "const:2"},
        "outputs": {"csv": "u.csv"}
    }"#;
    let o = run_with(dir.path(), "solve", cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = read(dir.path(), "u.csv");
    assert!(csv.starts_with("node,x0,x1,x2,u0,u1,exact\n"));
    for line in csv.lines().skip(1) {
        let v: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }
    assert!(read(dir.path(), "residuals.csv").starts_with("run,iteration,residual\n"));
    let r = report(dir.path(), "solve.json");
    assert_eq!(r["pass"], true);
    assert!(r["suites"].as_array().unwrap().iter().any(|s| s["name"] == "perron_monotone"));
}

#[test]
fn solve_fails_when_the_claimed_solution_is_wrong() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "solve", r#"{"resolution": 2, "exact": "const:3"}"#, &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn yamabe_converges_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "yamabe", r#"{"resolution": 2, "initial": [0.0, 3.0]}"#, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(read(dir.path(), "yamabe.csv").starts_with("node,x0,x1,x2,u0,u1\n"));
    let o = run_with(dir.path(), "yamabe", r#"{"yamabe": {"n": 3, "S": "const:-1", "S_prime": -1.0}}"#, &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn report_runs_every_section() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "report", r#"{"samples": 100}"#, &[]);
    let r = report(dir.path(), "report.json");
    let failed: Vec<&str> = r["failed"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    // −det₊ carries the degenerate-elliptic flag but violates it, so the
    // report cannot pass
    assert!(failed.iter().all(|f| f.starts_with("operators/ellipticity/")), "{failed:?}");
    assert!(failed.iter().any(|f| f.contains("neg_detplus")));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(r["sections"].as_array().unwrap().len(), 9);
    assert!(dir.path().join("out/solve-oracle/refinement.csv").exists());
    assert!(read(dir.path(), "report.csv").starts_with("section,suite,pass\n"));
}

#[test]
fn shipped_configs_run_and_pass() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut names: Vec<_> = std::fs::read_dir(&configs).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    assert!(!names.is_empty());
    for path in names {
        let cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let command = cfg["command"].as_str().unwrap();
        let out = tempfile::tempdir().unwrap();
        let o = geovisc(&[command, "--config", path.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", path.display());
    }
}
