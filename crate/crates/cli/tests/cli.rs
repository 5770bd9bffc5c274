use std::path::{Path, PathBuf};
use std::process::Command;

use alphagrad::stats::normal_cdf;
use alphagrad_cli::ResultTable;
use tempfile::TempDir;

struct Run {
    code: i32,
    stderr: String,
    dir: PathBuf,
}

impl Run {
    fn table(&self, command: &str) -> ResultTable {
        let bytes = std::fs::read(self.dir.join(format!("{command}.csv"))).unwrap();
        ResultTable::from_csv(command, &bytes).unwrap()
    }

    fn bytes(&self, file: &str) -> Vec<u8> {
        std::fs::read(self.dir.join(file)).unwrap()
    }
}

fn alphagrad(tmp: &Path, command: &str, config: &str, extra: &[&str], threads: Option<&str>) -> Run {
    let cfg = tmp.join(format!("{command}-{}.json", extra.len()));
    std::fs::write(&cfg, config).unwrap();
    let out = tmp.join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_alphagrad"));
    cmd.arg(command).arg("--config").arg(&cfg).arg("--out").arg(&out).args(extra);
    match threads {
        Some(t) => cmd.env("ALPHAGRAD_THREADS", t),
        None => cmd.env_remove("ALPHAGRAD_THREADS"),
    };
    let output = cmd.output().unwrap();
    Run {
        code: output.status.code().unwrap(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        dir: out,
    }
}

fn run(command: &str, config: &str) -> (TempDir, Run) {
    let tmp = TempDir::new().unwrap();
    let r = alphagrad(tmp.path(), command, config, &[], None);
    (tmp, r)
}

#[test]
fn heaviside_first_order_row_is_exactly_zero() {
    let (_t, r) = run("estimate", r#"{"command": "estimate", "env": {"name": "heaviside"}, "estimator": {"samples": 500}}"#);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = r.table("estimate");
    assert_eq!(t.rows.len(), 3);
    assert_eq!(t.column("mean_0").unwrap()[0], 0.0);
    assert_eq!(t.column("emp_var").unwrap()[0], 0.0);
    assert!(t.column("mean_0").unwrap()[1] > 0.0);
    let alpha = t.column("alpha").unwrap();
    assert!(alpha[0].is_nan() && alpha[2] >= 0.0);
}

#[test]
fn quadratic_estimators_agree_within_their_errors() {
    let (_t, r) = run(
        "estimate",
        r#"{"command": "estimate", "env": {"name": "quadratic", "horizon": 2, "q": 1.0, "x0": 0.5},
            "estimator": {"samples": 20000, "sigma": 0.2}, "theta": [0.3, -0.4], "seed": 4}"#,
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = r.table("estimate");
    for j in 0..2 {
        let m = t.column(&format!("mean_{j}")).unwrap();
        let s = t.column(&format!("stderr_{j}")).unwrap();
        let se = (s[0] * s[0] + s[1] * s[1]).sqrt();
        assert!((m[0] - m[1]).abs() <= 3.0 * se, "component {j}");
    }
}

#[test]
fn malformed_json_fails_without_output() {
    let (_t, r) = run("estimate", "{\"command\": \"estimate\",\n \"env\": {\"name\": \"heaviside\"\n");
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line"), "{}", r.stderr);
    assert!(!r.dir.exists());
}

#[test]
fn config_errors_exit_with_two() {
    let cases = [
        ("estimate", r#"{"command": "estimate", "env": {"name": "heaviside"}, "extra": 1}"#),
        ("estimate", r#"{"command": "estimate", "env": {"name": "warp_drive"}}"#),
        ("optimize", r#"{"command": "estimate", "env": {"name": "heaviside"}}"#),
        ("optimize", r#"{"command": "optimize", "env": {"name": "quadratic"}, "optimizer": {"lr": 0}}"#),
        ("sweep", r#"{"command": "sweep", "env": {"name": "pushing"}, "sweep": {"parameter": "stiffness", "grid": []}}"#),
    ];
    for (command, config) in cases {
        let (_t, r) = run(command, config);
        assert_eq!(r.code, 2, "{config}: {}", r.stderr);
        assert!(!r.dir.exists());
    }
}

#[test]
fn thread_cap_must_be_positive() {
    let tmp = TempDir::new().unwrap();
    let r = alphagrad(tmp.path(), "estimate", r#"{"command": "estimate", "env": {"name": "heaviside"}}"#, &[], Some("0"));
    assert_eq!(r.code, 2);
}

#[test]
fn pushing_sweep_emits_one_row_per_grid_point() {
    let (_t, r) = run(
        "sweep",
        r#"{"command": "sweep", "env": {"name": "pushing", "horizon": 50},
            "estimator": {"samples": 50},
            "sweep": {"parameter": "stiffness", "grid": [10, 100, 1000, 10000]}}"#,
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = r.table("sweep");
    assert_eq!(t.columns, ["param", "value", "var_fobg", "var_zobg", "zero_batch_rate", "mean_gap"]);
    assert_eq!(t.rows.len(), 4);
    assert_eq!(t.column("value").unwrap(), vec![10.0, 100.0, 1000.0, 10000.0]);
}

#[test]
fn coulomb_slope_can_be_read_back_from_the_csv() {
    let (_t, r) = run(
        "sweep",
        r#"{"command": "sweep", "env": {"name": "coulomb"},
            "estimator": {"samples": 100000, "sigma": 1.0},
            "sweep": {"parameter": "nu", "grid": [0.001, 0.01, 0.1, 1]}}"#,
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = r.table("sweep");
    let x: Vec<f64> = t.column("value").unwrap().iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = t.column("var_fobg").unwrap().iter().map(|v| v.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / 4.0, y.iter().sum::<f64>() / 4.0);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((-1.3..=-0.7).contains(&slope), "slope {slope}");
}

#[test]
fn optimize_writes_one_row_per_iteration() {
    let (_t, r) = run(
        "optimize",
        r#"{"command": "optimize", "env": {"name": "quadratic"}, "theta": [1.0],
            "estimator": {"samples": 4, "sigma": 0.1}, "optimizer": {"estimator": "fobg", "steps": 10, "lr": 0.25}}"#,
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = String::from_utf8(r.bytes("optimize.csv")).unwrap();
    assert_eq!(text.matches("\r\n").count(), 11);
    assert_eq!(text.lines().next().unwrap(), "t,cost,stderr,alpha,sig0sq,sig1sq,B,epsilon,theta_0");
    let t = r.table("optimize");
    assert_eq!(t.column("t").unwrap(), (0..10).map(f64::from).collect::<Vec<_>>());
    let theta = t.column("theta_0").unwrap();
    assert_eq!(theta[0], 1.0);
    assert!(theta[9].abs() < 0.1);
}

#[test]
fn reruns_are_byte_identical_at_any_thread_count() {
    let tmp = TempDir::new().unwrap();
    let config = r#"{"command": "optimize", "env": {"name": "momentum"}, "optimizer": {"steps": 8}, "seed": 12}"#;
    let a = alphagrad(tmp.path(), "optimize", config, &[], Some("1"));
    let first = a.bytes("optimize.csv");
    let b = alphagrad(tmp.path(), "optimize", config, &[], Some("3"));
    let c = alphagrad(tmp.path(), "optimize", config, &[], None);
    assert_eq!(a.code, 0);
    assert_eq!(first, b.bytes("optimize.csv"));
    assert_eq!(first, c.bytes("optimize.csv"));
    let d = alphagrad(tmp.path(), "optimize", config, &["--seed", "13"], None);
    assert_ne!(first, d.bytes("optimize.csv"));
}

#[test]
fn stiff_pushing_run_diverges_with_partial_output() {
    let (_t, r) = run(
        "optimize",
        r#"{"command": "optimize", "env": {"name": "pushing", "horizon": 100, "stiffness": 1e6},
            "optimizer": {"estimator": "fobg", "steps": 5}}"#,
    );
    assert_eq!(r.code, 3, "{}", r.stderr);
    let t = r.table("optimize");
    assert!(t.rows.len() < 5);
}

#[test]
fn smoothed_heaviside_matches_the_normal_cdf() {
    let (_t, r) = run(
        "landscape",
        r#"{"command": "landscape", "env": {"name": "heaviside"}, "estimator": {"sigma": 1.0, "samples": 100},
            "landscape": {"axes": [{"min": -3, "max": 3, "points": 13}], "eval_samples": 20000}}"#,
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = r.table("landscape");
    let theta = t.column("theta_0").unwrap();
    let smooth = t.column("smoothed").unwrap();
    let se = t.column("smoothed_stderr").unwrap();
    for i in 0..theta.len() {
        let exact = normal_cdf(theta[i]);
        assert!((smooth[i] - exact).abs() <= 3.0 * se[i].max(1e-3), "θ = {}", theta[i]);
    }
    assert!(t.column("fobg_0").unwrap().iter().all(|&g| g == 0.0));
}

#[test]
fn ball_wall_landscape_has_a_single_jump() {
    let (_t, r) = run(
        "landscape",
        r#"{"command": "landscape", "env": {"name": "ball_wall"}, "estimator": {"samples": 10},
            "landscape": {"axes": [{"min": 0.2, "max": 1.0, "points": 81}], "eval_samples": 10}}"#,
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let cost = r.table("landscape").column("cost").unwrap();
    let inc: Vec<f64> = cost.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let jumps = (0..inc.len())
        .filter(|&i| {
            let left = if i > 0 { inc[i - 1] } else { 0.0 };
            let right = inc.get(i + 1).copied().unwrap_or(0.0);
            inc[i] > 10.0 * left.max(right)
        })
        .count();
    assert_eq!(jumps, 1);
}

#[test]
fn zero_cost_landscape_is_all_zero() {
    let (_t, r) = run(
        "landscape",
        r#"{"command": "landscape", "env": {"name": "zero", "horizon": 2},
            "landscape": {"axes": [{"index": 0, "min": -1, "max": 1, "points": 3}, {"index": 1, "min": 0, "max": 1, "points": 2}],
                          "eval_samples": 5}}"#,
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = r.table("landscape");
    assert_eq!(t.rows.len(), 6);
    for col in ["cost", "smoothed", "smoothed_stderr", "fobg_0", "fobg_1", "zobg_0", "zobg_1"] {
        assert!(t.column(col).unwrap().iter().all(|&v| v == 0.0), "{col}");
    }
}

#[test]
fn plots_are_written_and_validated() {
    let tmp = TempDir::new().unwrap();
    let config = r#"{"command": "optimize", "env": {"name": "quadratic"}, "theta": [1.0], "optimizer": {"steps": 5}}"#;
    let good = tmp.path().join("good.json");
    std::fs::write(&good, r#"{"x": "t", "series": [{"y": "cost", "error": "stderr", "error_scale": 10}]}"#).unwrap();
    let a = alphagrad(tmp.path(), "optimize", config, &["--plot", good.to_str().unwrap()], None);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let svg = String::from_utf8(a.bytes("optimize.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    let b = alphagrad(tmp.path(), "optimize", config, &["--plot", good.to_str().unwrap()], None);
    assert_eq!(svg.as_bytes(), b.bytes("optimize.svg"));

    let tmp2 = TempDir::new().unwrap();
    let bad = tmp2.path().join("bad.json");
    std::fs::write(&bad, r#"{"x": "t", "x_log": true, "series": [{"y": "cost"}]}"#).unwrap();
    let c = alphagrad(tmp2.path(), "optimize", config, &["--plot", bad.to_str().unwrap()], None);
    assert_eq!(c.code, 2);
    assert!(c.stderr.contains("row 0"), "{}", c.stderr);
    let missing = tmp2.path().join("missing.json");
    std::fs::write(&missing, r#"{"x": "t", "series": [{"y": "nope"}]}"#).unwrap();
    let d = alphagrad(tmp2.path(), "optimize", config, &["--plot", missing.to_str().unwrap()], None);
    assert_eq!(d.code, 2);
}
