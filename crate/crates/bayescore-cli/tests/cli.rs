//! End-to-end checks of the command-line surface: exit codes,
//! artifact round-trips, and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bayescore")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(bin()).args(args).env(key, value).output().expect("binary runs")
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("bayescore-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

fn linear_data(n: usize, seed: u64) -> String {
    // Simple deterministic congruential stream keeps fixtures stable.
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut out = String::from("y,x1\n");
    for _ in 0..n {
        let x = 4.0 * next() - 2.0;
        let noise = next() + next() + next() - 1.5;
        out.push_str(&format!("{:.6},{:.6}\n", 3.0 + 1.5 * x + noise, x));
    }
    out
}

const LINEAR_MODEL: &str = r#"{
  "likelihood": "gauss",
  "link": "identity",
  "response": "y",
  "predictors": ["x1"],
  "sampler": {"algorithm": "gibbs", "chains": 2, "iter": 800, "warmup": 200}
}
"#;

const DECISION: &str = r#"{
  "states": ["s1", "s2"],
  "prior": [0.5, 0.5],
  "outcomes": ["good", "bad"],
  "utilities": [1.0, 0.0],
  "acts": {
    "sure": [[1.0, 0.0], [1.0, 0.0]],
    "gamble": [[1.0, 0.0], [0.0, 1.0]]
  }
}
"#;

#[test]
fn fit_predict_compare_round_trip() {
    let tmp = TempDir::new("roundtrip");
    write(&tmp.path("data.csv"), &linear_data(50, 1));
    write(&tmp.path("model.json"), LINEAR_MODEL);
    let fit1 = tmp.path("fit1");
    let out = run(&[
        "fit",
        "--data", tmp.path("data.csv").to_str().unwrap(),
        "--model", tmp.path("model.json").to_str().unwrap(),
        "--out", fit1.to_str().unwrap(),
        "--seed", "7",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for artifact in ["draws.csv", "summary.json", "destandardized.json", "ic.json", "meta.json"] {
        assert!(fit1.join(artifact).exists(), "missing {artifact}");
    }

    // Fit output feeds predict without manual editing.
    write(&tmp.path("new.csv"), "x1\n0.0\n1.0\n");
    let pred = tmp.path("pred");
    let out = run(&[
        "predict",
        "--fit", fit1.to_str().unwrap(),
        "--newdata", tmp.path("new.csv").to_str().unwrap(),
        "--out", pred.to_str().unwrap(),
        "--seed", "9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(pred.join("predictive.csv").exists());
    assert!(pred.join("report.json").exists());

    // And compare consumes two fits of the same response.
    let fit2 = tmp.path("fit2");
    let out = run(&[
        "fit",
        "--data", tmp.path("data.csv").to_str().unwrap(),
        "--model", tmp.path("model.json").to_str().unwrap(),
        "--out", fit2.to_str().unwrap(),
        "--seed", "8",
    ]);
    assert!(out.status.success());
    let out = run(&["compare", fit1.to_str().unwrap(), fit2.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("delta_waic"));

    // Comparing a fit with itself: zero delta, even weights.
    let out = run(&["compare", fit1.to_str().unwrap(), fit1.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let models = report["models"].as_array().unwrap();
    assert_eq!(models[0]["delta_waic"].as_f64().unwrap(), 0.0);
    assert!((models[0]["weight"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn malformed_spec_exits_2_naming_field() {
    let tmp = TempDir::new("badspec");
    write(&tmp.path("data.csv"), &linear_data(20, 2));
    write(
        &tmp.path("model.json"),
        r#"{"likelihood": "weibull", "link": "identity", "response": "y"}"#,
    );
    let out = run(&[
        "fit",
        "--data", tmp.path("data.csv").to_str().unwrap(),
        "--model", tmp.path("model.json").to_str().unwrap(),
        "--out", tmp.path("fit").to_str().unwrap(),
        "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("likelihood"), "stderr: {err}");
}

#[test]
fn missing_values_rejected_unless_dropped() {
    let tmp = TempDir::new("na");
    write(&tmp.path("data.csv"), "y,x1\n1,2\nNA,3\n2,4\n1.5,5\n2.5,1\n");
    write(&tmp.path("model.json"), LINEAR_MODEL);
    let out = run(&[
        "fit",
        "--data", tmp.path("data.csv").to_str().unwrap(),
        "--model", tmp.path("model.json").to_str().unwrap(),
        "--out", tmp.path("fit").to_str().unwrap(),
        "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing value"));

    let out = run(&[
        "fit",
        "--data", tmp.path("data.csv").to_str().unwrap(),
        "--model", tmp.path("model.json").to_str().unwrap(),
        "--out", tmp.path("fit").to_str().unwrap(),
        "--seed", "1",
        "--drop-na",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn predict_rejects_empty_and_mismatched_newdata() {
    let tmp = TempDir::new("prederr");
    write(&tmp.path("data.csv"), &linear_data(30, 3));
    write(&tmp.path("model.json"), LINEAR_MODEL);
    let fit = tmp.path("fit");
    assert!(run(&[
        "fit",
        "--data", tmp.path("data.csv").to_str().unwrap(),
        "--model", tmp.path("model.json").to_str().unwrap(),
        "--out", fit.to_str().unwrap(),
        "--seed", "3",
    ])
    .status
    .success());

    // Zero-row new data.
    write(&tmp.path("empty.csv"), "x1\n");
    let out = run(&[
        "predict",
        "--fit", fit.to_str().unwrap(),
        "--newdata", tmp.path("empty.csv").to_str().unwrap(),
        "--out", tmp.path("pred").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Column mismatch.
    write(&tmp.path("wrong.csv"), "z\n1\n");
    let out = run(&[
        "predict",
        "--fit", fit.to_str().unwrap(),
        "--newdata", tmp.path("wrong.csv").to_str().unwrap(),
        "--out", tmp.path("pred").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x1"));
}

#[test]
fn compare_rejects_different_response_data() {
    let tmp = TempDir::new("cmperr");
    write(&tmp.path("a.csv"), &linear_data(40, 4));
    write(&tmp.path("b.csv"), &linear_data(40, 5));
    write(&tmp.path("model.json"), LINEAR_MODEL);
    for (data, fit) in [("a.csv", "fita"), ("b.csv", "fitb")] {
        assert!(run(&[
            "fit",
            "--data", tmp.path(data).to_str().unwrap(),
            "--model", tmp.path("model.json").to_str().unwrap(),
            "--out", tmp.path(fit).to_str().unwrap(),
            "--seed", "4",
        ])
        .status
        .success());
    }
    let out = run(&[
        "compare",
        tmp.path("fita").to_str().unwrap(),
        tmp.path("fitb").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different response data"));
}

#[test]
fn decide_ranks_and_validates() {
    let tmp = TempDir::new("decide");
    write(&tmp.path("dec.json"), DECISION);
    let out = run(&["decide", "--decision", tmp.path("dec.json").to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("best act: sure"));

    // Uniform likelihood update leaves the ranking unchanged.
    let updated = run(&[
        "decide",
        "--decision", tmp.path("dec.json").to_str().unwrap(),
        "--update", "-1.0,-1.0",
    ]);
    assert!(updated.status.success());
    assert!(String::from_utf8_lossy(&updated.stdout).contains("best act: sure"));

    // Invalid lottery (sums to 0.9) exits 2.
    write(
        &tmp.path("bad.json"),
        &DECISION.replace("[1.0, 0.0], [0.0, 1.0]", "[0.9, 0.0], [0.0, 1.0]"),
    );
    let out = run(&["decide", "--decision", tmp.path("bad.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dist_lookup_prints_reference_values() {
    let out = run(&["dist", "exponential", "--params", "1", "--quantile", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0.693147"), "{text}");

    let out = run(&["dist", "cauchy", "--params", "0,1", "--moments"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("undefined"));

    let out = run(&["dist", "nonsense", "--params", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_results() {
    let tmp = TempDir::new("threads");
    write(&tmp.path("data.csv"), &linear_data(40, 6));
    write(&tmp.path("model.json"), LINEAR_MODEL);
    let args_for = |fit: &str| {
        vec![
            "fit".to_string(),
            "--data".into(), tmp.path("data.csv").to_str().unwrap().into(),
            "--model".into(), tmp.path("model.json").to_str().unwrap().into(),
            "--out".into(), tmp.path(fit).to_str().unwrap().into(),
            "--seed".into(), "11".into(),
        ]
    };
    let a1: Vec<&str> = Vec::new();
    let _ = a1;
    let args1 = args_for("serial");
    let argv1: Vec<&str> = args1.iter().map(String::as_str).collect();
    assert!(run_env(&argv1, "BAYESCORE_THREADS", "1").status.success());
    let args2 = args_for("parallel");
    let argv2: Vec<&str> = args2.iter().map(String::as_str).collect();
    assert!(run_env(&argv2, "BAYESCORE_THREADS", "4").status.success());
    let serial = fs::read(tmp.path("serial").join("draws.csv")).unwrap();
    let parallel = fs::read(tmp.path("parallel").join("draws.csv")).unwrap();
    assert_eq!(serial, parallel);
}

#[test]
fn fit_and_predict_match_conjugate_oracle() {
    // Intercept-only Gauss model with effectively flat priors: the
    // posterior marginals approach the closed-form joint solution under
    // the transformation-invariant joint prior, and the predictive mean
    // approaches the posterior location.
    let tmp = TempDir::new("oracle");
    let mut data = String::from("y
");
    let values = [
        1.31, 0.42, 2.18, 1.77, 0.95, 1.23, 1.61, 0.58, 1.94, 1.12, 1.47, 0.73, 1.85, 1.29,
        1.02, 1.66, 0.88, 1.41, 2.05, 1.18, 0.67, 1.53, 1.38, 0.99, 1.72,
    ];
    for v in values {
        data.push_str(&format!("{v}
"));
    }
    write(&tmp.path("data.csv"), &data);
    write(
        &tmp.path("model.json"),
        r#"{
  "likelihood": "gauss",
  "link": "identity",
  "response": "y",
  "standardize": false,
  "priors": {
    "intercept": {"dist": "gauss", "params": [0.0, 1000.0]},
    "sigma2": {"dist": "inverse-gamma", "params": [0.0001, 0.0001]}
  },
  "sampler": {"algorithm": "gibbs", "chains": 4, "iter": 6000, "warmup": 1000}
}"#,
    );
    let fit = tmp.path("fit");
    let out = run(&[
        "fit",
        "--data", tmp.path("data.csv").to_str().unwrap(),
        "--model", tmp.path("model.json").to_str().unwrap(),
        "--out", fit.to_str().unwrap(),
        "--seed", "99",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // Closed-form oracle under the flat joint prior.
    let stats = bayescore::conjugate::sufficient_stats(&values).unwrap();
    let joint = bayescore::conjugate::gauss_joint_uniform(&stats).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fit.join("summary.json")).unwrap()).unwrap();
    let b0 = summary["parameters"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "b0")
        .unwrap();
    let mean = b0["mean"].as_f64().unwrap();
    let mcse = b0["mcse"].as_f64().unwrap();
    assert!(
        (mean - stats.mean_y).abs() < 3.0 * mcse + 1e-3,
        "posterior mean {mean} vs oracle {}",
        stats.mean_y
    );

    // Predictive draws for one new case: mean within 3 MCSE of the
    // closed-form predictive location.
    write(&tmp.path("new.csv"), "y
0
");
    let pred = tmp.path("pred");
    let out = run(&[
        "predict",
        "--fit", fit.to_str().unwrap(),
        "--newdata", tmp.path("new.csv").to_str().unwrap(),
        "--out", pred.to_str().unwrap(),
        "--seed", "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(pred.join("report.json")).unwrap()).unwrap();
    let case = &report["cases"][0];
    let pred_mean = case["mean"].as_f64().unwrap();
    let pred_sd = case["sd"].as_f64().unwrap();
    let n_draws = report["n_draws"].as_f64().unwrap();
    let pred_mcse = pred_sd / n_draws.sqrt();
    let oracle_mean = match &joint.mu_marginal {
        bayescore::dist::Distribution::NoncentralT { mu, .. } => *mu,
        _ => unreachable!(),
    };
    assert!(
        (pred_mean - oracle_mean).abs() < 3.0 * pred_mcse + 1e-3,
        "predictive mean {pred_mean} vs oracle {oracle_mean}"
    );
}

#[test]
fn seed_recorded_when_not_supplied() {
    let tmp = TempDir::new("entropy");
    write(&tmp.path("data.csv"), &linear_data(30, 8));
    write(&tmp.path("model.json"), LINEAR_MODEL);
    let out = run(&[
        "fit",
        "--data", tmp.path("data.csv").to_str().unwrap(),
        "--model", tmp.path("model.json").to_str().unwrap(),
        "--out", tmp.path("fit").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path("fit").join("summary.json")).unwrap())
            .unwrap();
    assert!(summary["seed"].as_u64().is_some());
}
