use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use carrier_landing::config::KEYS;

fn carland(args: &[&str], out_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carland"))
        .args(args)
        .env("CARLAND_OUT", out_root)
        .output()
        .expect("spawn carland")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_documents_every_key() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in ["trim", "linearize", "run", "compare", "sweep"] {
        let o = carland(&[sub, "--help"], tmp.path());
        assert_eq!(code(&o), 0);
        let help = String::from_utf8(o.stdout).unwrap();
        for key in KEYS {
            assert!(
                help.contains(&format!("--{} <", key.name)),
                "{sub}: --{} missing",
                key.name
            );
            assert!(help.contains(key.help), "{sub}: help for {} missing", key.name);
            if let Some(alias) = key.alias {
                assert!(help.contains(&format!("--{alias}")), "{sub}: alias --{alias} missing");
            }
        }
    }
}

#[test]
fn run_writes_three_files() {
    let tmp = tempfile::tempdir().unwrap();
    let o = carland(
        &[
            "run",
            "--scenario",
            "pitch_step",
            "--controller",
            "opd",
            "--seed",
            "42",
            "duration=2",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = tmp.path().join("pitch_step_opd_seed42");
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["metrics.json", "resolved_config.toml", "trace.csv"]);
    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("t,v_t,theta,alpha,q,x,z,gamma,delta_e,thrust,theta_r,zdot_r,z_r,x1,x2,x3,d_true,"));
    // 2 s at dt 0.001 every 10th step, plus t = 0 and the header.
    assert_eq!(trace.lines().count(), 202);
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["seed"], 42);
    assert_eq!(metrics["controller"], "opd");
}

#[test]
fn rerun_from_snapshot_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let o = carland(
        &[
            "run",
            "--out",
            first.to_str().unwrap(),
            "--wind",
            "on",
            "--noise",
            "on",
            "seed=7",
            "duration=2",
            "observer.epsilon=0.45",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let second = tmp.path().join("second");
    let snap = first.join("resolved_config.toml");
    let o = carland(
        &[
            "run",
            "--config",
            snap.to_str().unwrap(),
            "--out",
            second.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["trace.csv", "metrics.json", "resolved_config.toml"] {
        assert_eq!(
            fs::read(first.join(f)).unwrap(),
            fs::read(second.join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn negative_dt_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = carland(&["run", "--dt", "-0.001"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("dt: must be > 0"), "{}", stderr(&o));
}

#[test]
fn unknown_key_lists_the_valid_ones() {
    let tmp = tempfile::tempdir().unwrap();
    let o = carland(&["run", "pitch.kq=3"], tmp.path());
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("unknown key `pitch.kq`"));
    assert!(KEYS.iter().all(|k| err.contains(k.name)));

    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[guid]\nkq = 1.0\n").unwrap();
    let o = carland(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown key `guid.kq`"));
}

#[test]
fn model_abort_keeps_partial_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("abort");
    let o = carland(
        &["run", "--out", dir.to_str().unwrap(), "pitch_step_deg=60"],
        tmp.path(),
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("model abort at t ="));
    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 10);
    let abort: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("abort.json")).unwrap()).unwrap();
    let t = abort["t"].as_f64().unwrap();
    let last_t: f64 = trace
        .lines()
        .last()
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(last_t <= t && t < 10.0);
    assert!(!dir.join("metrics.json").exists());
}

#[test]
fn unsettled_run_fails_the_gate() {
    let tmp = tempfile::tempdir().unwrap();
    let o = carland(&["run", "--require-settle", "duration=0.3"], tmp.path());
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let o = carland(&["run", "--require-settle", "duration=4"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn sweep_over_ten_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let o = carland(
        &[
            "sweep",
            "--seeds",
            "10",
            "--seed-start",
            "100",
            "--wind",
            "on",
            "duration=1.5",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = tmp.path().join("sweep_pitch_step_opd");
    let runs: Vec<_> = (100..110).map(|s| dir.join(format!("seed_{s}"))).collect();
    for r in &runs {
        assert!(r.join("trace.csv").is_file(), "{}", r.display());
        assert!(r.join("metrics.json").is_file());
        assert!(r.join("resolved_config.toml").is_file());
    }
    let table = fs::read_to_string(dir.join("aggregate.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines[1].starts_with("100,"));
    assert!(dir.join("aggregate.json").is_file());

    // Each seed directory reproduces a standalone run.
    let single = tmp.path().join("single");
    let o = carland(
        &[
            "run",
            "--config",
            runs[3].join("resolved_config.toml").to_str().unwrap(),
            "--out",
            single.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(single.join("trace.csv")).unwrap(),
        fs::read(runs[3].join("trace.csv")).unwrap()
    );
}

#[test]
fn trim_and_linearize_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = carland(&["trim"], tmp.path());
    assert_eq!(code(&o), 0);
    let trim: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((trim["alpha_deg"].as_f64().unwrap() - 7.1).abs() < 0.5);
    assert!(tmp.path().join("trim").join("trim.json").is_file());

    let o = carland(&["linearize"], tmp.path());
    assert_eq!(code(&o), 0);
    let lin: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let modes = lin["eigenvalues"].as_array().unwrap();
    assert_eq!(modes.len(), 4);
    assert_eq!(modes[0]["mode"], "short-period");
}

#[test]
fn compare_writes_both_controllers() {
    let tmp = tempfile::tempdir().unwrap();
    let o = carland(
        &[
            "compare",
            "--scenario",
            "pitch_step",
            "--wind",
            "on",
            "--noise",
            "on",
            "duration=3",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = tmp.path().join("compare_pitch_step_seed0");
    for f in [
        "opd/trace.csv",
        "opd/metrics.json",
        "pid/trace.csv",
        "pid/metrics.json",
        "comparison.json",
        "resolved_config.toml",
    ] {
        assert!(dir.join(f).is_file(), "{f}");
    }
}
