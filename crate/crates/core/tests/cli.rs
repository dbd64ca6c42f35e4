use std::path::Path;
use std::process::{Command, Output};

fn certnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_certnav"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = certnav(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn twice(args: &[&str], files: &[&str]) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut full = args.to_vec();
        full.extend(["--out", dir.path().to_str().unwrap()]);
        ok(&full);
    }
    for f in files {
        assert!(read(a.path(), f) == read(b.path(), f), "{f} differs between runs of {args:?}");
    }
}

#[test]
fn bench_is_byte_identical() {
    twice(&["bench", "--n-envs", "2", "--seed", "7"], &["report.json", "episodes.jsonl"]);
}

#[test]
fn run_is_byte_identical() {
    twice(
        &["run", "--env", "bugtrap", "--policy", "hybrid", "--time-cap", "5"],
        &["episode.json", "steps.jsonl", "trajectory.svg"],
    );
    twice(&["run", "--env", "random", "--seed", "3"], &["episode.json", "trajectory.svg"]);
}

#[test]
fn verify_is_byte_identical_and_in_range() {
    twice(&["verify", "--samples", "1000", "--seed", "2"], &["feasibility.json"]);
    let dir = tempfile::tempdir().unwrap();
    ok(&["verify", "--samples", "1000", "--out", dir.path().to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_slice(&read(dir.path(), "feasibility.json")).unwrap();
    let f = report["fraction_feasible"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&f));
}

#[test]
fn train_is_byte_identical() {
    twice(
        &["train", "--epochs", "2", "--samples", "200", "--seed", "4", "--save-dataset"],
        &["model.json", "history.csv", "dataset.jsonl"],
    );
}

#[test]
fn run_writes_a_loadable_episode_for_an_environment_file() {
    let dir = tempfile::tempdir().unwrap();
    let env_path = dir.path().join("env.json");
    std::fs::write(&env_path, certnav::benchmark::bugtrap_env().to_json()).unwrap();
    ok(&[
        "run",
        "--env",
        env_path.to_str().unwrap(),
        "--time-cap",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let log: certnav::benchmark::EpisodeLog = serde_json::from_slice(&read(dir.path(), "episode.json")).unwrap();
    assert_eq!(log.steps.len(), 10);
    let svg = String::from_utf8(read(dir.path(), "trajectory.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn invalid_config_exits_nonzero_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[certificate]\nalpha_v = 0.95\nbogus = 1\n", "line 3"),
        ("seed = 1\n\n[sim]\ndt = \"fast\"\n", "line 4"),
        ("seed = 1\n[certificate]\nd_c = 0.2\nalpha_v = 1.5\n", "line 4"),
        ("[training]\nlr = 0.001\n[controller]\neps_h = -1.0\n", "line 4"),
    ];
    for (i, (text, want)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.toml"));
        std::fs::write(&path, text).unwrap();
        let out = certnav(&["verify", "--samples", "10", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "case {i}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(want), "case {i}: {err}");
    }
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(certnav(&["fly"]).status.code(), Some(2));
    assert_eq!(certnav(&["run", "--policy", "teleport"]).status.code(), Some(2));
    assert_eq!(certnav(&["run", "--model", "/nonexistent/model.json"]).status.code(), Some(2));
    let help = certnav(&["--help"]);
    assert!(help.status.success());
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["train", "verify", "run", "bench"] {
        assert!(text.contains(sub));
    }
}
