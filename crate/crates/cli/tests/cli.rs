//! End-to-end tests that drive the installed binary the way a user would.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fsforge() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fsforge"));
    // keep ambient configuration from leaking into the assertions
    cmd.env_remove("FSFORGE_SEED");
    cmd
}

fn dataset() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/lung-cancer.arff")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn selftest_exits_zero_and_reports_every_check() {
    let out = fsforge().arg("selftest").output().unwrap();
    let text = stdout_of(&out);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(text.contains("checks passed"), "missing summary line:\n{text}");
    assert!(!text.contains("FAIL"), "a check failed:\n{text}");
}

#[test]
fn run_writes_the_full_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = fsforge()
        .args(["run", "--method", "hybrid", "--seed", "3"])
        .args(["--ga-pop", "4", "--ga-gens", "2"])
        .arg("--data")
        .arg(dataset())
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    for artifact in [
        "report.json",
        "report.csv",
        "run.log",
        "series/ms.csv",
        "series/rae.csv",
        "series/tp_rate.csv",
        "series/tn_rate.csv",
        "series/fp_rate.csv",
        "series/fn_rate.csv",
        "series/group.csv",
        "trace/ga_trace.csv",
    ] {
        assert!(out_dir.join(artifact).is_file(), "missing {artifact}");
    }
    let report = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"method\": \"hybrid\""));
    assert!(report.contains("\"seed\": 3"));
}

#[test]
fn compare_accepts_a_method_subset() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = fsforge()
        .args(["compare", "--methods", "all_features,info_gain", "--seed", "3"])
        .arg("--data")
        .arg(dataset())
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let report = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"method\": \"all_features\""));
    assert!(report.contains("\"method\": \"info_gain\""));
    assert!(!report.contains("\"method\": \"hybrid\""));
    let table = stdout_of(&out);
    assert!(table.contains("all_features"));
    assert!(table.contains("info_gain"));
}

#[test]
fn rank_prints_a_table_and_writes_csv() {
    let out = fsforge().arg("rank").arg("--data").arg(dataset()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let table = stdout_of(&out);
    assert!(table.contains("info-gain"));
    assert!(table.contains("attr"));

    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("ranking.csv");
    let out = fsforge()
        .args(["rank", "--measure", "su"])
        .arg("--data")
        .arg(dataset())
        .arg("--out")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("rank,attribute,score"));
    // header plus one row per attribute
    assert_eq!(csv.lines().count(), 57);
}

#[test]
fn smote_emits_a_parseable_arff_with_the_expected_balance() {
    let dir = tempfile::tempdir().unwrap();
    let merged = dir.path().join("merged.arff");
    let out = fsforge()
        .args(["smote", "--seed", "42"])
        .arg("--data")
        .arg(dataset())
        .arg("--out")
        .arg(&merged)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("+7 synthetic"));
    let text = std::fs::read_to_string(&merged).unwrap();
    assert!(text.starts_with("@relation"));
    let rows = text
        .lines()
        .skip_while(|l| !l.eq_ignore_ascii_case("@data"))
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .count();
    assert_eq!(rows, 39);
}

#[test]
fn smote_streams_to_stdout_when_no_out_is_given() {
    let out = fsforge()
        .arg("smote")
        .arg("--data")
        .arg(dataset())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).starts_with("@relation"));
    assert!(stderr_of(&out).contains("+7 synthetic"));
}

#[test]
fn config_errors_exit_one() {
    let out = fsforge()
        .args(["run", "--method", "bogus"])
        .arg("--data")
        .arg(dataset())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("unknown method"));

    let out = fsforge()
        .args(["run", "--ga-pop", "1"])
        .arg("--data")
        .arg(dataset())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_two() {
    let out = fsforge()
        .args(["run", "--data", "does-not-exist.arff"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.arff");
    std::fs::write(&broken, "@relation x\n@attribute a {0,1}\n@data\n0\n").unwrap();
    let out = fsforge().arg("run").arg("--data").arg(&broken).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

#[test]
fn seed_env_var_matches_the_flag_and_loses_to_it() {
    let dir = tempfile::tempdir().unwrap();
    let run = |label: &str, configure: &dyn Fn(&mut Command)| -> String {
        let out_dir = dir.path().join(label);
        let mut cmd = fsforge();
        cmd.args(["run", "--method", "all_features"])
            .arg("--data")
            .arg(dataset())
            .arg("--out")
            .arg(&out_dir);
        configure(&mut cmd);
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
        std::fs::read_to_string(out_dir.join("report.json")).unwrap()
    };

    let by_flag = run("flag", &|cmd| {
        cmd.args(["--seed", "7"]);
    });
    let by_env = run("env", &|cmd| {
        cmd.env("FSFORGE_SEED", "7");
    });
    let flag_wins = run("both", &|cmd| {
        cmd.args(["--seed", "7"]).env("FSFORGE_SEED", "1234");
    });
    assert_eq!(by_flag, by_env);
    assert_eq!(by_flag, flag_wins);

    let out = fsforge()
        .args(["run", "--method", "all_features"])
        .arg("--data")
        .arg(dataset())
        .env("FSFORGE_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_seed_beats_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "[data]\npath = {:?}\n\n[run]\nseed = 99\nmethod = \"all_features\"\n",
            dataset()
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = fsforge()
        .arg("run")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .env("FSFORGE_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let report = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"seed\": 99"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "[run]\nsede = 1\n").unwrap();
    let out = fsforge()
        .arg("run")
        .arg("--config")
        .arg(&config)
        .arg("--data")
        .arg(dataset())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("configuration error"));
}
