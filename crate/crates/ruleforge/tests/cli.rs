use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_str().unwrap().to_string()
}

fn ruleforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruleforge"))
        .args(args)
        .env_remove("RULEFORGE_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn synthesized_rule_matches_the_highlight() {
    let corpus = data("corpus.jsonl");
    let rule = stdout(&ruleforge(&["synth", "--spec", &data("anderson_surface.json"), "--corpus", &corpus]));
    let rule = rule.trim();
    let shown = stdout(&ruleforge(&["match", "--rule", rule, "--corpus", &corpus, "--sentence", "anderson"]));
    assert_eq!(shown, "anderson\t[0,10) he was a son of david and mary m anderson\n");
}

#[test]
fn synth_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (out, trace) = (dir.path().join("r.json"), dir.path().join("t.ndjson"));
    let printed = stdout(&ruleforge(&[
        "synth",
        "--spec",
        &data("anderson_path.json"),
        "--scorer",
        "static",
        "--out",
        out.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["found"], true);
    assert_eq!(report["rule"].as_str().unwrap(), printed.trim());
    assert_eq!(report["matches"], serde_json::json!([[[0, 3]]]));
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(lines.lines().count() as u64, report["statesExplored"].as_u64().unwrap());
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(first["step"], 1);
    assert_eq!(first["state"], "HOLE");
}

#[test]
fn budget_exhaustion_is_reported() {
    let out = stdout(&ruleforge(&["synth", "--spec", &data("anderson_path.json"), "--max-states", "1"]));
    assert_eq!(out, "no rule found after 1 states\n");
}

#[test]
fn gen_data_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let (out, items): (PathBuf, PathBuf) = (dir.path().join(format!("{tag}.jsonl")), dir.path().join(format!("{tag}.items")));
        let o = ruleforge(&[
            "gen-data",
            "--corpus",
            &data("corpus.jsonl"),
            "--n",
            "20",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
            "--items",
            items.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        (std::fs::read(out).unwrap(), std::fs::read(items).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let header: serde_json::Value = serde_json::from_slice(a.0.split(|&c| c == b'\n').next().unwrap()).unwrap();
    assert_eq!(header["format"], "ruleforge-training");
    assert_eq!(header["items"], 20);
}

#[test]
fn usage_errors_exit_two() {
    let out = ruleforge(&["synth", "--spec", "x.json", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ruleforge(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(ruleforge(&["--help"]).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(
        &spec,
        r#"{"mode":"surface","entries":[{"sentence":{"ref":"anderson"},"selections":[[0,3]]},{"sentence":{"ref":"anderson"},"selections":[[4,40]]}]}"#,
    )
    .unwrap();
    let out = ruleforge(&["synth", "--spec", spec.to_str().unwrap(), "--corpus", &data("corpus.jsonl")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("entry 1"), "{err}");

    let out = ruleforge(&["match", "--rule", "[word=he", "--corpus", &data("corpus.jsonl")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset"), "{}", String::from_utf8_lossy(&out.stderr));

    let out = ruleforge(&["synth", "--spec", &data("anderson_path.json"), "--scorer", "contextual"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unreachable_remote_scorer_fails_cleanly() {
    let out = ruleforge(&[
        "synth",
        "--spec",
        &data("anderson_path.json"),
        "--scorer",
        "remote",
        "--endpoint",
        "http://127.0.0.1:9/score",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("remote scorer"));
}

#[test]
fn config_file_and_environment_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"search": {"maxStates": 1}}"#).unwrap();
    let out = ruleforge(&["--config", cfg.to_str().unwrap(), "synth", "--spec", &data("anderson_path.json")]);
    assert_eq!(stdout(&out), "no rule found after 1 states\n");

    let out = Command::new(env!("CARGO_BIN_EXE_ruleforge"))
        .args(["synth", "--spec", &data("anderson_path.json")])
        .env("RULEFORGE_MAX_STATES", "2")
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "no rule found after 2 states\n");

    std::fs::write(&cfg, r#"{"search": {"maxStates": 0}}"#).unwrap();
    let out = ruleforge(&["--config", cfg.to_str().unwrap(), "synth", "--spec", &data("anderson_path.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fewshot_path_mode_reports_per_episode() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("fs.json");
    let out = stdout(&ruleforge(&[
        "eval-fewshot",
        "--episodes",
        &data("episodes_5way1shot.json"),
        "--mode",
        "path",
        "--negative-supports",
        "--report",
        report.to_str().unwrap(),
    ]));
    assert!(out.starts_with("micro-F1 "));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["mode"], "path");
    assert_eq!(json["perEpisode"].as_array().unwrap().len(), 20);
}
