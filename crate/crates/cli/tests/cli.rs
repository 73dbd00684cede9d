use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lineage_ilp::io;

const SMALL: &str = r#"{
  "seed": 4,
  "sim": {"sequence": {"frames": 20, "width": 100, "height": 100, "initial_cells": 6, "division_rate": 0.05}},
  "classify": {"proposal": {"n_trees": 30}, "moves": {"n_trees": 30}, "mitosis": {"n_trees": 30}}
}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lineage-ilp"));
    c.env("LINEAGE_ILP_LOG", "error");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("spawn")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = run(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn workspace(config: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    fs::write(path.join("cfg.json"), config).unwrap();
    (dir, path)
}

#[test]
fn e2e_on_clean_data_is_perfect() {
    let (_tmp, dir) = workspace(SMALL);
    let out = ok(&["e2e", "--config", "cfg.json", "--out", "run"], &dir);
    let report = io::read_report(dir.join("run/report.json")).unwrap();
    let t = report.tracking.unwrap();
    assert_eq!(t.tra.tra, 1.0);
    assert_eq!(t.seg, Some(1.0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("TRA"), "{text}");
    for f in [
        "model.json",
        "graph.json",
        "proposals.jsonl",
        "tracks.txt",
        "data/t000.pgm",
        "data/gt/tracks.txt",
    ] {
        assert!(dir.join("run").join(f).exists(), "{f}");
    }
}

#[test]
fn e2e_is_byte_identical_across_runs() {
    let (_tmp, dir) = workspace(SMALL);
    ok(&["e2e", "--config", "cfg.json", "--out", "a"], &dir);
    ok(&["e2e", "--config", "cfg.json", "--out", "b", "--threads", "1"], &dir);
    for f in [
        "tracks.txt",
        "report.json",
        "model.json",
        "graph.json",
        "proposals.jsonl",
        "seg/t007.pgm",
    ] {
        assert_eq!(
            fs::read(dir.join("a").join(f)).unwrap(),
            fs::read(dir.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    ok(&["e2e", "--config", "cfg.json", "--out", "c", "--seed", "5"], &dir);
    assert_ne!(
        fs::read(dir.join("a/model.json")).unwrap(),
        fs::read(dir.join("c/model.json")).unwrap()
    );
}

#[test]
fn staged_commands_chain() {
    let (_tmp, dir) = workspace(SMALL);
    ok(
        &["simulate", "--config", "cfg.json", "--out", "train", "--seed", "99"],
        &dir,
    );
    ok(&["simulate", "--config", "cfg.json", "--out", "data"], &dir);
    ok(
        &["propose", "--config", "cfg.json", "--data", "data", "--out", "props"],
        &dir,
    );
    ok(
        &["train", "--config", "cfg.json", "--data", "train", "--out", "model"],
        &dir,
    );
    let p = "props/proposals.jsonl";
    let common = [
        "--config",
        "cfg.json",
        "--data",
        "data",
        "--model",
        "model",
        "--proposals",
        p,
    ];
    ok(&[&["track"][..], &common, &["--out", "res"]].concat(), &dir);
    ok(&[&["dump-graph"][..], &common, &["--out", "res"]].concat(), &dir);
    let out = ok(
        &[
            "eval",
            "--data",
            "data",
            "--result",
            "res",
            "--proposals",
            p,
            "--graph",
            "res/graph.json",
        ],
        &dir,
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["TRA", "SEG", "FN", "FP", "NS", "EA", "EC", "ED2"]);
    let report = io::read_report(dir.join("res/report.json")).unwrap();
    assert!(report.detection.is_some() && report.graph.is_some());
    assert_eq!(report.tracking.unwrap().tra.tra, 1.0);
    assert!(io::read_graph(dir.join("res/graph.json")).is_ok());
}

#[test]
fn empty_proposals_give_empty_tracks_and_zero_tra() {
    let (_tmp, dir) = workspace(SMALL);
    ok(&["simulate", "--config", "cfg.json", "--out", "data"], &dir);
    ok(
        &["train", "--config", "cfg.json", "--data", "data", "--out", "model"],
        &dir,
    );
    fs::write(dir.join("empty.jsonl"), "{\"format\":\"proposals\",\"version\":1}\n").unwrap();
    ok(
        &[
            "track",
            "--config",
            "cfg.json",
            "--data",
            "data",
            "--model",
            "model",
            "--proposals",
            "empty.jsonl",
            "--out",
            "res",
        ],
        &dir,
    );
    assert_eq!(fs::read_to_string(dir.join("res/tracks.txt")).unwrap(), "");
    ok(&["eval", "--data", "data", "--result", "res"], &dir);
    let report = io::read_report(dir.join("res/report.json")).unwrap();
    assert_eq!(report.tracking.unwrap().tra.tra, 0.0);
}

fn code(args: &[&str], dir: &Path) -> i32 {
    let out = run(args, dir);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error"), "{args:?}: {err}");
    out.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let (_tmp, dir) = workspace(SMALL);
    fs::write(dir.join("bad.json"), r#"{"sead": 1}"#).unwrap();
    assert_eq!(code(&["e2e", "--config", "bad.json", "--out", "x"], &dir), 2);
    assert_eq!(code(&["e2e", "--out", "x"], &dir), 2);
    assert_eq!(code(&["e2e", "--config", "missing.json", "--out", "x"], &dir), 3);
    assert_eq!(
        code(
            &["propose", "--config", "cfg.json", "--data", "nope", "--out", "x"],
            &dir
        ),
        3
    );

    ok(&["simulate", "--config", "cfg.json", "--out", "data"], &dir);
    ok(
        &["train", "--config", "cfg.json", "--data", "data", "--out", "model"],
        &dir,
    );
    fs::write(dir.join("garbage.jsonl"), "garbage\n").unwrap();
    let track = |props: &str, cfg: &str| {
        code(
            &[
                "track",
                "--config",
                cfg,
                "--data",
                "data",
                "--model",
                "model",
                "--proposals",
                props,
                "--out",
                "res",
            ],
            &dir,
        )
    };
    assert_eq!(track("garbage.jsonl", "cfg.json"), 4);
    fs::write(dir.join("v9.jsonl"), "{\"format\":\"proposals\",\"version\":9}\n").unwrap();
    assert_eq!(track("v9.jsonl", "cfg.json"), 4);

    // clutter and fragments keep the search from closing at the root
    let mut cfg: serde_json::Value = serde_json::from_str(SMALL).unwrap();
    cfg["sim"]["corruption"] = serde_json::json!({"split": 0.5, "merge": 0.5, "clutter": 0.5});
    cfg["solve"] = serde_json::json!({"time_limit": 0.0, "node_limit": 1});
    fs::write(dir.join("t0.json"), cfg.to_string()).unwrap();
    ok(
        &["propose", "--config", "t0.json", "--data", "data", "--out", "props"],
        &dir,
    );
    assert_eq!(track("props/proposals.jsonl", "t0.json"), 5);
}
