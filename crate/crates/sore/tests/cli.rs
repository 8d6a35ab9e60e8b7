mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::data_dir;

fn sore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sore"))
        .args(args)
        .output()
        .expect("run sore")
}

fn mini_conf() -> String {
    data_dir().join("mini/mini.conf").display().to_string()
}

fn out_set(dir: &Path) -> String {
    format!("output_dir={}", dir.display())
}

#[test]
fn run_then_stages_give_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let o = sore(&["run", "--config", &mini_conf(), "--set", &out_set(&a)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("retained"));

    for stage in [
        "ingest",
        "tradeoffs",
        "embed",
        "cluster",
        "oie",
        "filter",
        "stats",
        "report",
    ] {
        let o = sore(&[stage, "-c", &mini_conf(), "--set", &out_set(&b)]);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for f in [
        "stats.json",
        "report.txt",
        "decisions.jsonl",
        "clusters.model",
        "reports/doc-01.txt",
    ] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = sore(&["run", "--config", "/nonexistent/sore.conf"]);
    assert_eq!(missing.status.code(), Some(1));

    let bad_key = sore(&["run", "--config", &mini_conf(), "--set", "bogus=1"]);
    assert_eq!(bad_key.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_key.stderr).contains("bogus"));

    let o = sore(&[
        "run",
        "--config",
        &mini_conf(),
        "--set",
        &out_set(tmp.path()),
        "--set",
        "k=500",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage `cluster`"));

    let no_gold = sore(&["eval"]);
    assert_eq!(no_gold.status.code(), Some(1));
}

#[test]
fn filter_threshold_flag_drops_more() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sore(&["run", "--config", &mini_conf(), "--set", &out_set(tmp.path())]);
    assert!(o.status.success());
    let o = sore(&[
        "filter",
        "--config",
        &mini_conf(),
        "--set",
        &out_set(tmp.path()),
        "--threshold",
        "0.99",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let decisions = fs::read_to_string(tmp.path().join("decisions.jsonl")).unwrap();
    assert!(decisions.contains("below_similarity_threshold"));
}

#[test]
fn eval_scores_a_gold_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let fig1 = fs::read_to_string(data_dir().join("figures/fig1.conllu")).unwrap();
    fs::write(tmp.path().join("fig1.conllu"), fig1).unwrap();
    fs::write(
        tmp.path().join("fig1.ann"),
        "T1\tTrigger 11 20\ttrade-off\nT2\tKeyphrase 29 35\tsafety\nT3\tKeyphrase 40 50\tefficiency\n\
T4\tKeyphrase 51 69\tin conifer species\nR1\tTradeOff Arg1:T1 Arg2:T2\nR2\tTradeOff Arg1:T1 Arg2:T3\n\
R3\tArgModifier Arg1:T2 Arg2:T4\nR4\tArgModifier Arg1:T3 Arg2:T4\n",
    )
    .unwrap();
    let scores = tmp.path().join("scores.jsonl");
    let o = sore(&[
        "eval",
        "--gold",
        &tmp.path().display().to_string(),
        "--output",
        &scores.display().to_string(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("sentences scored: 1"), "{table}");
    assert!(table.contains("39.31"));
    let lines = fs::read_to_string(scores).unwrap();
    assert_eq!(lines.lines().count(), 4);
    assert!(lines.lines().all(|l| l.contains("\"f1\":1.0")), "{lines}");
}
