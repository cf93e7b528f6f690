use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rotpro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotpro"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn rotpro")
}

fn ok(args: &[&str]) -> String {
    let out = rotpro(args);
    assert!(
        out.status.success(),
        "rotpro {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synthetic(dir: &Path) {
    ok(&[
        "generate",
        "synthetic-chains",
        "--chains",
        "4",
        "--length",
        "5",
        "--seed",
        "3",
        "--out",
        s(dir),
    ]);
}

const SMALL: [&str; 10] = [
    "--dim",
    "6",
    "--max-steps",
    "30",
    "--batch-size",
    "8",
    "--negatives",
    "4",
    "--log-every",
    "10",
];

fn train(data: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "--threads",
        "1",
        "train",
        "--data",
        s(data),
        "--out",
        s(out),
    ];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(extra);
    rotpro(&args)
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn train_writes_artifacts_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("syn");
    let run = tmp.path().join("run");
    synthetic(&data);
    assert!(data.join("provenance.json").is_file());
    assert!(data.join("chains.txt").is_file());

    assert!(train(&data, &run, &["--set", "gamma=4"]).status.success());
    for f in [
        "model.json",
        "model.bin",
        "entities.dict",
        "relations.dict",
        "trace.csv",
        "config.txt",
        "run.json",
    ] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
    let m = manifest(&run.join("run.json"));
    assert_eq!(m["status"], "finished");
    assert_eq!(m["config"]["gamma"], "4");
    assert_eq!(m["threads"], 1);
    let trace = fs::read_to_string(run.join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,L_s,L_p,L,valid_mrr\n"));
    assert_eq!(trace.lines().count(), 1 + 4);

    let again = tmp.path().join("again");
    ok(&[
        "train",
        "--manifest",
        s(&run.join("run.json")),
        "--out",
        s(&again),
    ]);
    assert_eq!(
        fs::read(run.join("model.bin")).unwrap(),
        fs::read(again.join("model.bin")).unwrap()
    );
}

#[test]
fn rerun_refuses_changed_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("syn");
    let run = tmp.path().join("run");
    synthetic(&data);
    assert!(train(&data, &run, &[]).status.success());
    let train_file = data.join("train.txt");
    let mut text = fs::read_to_string(&train_file).unwrap();
    text.push_str("chain0_e0\ttransitive\tchain1_e0\n");
    fs::write(&train_file, text).unwrap();
    let out = rotpro(&[
        "train",
        "--manifest",
        s(&run.join("run.json")),
        "--out",
        s(&tmp.path().join("x")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("changed"));
}

#[test]
fn divergence_marks_manifest_failed() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("syn");
    let run = tmp.path().join("run");
    synthetic(&data);
    let out = train(&data, &run, &["--learning-rate", "1e300"]);
    assert!(!out.status.success());
    let m = manifest(&run.join("run.json"));
    assert_eq!(m["status"], "failed");
    assert!(!m["error"].as_str().unwrap().is_empty());
    assert!(!run.join("model.bin").exists());
}

#[test]
fn config_errors_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("syn");
    synthetic(&data);
    let out = train(&data, &tmp.path().join("r"), &["--preset", "nope"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nope") && err.contains("wn18rr"), "{err}");

    let out = train(&data, &tmp.path().join("r"), &["--set", "no_such_key=1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));
}

#[test]
fn eval_reports_and_rejects_unknown_symbols() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("syn");
    let run = tmp.path().join("run");
    synthetic(&data);
    assert!(train(&data, &run, &[]).status.success());

    let csv = tmp.path().join("m.csv");
    let stdout = ok(&[
        "eval",
        "--checkpoint",
        s(&run),
        "--data",
        s(&data),
        "--out",
        s(&csv),
    ]);
    assert!(stdout.contains("MRR"));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("scope,queries,MR,MRR,hits@1,hits@3,hits@10\nall,"));

    let other = tmp.path().join("other");
    fs::create_dir_all(&other).unwrap();
    for split in ["train", "test"] {
        fs::write(
            other.join(format!("{split}.txt")),
            "chain0_e0\ttransitive\tstranger\nghost\ttransitive\tchain0_e1\n",
        )
        .unwrap();
    }
    let out = rotpro(&["eval", "--checkpoint", s(&run), "--data", s(&other)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("`stranger`") && !err.contains("ghost"),
        "{err}"
    );
}

#[test]
fn transitivity_sets_and_eval() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("g");
    fs::create_dir_all(&data).unwrap();
    fs::write(data.join("train.txt"), "a\tr\tb\nb\tr\tc\nc\tr\td\n").unwrap();
    fs::write(data.join("test.txt"), "a\tr\tc\n").unwrap();
    let sets = tmp.path().join("sets");
    let stdout = ok(&[
        "generate",
        "transitivity-sets",
        "--data",
        s(&data),
        "--relation",
        "r",
        "--out",
        s(&sets),
    ]);
    // The test edge a->c shortens a->d to two hops.
    assert!(stdout.contains("S1 1 / S2 2 / S3 0"), "{stdout}");
    let mut s2: Vec<String> = fs::read_to_string(sets.join("s2.txt"))
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    s2.sort();
    assert_eq!(s2, ["a\tr\td", "b\tr\td"]);
    assert_eq!(fs::read_to_string(sets.join("s3.txt")).unwrap(), "");
    assert!(sets.join("provenance.json").is_file());

    let run = tmp.path().join("run");
    assert!(train(&data, &run, &[]).status.success());
    let csv = tmp.path().join("t.csv");
    ok(&[
        "eval",
        "--checkpoint",
        s(&run),
        "--data",
        s(&data),
        "--transitivity",
        "r",
        "--out",
        s(&csv),
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    let sets: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(sets, ["S1", "S2"]);
}

#[test]
fn analyze_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("syn");
    let run = tmp.path().join("run");
    synthetic(&data);
    assert!(train(&data, &run, &["--model", "rotpro"]).status.success());
    let ck = s(&run);

    let out = tmp.path().join("phases.csv");
    ok(&[
        "analyze",
        "--checkpoint",
        ck,
        "--out",
        s(&out),
        "phases",
        "--bins",
        "8",
    ]);
    assert!(fs::read_to_string(&out)
        .unwrap()
        .starts_with("bin_lo,bin_hi,count\n"));

    let out = tmp.path().join("col.csv");
    ok(&[
        "analyze",
        "--checkpoint",
        ck,
        "--out",
        s(&out),
        "collinearity",
        "--relation",
        "transitive",
        "--chains",
        s(&data.join("chains.txt")),
    ]);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 6);

    let out = tmp.path().join("sweep.csv");
    ok(&[
        "analyze",
        "--checkpoint",
        ck,
        "--out",
        s(&out),
        "loss-sweep",
        "--data",
        s(&data),
        "--relation",
        "transitive",
        "--points",
        "5",
    ]);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 5);

    let out = tmp.path().join("slice.csv");
    ok(&[
        "analyze",
        "--checkpoint",
        ck,
        "--out",
        s(&out),
        "slice",
        "--relation",
        "transitive",
        "--dim",
        "2",
        "--entities",
        "chain0_e0,chain0_e1,chain0_e2",
    ]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("chain0_e0,"));

    let bad = rotpro(&[
        "analyze",
        "--checkpoint",
        ck,
        "slice",
        "--relation",
        "transitive",
        "--dim",
        "99",
    ]);
    assert!(!bad.status.success());
}

#[test]
fn countries_generation_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let facts = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/countries/facts.tsv"
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        ok(&[
            "generate",
            "countries",
            "--facts",
            facts,
            "--task",
            "S2",
            "--seed",
            "5",
            "--out",
            s(out),
        ]);
    }
    for f in ["train.txt", "valid.txt", "test.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
    assert_eq!(
        fs::read_to_string(a.join("test.txt"))
            .unwrap()
            .lines()
            .count(),
        24
    );
}
