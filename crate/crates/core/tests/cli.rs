//! End-to-end runs of the `grec` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn grec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = grec(args);
    assert!(
        out.status.success(),
        "grec {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Three users; item `e` occurs once and `u3` keeps only two items.
const EVENTS: &str = "\
u1\tc\t3
u1\ta\t1
u1\tb\t2
u1\td\t4
u1\ta\t5
u1\te\t6
u1\tb\t7
u1\tc\t8
u2\tb\t1
u2\tc\t2
u2\td\t3
u2\ta\t4
u3\ta\t1
u3\tb\t2
";

fn prep_fixture(dir: &Path, out: &str) -> (String, std::path::PathBuf) {
    let input = dir.join("events.tsv");
    fs::write(&input, EVENTS).unwrap();
    let out = dir.join(out);
    let input_kv = format!("input={}", s(&input));
    let stdout = ok(&[
        "prep", "--set", &input_kv, "--set", "min_item_count=2", "--set", "k=4", "--set", "l=3", "--out", s(&out),
    ]);
    (stdout, out)
}

#[test]
fn prep_counts_match_hand_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let (stdout, out) = prep_fixture(dir.path(), "prep");
    // counts: a 4, b 4, c 3, d 2, e 1, so `e` is dropped. u1 keeps 7 items
    // (a full row and a padded row of 3), u2 one full row, u3 is too short.
    let expected = "users\t3\nitems\t4\ninteractions\t11\ntrain_sessions\t1\nvalid_sessions\t1\ntest_sessions\t1\n";
    assert_eq!(stdout, expected);
    // first appearance in the file fixes the indices
    assert_eq!(fs::read_to_string(out.join("vocab.tsv")).unwrap(), "1\tc\n2\ta\n3\tb\n4\td\n");
    let mut rows: Vec<String> = ["train", "valid", "test"]
        .iter()
        .flat_map(|name| {
            let text = fs::read_to_string(out.join(format!("{name}.sessions"))).unwrap();
            let mut lines = text.lines().map(str::to_string).collect::<Vec<_>>();
            assert_eq!(lines.remove(0), "#k=4 V=4");
            lines
        })
        .collect();
    rows.sort();
    // u1 by time: a b c d | a b c ; u2: b c d a
    assert_eq!(rows, ["0 2 3 1", "2 3 1 4", "3 1 4 2"]);
    assert!(out.join("config.resolved").exists());

    let (_, again) = prep_fixture(dir.path(), "prep2");
    for f in ["train.sessions", "valid.sessions", "test.sessions", "vocab.tsv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn empty_vocabulary_fails_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("events.tsv");
    fs::write(&input, EVENTS).unwrap();
    let input_kv = format!("input={}", s(&input));
    let out = grec(&["prep", "--set", &input_kv, "--set", "min_item_count=100", "--out", s(&dir.path().join("o"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("100"));
}

#[test]
fn unknown_setting_is_named() {
    let out = grec(&["synth", "--set", "gamam=0.3"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamam"));
}

fn tiny_synth(dir: &Path) -> std::path::PathBuf {
    let data = dir.join("data");
    ok(&[
        "synth", "--set", "synth_vocab=20", "--set", "synth_sessions=200", "--set", "k=8", "--seed", "3", "--out", s(&data),
    ]);
    data
}

const TINY: [&str; 10] = [
    "--set", "d=8", "--set", "enc_dilations=1,2", "--set", "dec_dilations=1,2", "--set", "max_epochs=1", "--set", "batch_size=32",
];

#[test]
fn train_eval_infer_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = tiny_synth(dir.path());
    let data_kv = format!("data={}", s(&data));
    for model in ["nextitnet", "grec"] {
        let run = dir.path().join(model);
        let mut args = vec!["train", "--model", model, "--set", &data_kv, "--out", s(&run)];
        args.extend(TINY);
        let report = ok(&args);
        assert!(report.contains("mrr5="), "{report}");
        for f in ["checkpoint.bin", "train_log.csv", "report.txt", "config.resolved"] {
            assert!(run.join(f).exists(), "{model}: {f}");
        }
        let resolved = fs::read_to_string(run.join("config.resolved")).unwrap();
        assert!(resolved.lines().any(|l| l == format!("model={model}")));

        let eval = ok(&["eval", "--model", model, "--set", &data_kv, "--out", s(&run)]);
        let mrr = |text: &str| text.lines().find(|l| l.starts_with("mrr5=")).unwrap().to_string();
        assert_eq!(mrr(&eval), mrr(&report));

        let top = ok(&["infer", "--model", model, "--prefix", "3 7 1", "--topn", "6", "--out", s(&run)]);
        let items: Vec<u32> = top.lines().map(|l| l.split(' ').next().unwrap().parse().unwrap()).collect();
        assert_eq!(items.len(), 6);
        assert!(items.iter().all(|&i| (1..=20).contains(&i)), "{items:?}");
    }

    let pop = ok(&["eval", "--model", "mostpop", "--set", &data_kv, "--out", s(&dir.path().join("pop"))]);
    assert!(pop.contains("model=mostpop"), "{pop}");

    let bad = grec(&["infer", "--model", "grec", "--prefix", "0 21", "--out", s(&dir.path().join("grec"))]);
    assert!(!bad.status.success());
}

#[test]
fn ablate_writes_gamma_rows_and_projector_grid() {
    let dir = tempfile::tempdir().unwrap();
    let data = tiny_synth(dir.path());
    let data_kv = format!("data={}", s(&data));
    let out = dir.path().join("ablate");
    let mut args = vec![
        "ablate", "--set", &data_kv, "--set", "ablate_seeds=0", "--set", "ablate_variants=grec,grecn,nextitnet,nextitnetp", "--out", s(&out),
    ];
    args.extend(TINY);
    let table = ok(&args);
    let labels: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        labels,
        [
            "grec_gamma=0.1", "grec_gamma=0.3", "grec_gamma=0.5", "grec_gamma=0.7", "grec_gamma=1",
            "grec", "grecn", "nextitnet", "nextitnetp",
        ]
    );
    assert_eq!(fs::read_to_string(out.join("ablate.csv")).unwrap(), table);
    assert_eq!(fs::read_to_string(out.join("ablate_runs.csv")).unwrap().lines().count(), 10);
}
