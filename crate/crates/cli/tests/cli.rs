use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use surya_core::data::FRAME_DIM;
use surya_core::engine::{read_message, Message};
use tempfile::tempdir;

fn surya(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surya"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "exit {:?}\n{}", o.status.code(), stderr(&o));
    o
}

/// Small separable dataset plus a model trained on it.
fn trained(dir: &Path) {
    ok(surya(&["gen-synthetic", "--out", "data", "--per-class", "6", "--seed", "7"], dir));
    ok(surya(&["train", "--data", "data", "--out", "model/model.snkm", "--epochs", "30"], dir));
}

#[test]
fn gen_synthetic_writes_dataset() {
    let dir = tempdir().unwrap();
    let out = ok(surya(&["gen-synthetic", "--out", "data", "--per-class", "30", "--seed", "7"], dir.path()));
    assert!(stdout(&out).contains("240"));
    assert!(stderr(&out).contains("seed: 7"), "resolved config is logged");
    let classes: Vec<_> = fs::read_dir(dir.path().join("data")).unwrap().flatten().filter(|e| e.path().is_dir()).collect();
    assert_eq!(classes.len(), 8);
    let files: usize = classes.iter().map(|c| fs::read_dir(c.path()).unwrap().count()).sum();
    assert_eq!(files, 240);
    assert!(dir.path().join("data/manifest.json").is_file());
}

#[test]
fn train_eval_predict_inspect() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    trained(d);
    assert!(d.join("model/curves.csv").is_file());
    let curves = fs::read_to_string(d.join("model/curves.csv")).unwrap();
    assert!(curves.starts_with("epoch,train_loss,train_acc,val_loss,val_acc\n"));
    assert_eq!(curves.lines().count(), 31);

    let eval = ok(surya(&["eval", "--model", "model/model.snkm", "--data", "data", "--out", "e1"], d));
    let report = stdout(&eval);
    assert!(report.contains("train accuracy 1.000"), "{report}");
    assert!(report.contains("test accuracy"));
    for f in ["confusion.csv", "per_class.json", "accuracy.txt"] {
        assert!(d.join("e1").join(f).is_file(), "{f}");
    }
    // Byte-identical on repeat.
    ok(surya(&["eval", "--model", "model/model.snkm", "--data", "data", "--out", "e2"], d));
    for f in ["confusion.csv", "per_class.json", "accuracy.txt"] {
        assert_eq!(fs::read(d.join("e1").join(f)).unwrap(), fs::read(d.join("e2").join(f)).unwrap());
    }

    let predict = ok(surya(&["predict", "--model", "model/model.snkm", "--data", "data/Bhujangasana"], d));
    let text = stdout(&predict);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let cols: Vec<&str> = row.split('\t').collect();
        assert_eq!(cols.len(), 10);
        assert_eq!(cols[1], "Bhujangasana");
    }

    let inspect = ok(surya(&["inspect-model", "--model", "model/model.snkm"], d));
    let table = stdout(&inspect);
    assert!(table.contains("total 596840"));
    assert_eq!(table.lines().filter(|l| l.starts_with("lstm_") || l.starts_with("dense_")).count(), 6);
    assert!(table.contains("canonical architecture: yes"));
}

#[test]
fn training_is_reproducible_from_flags() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    ok(surya(&["gen-synthetic", "--out", "data", "--per-class", "3", "--noise", "0.1", "--seed", "1"], d));
    for out in ["a/m.snkm", "b/m.snkm"] {
        ok(surya(&["train", "--data", "data", "--out", out, "--epochs", "2", "--batch-size", "4"], d));
    }
    assert_eq!(fs::read(d.join("a/m.snkm")).unwrap(), fs::read(d.join("b/m.snkm")).unwrap());
    assert_eq!(fs::read(d.join("a/curves.csv")).unwrap(), fs::read(d.join("b/curves.csv")).unwrap());
}

#[test]
fn serve_over_stdio() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    trained(d);
    let mut input = Message::Hello { version: 1, dim: FRAME_DIM as u16 }.encode();
    for t in 0..12u64 {
        input.extend(Message::Frame { timestamp_ms: t * 33, values: vec![0.5; FRAME_DIM] }.encode());
    }
    let mut child = Command::new(env!("CARGO_BIN_EXE_surya"))
        .args(["serve", "--model", "model/model.snkm", "--stdio"])
        .current_dir(d)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&input).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let mut bytes = out.stdout.as_slice();
    let mut replies = Vec::new();
    while let Some(m) = read_message(&mut bytes).unwrap() {
        replies.push(m);
    }
    assert!(matches!(&replies[0], Message::HelloAck { classes } if classes.len() == 8));
    let predictions = replies.iter().filter(|m| matches!(m, Message::Prediction { .. })).count();
    assert_eq!(predictions, 3);
}

#[test]
fn exit_codes() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| surya(args, d).status.code();

    // Usage.
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["--version"]), Some(0));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["gen-synthetic", "--out", "x", "--bogus"]), Some(1));
    assert_eq!(code(&["gen-synthetic", "--out", "x", "--per-class", "many"]), Some(1));
    assert_eq!(code(&["gen-synthetic", "--out", "x", "--per-class", "0"]), Some(1));
    assert_eq!(code(&["serve", "--model", "m.snkm"]), Some(1));

    // Data and format errors, naming the file.
    let missing = surya(&["train", "--data", "nowhere", "--epochs", "1"], d);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("nowhere"));
    fs::write(d.join("junk.snkm"), b"not a model").unwrap();
    let junk = surya(&["inspect-model", "--model", "junk.snkm"], d);
    assert_eq!(junk.status.code(), Some(2));
    assert!(stderr(&junk).contains("junk.snkm"));

    ok(surya(&["gen-synthetic", "--out", "data", "--per-class", "2", "--seed", "3"], d));
    fs::create_dir(d.join("data/Tadasana")).unwrap();
    let unknown = surya(&["train", "--data", "data", "--epochs", "1"], d);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr(&unknown).contains("Tadasana"));
    fs::remove_dir(d.join("data/Tadasana")).unwrap();

    assert_eq!(code(&["train", "--data", "data", "--epochs", "1", "--test-fraction", "1.5"]), Some(1));

    // Runtime: an absurd learning rate blows the weights up.
    let diverged = surya(&["train", "--data", "data", "--out", "d.snkm", "--epochs", "5", "--lr", "1e30"], d);
    assert_eq!(diverged.status.code(), Some(3), "{}", stderr(&diverged));
    assert!(stderr(&diverged).contains("diverged at epoch"));
}
