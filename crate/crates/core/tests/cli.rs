use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phrase_tts::acoustic::{read_mel, read_weights};

const BIN: &str = env!("CARGO_BIN_EXE_phrase-tts");

const SEPARABLE_CORPUS: &str = "\
我们\tr\t2\t0\tO
今天\tt\t2\t1\tL3
去\tv\t1\t0\tO
学校\tn\t2\t1\tL3

老师\tn\t2\t1\tL3
很\td\t1\t0\tO
高兴\ta\t2\t1\tL3

天气\tn\t2\t0\tO
好\ta\t1\t1\tL3
";

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("PPSPEECH_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn trained_crf(dir: &Path) -> String {
    fs::write(dir.join("corpus.tsv"), SEPARABLE_CORPUS).unwrap();
    let o = run(&["train-crf", "--corpus", "corpus.tsv", "--out", "crf.bin", "--epochs", "60"], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    "crf.bin".into()
}

#[test]
fn train_crf_reports_perfect_f1_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("corpus.tsv"), SEPARABLE_CORPUS).unwrap();
    let args = ["train-crf", "--corpus", "corpus.tsv", "--out", "a.bin", "--epochs", "60"];
    let o = run(&args, dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("f1=1.0000"), "{text}");
    assert!(text.contains("final_nll="));
    let mut again = args;
    again[4] = "b.bin";
    assert!(run(&again, dir.path()).status.success());
    assert_eq!(fs::read(dir.path().join("a.bin")).unwrap(), fs::read(dir.path().join("b.bin")).unwrap());
}

#[test]
fn train_crf_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("empty.tsv"), "").unwrap();
    let o = run(&["train-crf", "--corpus", "empty.tsv", "--out", "m.bin"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    fs::write(p.join("bad.tsv"), "我们\tr\ttwo\t0\tO\n").unwrap();
    let o = run(&["train-crf", "--corpus", "bad.tsv", "--out", "m.bin"], p);
    assert_eq!(o.status.code(), Some(2));

    fs::write(p.join("corpus.tsv"), SEPARABLE_CORPUS).unwrap();
    let o = run(&["train-crf", "--corpus", "corpus.tsv", "--out", "m.bin", "--step", "1e300"], p);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn segment_output_format() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let crf = trained_crf(p);
    fs::write(p.join("one.txt"), "学校\n").unwrap();
    let o = run(&["segment", "one.txt", "--crf", &crf], p);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "学校\n");

    fs::write(p.join("two.txt"), "我们今天，去学校。\n").unwrap();
    let o = run(&["segment", "two.txt", "--crf", &crf], p);
    assert_eq!(stdout(&o), "我们 今天 |L3|\n去 学校\n");

    fs::write(p.join("bad.txt"), "我们X\n").unwrap();
    let o = run(&["segment", "bad.txt", "--crf", &crf], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot segment"));
}

#[test]
fn init_weights_is_seeded_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for (name, seed) in [("a.bin", "4"), ("b.bin", "4"), ("c.bin", "5")] {
        let o = run(&["init-weights", "--out", name, "--seed", seed], p);
        assert!(o.status.success());
        assert!(stdout(&o).starts_with("tensors="));
    }
    let a = fs::read(p.join("a.bin")).unwrap();
    assert_eq!(a, fs::read(p.join("b.bin")).unwrap());
    assert_ne!(a, fs::read(p.join("c.bin")).unwrap());
    read_weights(a.as_slice()).unwrap();

    let o = Command::new(BIN)
        .args(["init-weights", "--out", "env.bin"])
        .env("PPSPEECH_SEED", "4")
        .current_dir(p)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(a, fs::read(p.join("env.bin")).unwrap());
}

#[test]
fn synth_writes_mels_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let crf = trained_crf(p);
    assert!(run(&["init-weights", "--out", "w.bin", "--seed", "2"], p).status.success());
    fs::write(p.join("in.txt"), "我们今天，去学校。\n天气好\n").unwrap();
    let synth = |out: &str, workers: &str, mode: &str| {
        let o = run(
            &[
                "synth", "in.txt", "--out", out, "--crf", &crf, "--weights", "w.bin", "--workers", workers,
                "--mode", mode, "--max-frames", "6", "--stop-threshold", "1.0",
            ],
            p,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    synth("w1", "1", "parallel");
    synth("w8", "8", "parallel");
    synth("seq", "1", "sequential");
    synth("base", "1", "ar-baseline");
    for i in 0..2 {
        let f = format!("sentence_{i:04}.mel");
        let one = fs::read(p.join("w1").join(&f)).unwrap();
        assert_eq!(one, fs::read(p.join("w8").join(&f)).unwrap());
        assert_eq!(one, fs::read(p.join("seq").join(&f)).unwrap());
    }
    let mel = read_mel(fs::read(p.join("w1/sentence_0000.mel")).unwrap().as_slice()).unwrap();
    assert_eq!(mel.frames().shape(), [12, 80]);
    let base = read_mel(fs::read(p.join("base/sentence_0000.mel")).unwrap().as_slice()).unwrap();
    assert_eq!(base.frames().shape(), [6, 80]);

    let manifest = fs::read_to_string(p.join("w1/manifest.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = manifest.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["phrases"], 2);
    assert_eq!(lines[0]["frames"], 12);
    assert_eq!(lines[0]["stop_reasons"][0], "frame_limit");
    assert!(lines[1]["elapsed_ms"].as_f64().unwrap() > 0.0);
}

#[test]
fn bench_writes_one_row_per_group_and_mode() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = run(
        &["bench", "--groups", "1,2", "--out", "bench.csv", "--repeats", "1", "--frames-per-phoneme", "1"],
        p,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(p.join("bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "phrase_count,mode,mean_ms,std_ms,speedup");
    assert_eq!(lines.len(), 5);
    assert!(stdout(&o).contains("speedup"));
}

#[test]
fn missing_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["segment", "nope.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
