use std::path::Path;
use std::process::{Command, Output};

fn sigmabench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigmabench"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

const SMALL: &str = "dataset = synth\nsynth.kind = two_gaussians\nsynth.n = 60\nseed = 1\n\
[model]\nkind = grnn\nsigma = 0.5\n[model]\nkind = svm_linear\n";

#[test]
fn bench_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    let out = sigmabench(&["bench", "--config", "run.cfg", "--seed", "42"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model\taccuracy\tprecision\trecall\tf1");
    assert!(lines[1].starts_with("GRNN\t") && lines[2].starts_with("SVM-linear\t"));
    // Four decimals per metric.
    assert!(lines[1]
        .split('\t')
        .skip(1)
        .all(|v| v.split('.').nth(1).map(str::len) == Some(4)));

    let md = sigmabench(&["bench", "--config", "run.cfg", "--format", "markdown"], dir.path());
    assert!(String::from_utf8(md.stdout)
        .unwrap()
        .starts_with("| model | accuracy |"));
}

#[test]
fn bench_writes_manifest_next_to_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    let out = sigmabench(&["bench", "--config", "run.cfg", "--out", "t.tsv"], dir.path());
    assert!(out.status.success());
    let manifest = std::fs::read_to_string(dir.path().join("t.tsv.manifest")).unwrap();
    assert!(manifest.contains("kind = grnn") && manifest.contains("sigma = 0.5"));
    assert!(manifest.contains("test_reads_during_training = 0"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = sigmabench(&["bench", "--config", "missing.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.cfg"));

    std::fs::write(dir.path().join("bad.cfg"), "[model]\nkind = perceptron\n").unwrap();
    let out = sigmabench(&["bench", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model[0].kind"));

    std::fs::write(dir.path().join("empty.cfg"), "seed = 3\n").unwrap();
    let out = sigmabench(&["bench", "--config", "empty.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = sigmabench(&["bench"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // Every target is negative, so the SVM sees a single class.
    std::fs::write(dir.path().join("d.csv"), "0,0,0.1\n1,1,0\n2,2,0\n3,3,0\n4,4,0\n5,5,0\n").unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "dataset = csv\ncsv.path = d.csv\nsplit.train_fraction = 0.5\n[model]\nkind = svm_linear\n",
    )
    .unwrap();
    let out = sigmabench(&["bench", "--config", "run.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SVM-linear"));
}

#[test]
fn gradcheck_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = sigmabench(&["gradcheck", "--seeds", "10"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap().matches("PASS").count(), 4);
    let bad = sigmabench(&["gradcheck", "--seeds", "10", "--inject-fault"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8(bad.stdout).unwrap().contains("FAIL"));
}

#[test]
fn synth_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = sigmabench(&["synth", "--kind", "ring", "--n", "12", "--seed", "3"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().all(|l| l.split(',').count() == 3));
    let out = sigmabench(&["synth", "--kind", "spiral"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_and_evolve() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    let out = sigmabench(&["sweep", "--config", "run.cfg", "--points", "12"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("sigma*_f1 = ") && text.contains("coincide = "));
    assert!(text.contains("sigma\tf1\taccuracy"));

    let out = sigmabench(&["sweep", "--config", "run.cfg", "--points", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = sigmabench(
        &[
            "evolve",
            "--config",
            "run.cfg",
            "--generations",
            "15",
            "--metric",
            "accuracy",
            "--out",
            "trace.tsv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("best_accuracy = "));
    let trace = std::fs::read_to_string(dir.path().join("trace.tsv")).unwrap();
    assert!(trace.lines().count() > 15);
}
