//! End-to-end coverage of the `ose` command-line surface and its file
//! formats.

use std::path::PathBuf;
use std::process::{Command, Output};

use sparse_ose::matrix::SparseColMatrix;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ose"))
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ose-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn sketch_sample_writes_matrix_text() {
    let dir = tmpdir("sample");
    let spec = dir.join("spec.txt");
    let out = dir.join("sketch.txt");
    std::fs::write(&spec, "family=osnap\nm=16\nn=32\ns=3\nseed=5\n").unwrap();
    let run = bin()
        .args(["sketch", "sample", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(run.status.success());

    let matrix = SparseColMatrix::from_text(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(matrix.rows(), 16);
    assert_eq!(matrix.cols(), 32);
    assert_eq!(matrix.nnz(), 96);
    // Same spec, same bytes.
    let out2 = dir.join("sketch2.txt");
    bin()
        .args(["sketch", "sample", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&out2)
        .output()
        .unwrap();
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(&out2).unwrap()
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn audit_finds_pairs_in_written_hadamard_sketch() {
    let dir = tmpdir("audit");
    let spec = dir.join("spec.txt");
    let sketch = dir.join("sketch.txt");
    std::fs::write(&spec, "family=hadamard_block\neps=0.03125\nn=4096\nd_block=2\n").unwrap();
    assert!(bin()
        .args(["sketch", "sample", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&sketch)
        .output()
        .unwrap()
        .status
        .success());

    let mut hits = 0;
    for seed in 0..10 {
        let run = bin()
            .args(["audit", "--sketch"])
            .arg(&sketch)
            .args(["--eps", "0.03125", "--seed", &seed.to_string(), "--d", "4"])
            .output()
            .unwrap();
        assert!(run.status.success(), "audit exited nonzero");
        let text = stdout(&run);
        assert!(text.contains("theta: 0.25"));
        if text.contains("verdict: pair found") || text.contains("verdict: collision") {
            hits += 1;
        }
    }
    assert!(hits >= 3, "expected several heavy-pair verdicts, got {hits}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sweep_then_replay_reproduces_a_failure() {
    let dir = tmpdir("replay");
    let config = dir.join("sweep.cfg");
    std::fs::write(
        &config,
        "family=count_sketch\nn=1024\nd=4\neps=0.125\nm_grid=16,64\ninstance=hard_beta:1\ntrials=50\nseed=21\n",
    )
    .unwrap();
    let out_dir = dir.join("out");
    let run = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(run.status.success());
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let records = sparse_ose::harness::report::records_from_csv(&csv).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records[0].failures > 0, "small m should fail sometimes");
    assert!(out_dir.join("sweep.svg").exists());

    // Replay each trial of the first grid point and recount its failures.
    let mut failures = 0;
    for t in 0..50u64 {
        let run = bin()
            .args(["replay", "--config"])
            .arg(&config)
            .args(["--trial", &t.to_string()])
            .output()
            .unwrap();
        assert!(run.status.success());
        if stdout(&run).contains("verdict=failure") {
            failures += 1;
        }
    }
    assert_eq!(failures, records[0].failures);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn min_m_identity_stub_and_verify_lemmas() {
    let run = bin()
        .args([
            "min-m",
            "--family",
            "identity_stub",
            "--n",
            "64",
            "--d",
            "4",
            "--eps",
            "0.125",
            "--delta",
            "0.1",
            "--instance",
            "hard_mixture",
            // 40 trials make the zero-failure Wilson bound clear the CI
            // guard ci_high <= 1.5 * delta.
            "--trials",
            "40",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert!(run.status.success());
    assert!(stdout(&run).contains("m_star = 4"));

    let run = bin()
        .args(["verify-lemmas", "--seed", "7", "--families", "40", "--max-size", "10"])
        .output()
        .unwrap();
    assert!(run.status.success(), "lemma batteries must pass");
    let text = stdout(&run);
    assert!(text.contains("good-inner-product lemma"));
    assert!(text.contains("great collision (exhaustive)"));
}

#[test]
fn usage_errors_exit_with_code_2() {
    // Unknown flag.
    let run = bin().args(["sweep", "--bogus"]).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
    // Missing file.
    let run = bin()
        .args(["sweep", "--config", "/nonexistent.cfg", "--out-dir", "/tmp/x"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
    // Invalid config contents.
    let dir = tmpdir("badcfg");
    let config = dir.join("bad.cfg");
    std::fs::write(&config, "family=count_sketch\nn=64\nd=4\neps=0.9\nm_grid=8,16\ninstance=hard_mixture\ntrials=5\n").unwrap();
    let run = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--out-dir"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}
