use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn swarmsearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmsearch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = swarmsearch(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn fails_mentioning(args: &[&str], needle: &str) {
    let out = swarmsearch(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(needle), "stderr of {args:?} lacks {needle:?}: {err}");
}

fn dir_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn read_csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn train_zero_episodes_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["train", "--episodes", "0", "--out-dir", dir_str(dir.path())]);
    let text = fs::read_to_string(dir.path().join("metrics_run0.csv")).unwrap();
    assert_eq!(
        text,
        "run_id,seed,episode,team_reward,length,targets_detected,crashes,wall_ms\n"
    );
}

#[test]
fn eval_random_on_defaults_is_negative() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["eval", "--policy", "random", "--episodes", "500", "--seed", "3", "--out-dir", dir_str(dir.path())]);
    let rows = read_csv_rows(&dir.path().join("eval_random.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "policy");
    assert_eq!(rows[1][0], "random");
    let mean: f64 = rows[1][3].parse().unwrap();
    assert!(mean < 0.0, "mean {mean}");
    assert_eq!(rows[1][1], "500");
    let episodes = read_csv_rows(&dir.path().join("eval_random_episodes.csv"));
    assert_eq!(episodes.len(), 501);
}

#[test]
fn sweep_team_size_has_one_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "sweep",
        "--kind",
        "team-size",
        "--sizes",
        "2,3,4,5,6",
        "--episodes",
        "2",
        "--eval-episodes",
        "4",
        "--horizon",
        "60",
        "--out-dir",
        dir_str(dir.path()),
    ]);
    let rows = read_csv_rows(&dir.path().join("sweep_team-size.csv"));
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].last().unwrap(), "r2");
    let values: Vec<&str> = rows[1..].iter().map(|r| r[1].as_str()).collect();
    assert_eq!(values, ["2", "3", "4", "5", "6"]);
}

#[test]
fn sweep_target_count_reports_fit() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "sweep",
        "--kind",
        "target-count",
        "--counts",
        "2,4",
        "--episodes",
        "1",
        "--eval-episodes",
        "3",
        "--horizon",
        "40",
        "--out-dir",
        dir_str(dir.path()),
    ]);
    let rows = read_csv_rows(&dir.path().join("sweep_target-count.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[1][10].parse::<f64>().is_ok());
}

fn small_training(out: &Path, extra: &[&str]) {
    let mut args = vec![
        "train",
        "--episodes",
        "6",
        "--runs",
        "2",
        "--checkpoint-every",
        "3",
        "--horizon",
        "120",
        "--seed",
        "11",
        "--out-dir",
        dir_str(out),
    ];
    args.extend_from_slice(extra);
    ok(&args);
}

fn assert_same_files(a: &Path, b: &Path, names: &[&str]) {
    for name in names {
        let x = fs::read(a.join(name)).unwrap();
        let y = fs::read(b.join(name)).unwrap();
        assert!(x == y, "{name} differs between repeated runs");
    }
}

#[test]
fn every_command_is_bit_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_training(a.path(), &[]);
    small_training(b.path(), &["--threads", "1"]);
    assert_same_files(
        a.path(),
        b.path(),
        &[
            "metrics_run0.csv",
            "metrics_run1.csv",
            "aggregate.csv",
            "checkpoints/run0_ep3.ckpt",
            "checkpoints/run1_final.ckpt",
        ],
    );

    for dir in [a.path(), b.path()] {
        let ck = dir.join("checkpoints/run0_final.ckpt");
        let common = [
            "--checkpoint",
            ck.to_str().unwrap(),
            "--horizon",
            "120",
            "--seed",
            "5",
            "--out-dir",
            dir_str(dir),
        ];
        let mut eval = vec!["eval", "--policy", "learned", "--eval-episodes", "20"];
        eval.extend_from_slice(&common);
        ok(&eval);
        let mut replay = vec!["replay"];
        replay.extend_from_slice(&common);
        ok(&replay);
        ok(&[
            "sweep",
            "--kind",
            "team-size",
            "--sizes",
            "2,3",
            "--episodes",
            "2",
            "--eval-episodes",
            "5",
            "--horizon",
            "60",
            "--out-dir",
            dir_str(dir),
        ]);
    }
    assert_same_files(
        a.path(),
        b.path(),
        &[
            "eval_learned.csv",
            "eval_learned_episodes.csv",
            "replay.csv",
            "sweep_team-size.csv",
        ],
    );
}

#[test]
fn runs_use_distinct_seeds() {
    let dir = tempfile::tempdir().unwrap();
    small_training(dir.path(), &[]);
    let r0 = read_csv_rows(&dir.path().join("metrics_run0.csv"));
    let r1 = read_csv_rows(&dir.path().join("metrics_run1.csv"));
    assert_eq!(r0.len(), 7);
    assert_ne!(r0[1][1], r1[1][1]);
    assert_eq!(r1[1][0], "1");
    let episodes: Vec<usize> = r0[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(episodes, [0, 1, 2, 3, 4, 5]);
    assert!(r0[1..].iter().all(|r| r[7] == "0"), "wall_ms must be 0 without timing");
    let agg = read_csv_rows(&dir.path().join("aggregate.csv"));
    assert_eq!(agg.len(), 7);
    assert_eq!(agg[1][1], "2");
}

#[test]
fn flag_beats_file_beats_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test config\nseed = 3\neval_episodes = 7\n").unwrap();
    ok(&[
        "eval",
        "--policy",
        "random",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "7",
        "--out-dir",
        dir_str(dir.path()),
    ]);
    let rows = read_csv_rows(&dir.path().join("eval_random.csv"));
    assert_eq!(rows[1][1], "7", "episodes from file");
    assert_eq!(rows[1][2], "7", "seed from flag");
}

#[test]
fn eval_episodes_flag_alias() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["eval", "--policy", "collision-free", "--episodes", "12", "--out-dir", dir_str(dir.path())]);
    let rows = read_csv_rows(&dir.path().join("eval_collision-free.csv"));
    assert_eq!(rows[1][1], "12");
}

#[test]
fn environment_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "eval_episodes = 7\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_swarmsearch"))
        .args(["eval", "--policy", "random", "--config", cfg.to_str().unwrap(), "--out-dir", dir_str(dir.path())])
        .env("SWARMSEARCH_EVAL_EPISODES", "9")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv_rows(&dir.path().join("eval_random.csv"));
    assert_eq!(rows[1][1], "9");
}

#[test]
fn errors_go_to_stderr_with_nonzero_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir_str(dir.path());
    fails_mentioning(&["train", "--gamma", "1.5", "--out-dir", out], "gamma");
    fails_mentioning(&["train", "--batch-size", "0", "--out-dir", out], "batch_size");
    fails_mentioning(&["eval", "--policy", "learned", "--out-dir", out], "checkpoint");
    fails_mentioning(&["eval", "--policy", "random", "--config", "/no/such/file.cfg"], "file.cfg");
    fails_mentioning(&["eval", "--policy", "random", "--episodes", "0", "--out-dir", out], "episode");
    fails_mentioning(&["sweep", "--kind", "team-size", "--counts", "2"], "--counts");

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "seed: 3\n").unwrap();
    fails_mentioning(&["train", "--config", bad.to_str().unwrap()], "line 1");
    fs::write(&bad, "colour = blue\n").unwrap();
    fails_mentioning(&["train", "--config", bad.to_str().unwrap()], "colour");

    let garbage = dir.path().join("garbage.ckpt");
    fs::write(&garbage, b"not a checkpoint").unwrap();
    fails_mentioning(
        &["replay", "--checkpoint", garbage.to_str().unwrap(), "--out-dir", out],
        "magic",
    );
}
