use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fct"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_run(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--dataset",
        "sea",
        "--noise",
        "0.10",
        "--energy",
        "0.95",
        "--seed",
        "7",
        "--segments",
        "8,9x2@1500",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    fct(&args)
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let o = small_run(&out, &["--mode", "fct"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(
        lines.next().unwrap(),
        "window_end,windowed_acc,overall_acc,forest_bytes,repo_bytes,winner_source,winner_id"
    );
    assert_eq!(lines.count(), 6);
    let drifts = fs::read_to_string(out.join("drifts.csv")).unwrap();
    assert!(drifts.starts_with("position,true_boundary\n"));
    assert_eq!(drifts.lines().filter(|l| l.ends_with(",1")).count(), 4);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("overall_accuracy:"));
    assert!(summary.contains("tree_node_bytes: 32"));
    assert!(out.join("plotdata.csv").exists());
    assert!(out.join("repo/index.csv").exists());
}

#[test]
fn baseline_mode_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    for out in [&a, &b] {
        assert!(small_run(out, &["--mode", "fct"]).status.success());
    }
    assert!(small_run(&c, &["--mode", "cbdt"]).status.success());
    let read = |p: &Path| fs::read(p.join("metrics.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let baseline = fs::read_to_string(c.join("metrics.csv")).unwrap();
    assert!(baseline
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(4) == Some("0")));
}

#[test]
fn invalid_energy_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path(), &["--energy", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("energy") && err.contains("(0, 1]"), "{err}");
}

#[test]
fn unknown_flag_exits_with_two() {
    let o = fct(&["run", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--bogus"));
}

#[test]
fn bad_values_name_their_key() {
    for (flag, value, key) in [
        ("--delay", "soon", "delay"),
        ("--mode", "meta", "mode"),
        ("--dataset", "spam", "dataset"),
        ("--segments", "8,x", "segments"),
        ("--noise", "1.5", "noise"),
    ] {
        let o = fct(&["run", flag, value]);
        assert_eq!(o.status.code(), Some(2), "{flag}");
        assert!(stderr(&o).contains(key), "{flag}: {}", stderr(&o));
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# small run\ndataset=sea\nsegments=8x1@1200\nmode=cbdt\nout={}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = fct(&["run", "--config", cfg.to_str().unwrap(), "--mode", "fct"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.starts_with("mode: fct\n"));

    fs::write(&cfg, "energy=2\n").unwrap();
    let o = fct(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("energy"));

    let o = fct(&[
        "run",
        "--config",
        dir.path().join("missing.cfg").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_data_file_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fct(&[
        "run",
        "--dataset",
        "file",
        "--file",
        dir.path().join("absent.csv").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("absent.csv"));
}

#[test]
fn file_dataset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let mut text = String::from("a;b;class\n");
    for i in 0..1_500u32 {
        let a = (i * 7919) % 100;
        let b = (i * 104_729) % 100;
        let class = if a + b > 100 { "yes" } else { "no" };
        text.push_str(&format!("{a};{b};{class}\n"));
    }
    fs::write(&csv, text).unwrap();
    let out = dir.path().join("out");
    let o = fct(&[
        "run",
        "--dataset",
        "file",
        "--file",
        csv.to_str().unwrap(),
        "--bits-per-attr",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 3);
}

#[test]
fn sweep_writes_combined_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = fct(&[
        "sweep",
        "--param",
        "energy",
        "--values",
        "0.95,0.4",
        "--segments",
        "8,9x1@1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let combined = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(combined.starts_with("energy,mode,window_end,windowed_acc,overall_acc\n"));
    assert_eq!(combined.lines().count(), 1 + 2 * 2 * 2);
    assert!(out.join("energy_0.4/fct/metrics.csv").exists());

    let o = fct(&["sweep", "--param", "tau", "--values", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("param"));
}
