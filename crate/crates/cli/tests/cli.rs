use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcm-stance"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert!(
        out.status.success(),
        "`{}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// Small synthetic corpus taken through prep and label.
fn labeled_corpus(dir: &Path) -> PathBuf {
    let p = |n: &str| path(dir, n);
    ok(&[
        "synth",
        "--out-dir",
        &p("s"),
        "--users-pos",
        "30",
        "--users-neg",
        "8",
    ]);
    ok(&[
        "prep",
        "--tweets",
        &p("s/tweets.jsonl"),
        "--out",
        &p("docs.jsonl"),
    ]);
    ok(&[
        "label",
        "--documents",
        &p("docs.jsonl"),
        "--users",
        &p("s/users.jsonl"),
        "--out",
        &p("labeled.jsonl"),
        "--unlabeled",
        &p("unlabeled.jsonl"),
    ]);
    dir.join("labeled.jsonl")
}

#[test]
fn synth_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "synth",
        "--out-dir",
        &path(dir.path(), "s"),
        "--users-pos",
        "3",
        "--users-neg",
        "2",
    ]);
    for f in ["tweets.jsonl", "users.jsonl", "gold.tsv"] {
        assert!(
            !fs::read_to_string(dir.path().join("s").join(f))
                .unwrap()
                .is_empty(),
            "{f}"
        );
    }
}

#[test]
fn cv_writes_metrics_csv() {
    let dir = tempfile::tempdir().unwrap();
    let labeled = labeled_corpus(dir.path());
    let out = ok(&[
        "cv",
        "--labeled",
        labeled.to_str().unwrap(),
        "--out",
        &path(dir.path(), "cv.csv"),
        "--print",
    ]);
    let csv = fs::read_to_string(dir.path().join("cv.csv")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), csv);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "axis_value,class,precision,recall,f1,micro_f1,macro_f1"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with(",total,"));
    let cell = lines[1].split(',').nth(2).unwrap();
    assert_eq!(
        cell.split('.').nth(1).unwrap().len(),
        4,
        "four decimals: {cell}"
    );
}

#[test]
fn wi_sweep_has_ten_points_and_a_chart() {
    let dir = tempfile::tempdir().unwrap();
    let labeled = labeled_corpus(dir.path());
    let csv_path = path(dir.path(), "wi.csv");
    ok(&[
        "--folds",
        "3",
        "sweep",
        "--labeled",
        labeled.to_str().unwrap(),
        "--axis",
        "wi",
        "--values",
        "0.1..1.0:0.1",
        "--out",
        &csv_path,
    ]);
    let csv = fs::read_to_string(&csv_path).unwrap();
    let points: std::collections::BTreeSet<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(points.len(), 10);
    assert!(points.contains("0.3") && points.contains("1"));
    let svg = fs::read_to_string(dir.path().join("wi.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn train_predict_adjust_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| path(dir.path(), n);
    let labeled = labeled_corpus(dir.path());
    ok(&[
        "--k",
        "200",
        "train",
        "--labeled",
        labeled.to_str().unwrap(),
        "--model",
        &p("model.txt"),
        "--features",
        &p("features.tsv"),
    ]);
    assert_eq!(
        fs::read_to_string(dir.path().join("features.tsv"))
            .unwrap()
            .lines()
            .count(),
        200
    );
    ok(&[
        "predict",
        "--model",
        &p("model.txt"),
        "--features",
        &p("features.tsv"),
        "--documents",
        labeled.to_str().unwrap(),
        "--out",
        &p("pred.tsv"),
    ]);
    ok(&[
        "adjust",
        "--predictions",
        &p("pred.tsv"),
        "--out",
        &p("adj.tsv"),
        "--metrics",
        &p("adj.csv"),
    ]);
    let metrics = fs::read_to_string(dir.path().join("adj.csv")).unwrap();
    assert!(metrics.contains("\nbefore,total,") && metrics.contains("\nafter,total,"));
    ok(&[
        "report-timeseries",
        "--predictions",
        &p("adj.tsv"),
        "--out",
        &p("ts.csv"),
    ]);

    let n_predictions = fs::read_to_string(dir.path().join("adj.tsv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    let ts = fs::read_to_string(dir.path().join("ts.csv")).unwrap();
    let total: usize = ts
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            cols[1].parse::<usize>().unwrap() + cols[2].parse::<usize>().unwrap()
        })
        .sum();
    assert_eq!(total, n_predictions);
    assert!(dir.path().join("ts.svg").exists());

    let out = ok(&[
        "report-keywords",
        "--features",
        &p("features.tsv"),
        "--out",
        &p("kw.csv"),
        "--top-n",
        "5",
    ]);
    assert!(out.stdout.is_empty(), "stdout stays empty without --print");
    let kw = fs::read_to_string(dir.path().join("kw.csv")).unwrap();
    assert!(kw.lines().count() <= 11);
}

#[test]
fn predicting_with_foreign_features_fails() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| path(dir.path(), n);
    let labeled = labeled_corpus(dir.path());
    let l = labeled.to_str().unwrap();
    ok(&[
        "--k",
        "50",
        "train",
        "--labeled",
        l,
        "--model",
        &p("m.txt"),
        "--features",
        &p("f50.tsv"),
    ]);
    ok(&[
        "--k",
        "60",
        "train",
        "--labeled",
        l,
        "--model",
        &p("m60.txt"),
        "--features",
        &p("f60.tsv"),
    ]);
    let out = cli(&[
        "predict",
        "--model",
        &p("m.txt"),
        "--features",
        &p("f60.tsv"),
        "--documents",
        l,
        "--out",
        &p("x.tsv"),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| path(dir.path(), n);
    let labeled = labeled_corpus(dir.path());
    fs::write(
        dir.path().join("run.conf"),
        "# small model\nk = 40\nwi = 0.5\n",
    )
    .unwrap();
    let l = labeled.to_str().unwrap();
    ok(&[
        "--config",
        &p("run.conf"),
        "train",
        "--labeled",
        l,
        "--model",
        &p("a.txt"),
        "--features",
        &p("a.tsv"),
    ]);
    assert_eq!(
        fs::read_to_string(dir.path().join("a.tsv"))
            .unwrap()
            .lines()
            .count(),
        40
    );
    assert!(fs::read_to_string(dir.path().join("a.txt"))
        .unwrap()
        .contains("\nwi 0.5\n"));
    ok(&[
        "--config",
        &p("run.conf"),
        "--k",
        "30",
        "train",
        "--labeled",
        l,
        "--model",
        &p("b.txt"),
        "--features",
        &p("b.tsv"),
    ]);
    assert_eq!(
        fs::read_to_string(dir.path().join("b.tsv"))
            .unwrap()
            .lines()
            .count(),
        30
    );

    fs::write(dir.path().join("bad.conf"), "colour = blue\n").unwrap();
    let out = cli(&[
        "--config",
        &p("bad.conf"),
        "cv",
        "--labeled",
        l,
        "--out",
        &p("x.csv"),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["cv", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(
        cli(&[
            "sweep",
            "--labeled",
            "x",
            "--axis",
            "depth",
            "--values",
            "1",
            "--out",
            "y"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        cli(&[
            "sweep",
            "--labeled",
            "x",
            "--axis",
            "wi",
            "--values",
            "1..0:1",
            "--out",
            "y"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn failures_print_one_line_and_exit_with_one() {
    let out = cli(&[
        "cv",
        "--labeled",
        "/definitely/missing.jsonl",
        "--out",
        "/tmp/never.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "{stderr}");
    assert!(stderr.contains("missing.jsonl"));
}
