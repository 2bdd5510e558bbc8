use std::path::Path;
use std::process::{Command, Output};

fn segclust(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segclust"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

const FIG1: &[&str] = &[
    "--num-dims",
    "2",
    "--num-clusters",
    "4",
    "--num-points",
    "200",
    "--direction",
    "1,1",
    "--angle-disp",
    "0.19634954",
    "--cluster-sep",
    "10,10",
    "--llength",
    "10",
    "--llength-disp",
    "1.5",
    "--lateral-disp",
    "1",
];

fn gen(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["gen"];
    args.extend_from_slice(FIG1);
    args.extend_from_slice(extra);
    segclust(&args, dir)
}

#[test]
fn gen_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = gen(dir.path(), &["--seed", "9", "-o", "a.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2,cluster");
    assert_eq!(lines.len(), 201);
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        assert!(gen(dir.path(), &["--seed", "5", "--proj-dist-fn", "unif", "-o", name])
            .status
            .success());
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "num_dims = 2\nnum_clusters = 3\nnum_points = 50\ndirection = [1, 0]\nangle_disp = 0.1\n\
               cluster_sep = [5, 5]\nllength = 4\nllength_disp = 0.5\nlateral_disp = 0.5\noutput = x.csv\n";
    std::fs::write(dir.path().join("run.cfg"), cfg).unwrap();
    let out = segclust(&["gen", "--config", "run.cfg", "--num-points", "80"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    assert_eq!(text.lines().count(), 81);
}

#[test]
fn validation_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = gen(dir.path(), &["--num-clusters", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let mut args = vec!["batch"];
    args.extend_from_slice(FIG1);
    args.extend_from_slice(&["--sweep-param", "lateral_disp", "--sweep-values", "1,-1", "-o", "runs"]);
    assert_eq!(segclust(&args, dir.path()).status.code(), Some(2));
    let out = gen(dir.path(), &["--proj-dist-fn", "cauchy"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("proj-dist-fn"));
}

#[test]
fn io_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = gen(dir.path(), &["-o", "missing/dir/a.csv"]);
    assert_eq!(out.status.code(), Some(3));
    let out = segclust(&["gen", "--config", "nope.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn batch_sweep_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["batch"];
    args.extend_from_slice(FIG1);
    args.extend_from_slice(&[
        "--seeds",
        "1..3",
        "--sweep-param",
        "llength",
        "--sweep-values",
        "0,6",
        "-o",
        "runs",
    ]);
    let out = segclust(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = dir.path().join("runs");
    let files = std::fs::read_dir(&runs).unwrap().count();
    assert_eq!(files, 7);
    let manifest = std::fs::read_to_string(runs.join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 7);
    assert!(runs.join("seed2_llength6.csv").exists());
}

#[test]
fn batch_partial_failure_is_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["batch"];
    args.extend_from_slice(FIG1);
    args.extend_from_slice(&["--seeds", "1..3", "-o", "runs"]);
    // a directory where a cell's file should go makes that cell fail
    std::fs::create_dir_all(dir.path().join("runs/seed2.csv")).unwrap();
    let out = segclust(&args, dir.path());
    assert!(!out.status.success());
    let manifest = std::fs::read_to_string(dir.path().join("runs/manifest.csv")).unwrap();
    assert_eq!(manifest.matches(",failed,").count(), 1);
    assert_eq!(manifest.matches(",ok,").count(), 2);
    assert!(dir.path().join("runs/seed3.csv").is_file());
}

#[test]
fn merge_relabels() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gen(dir.path(), &["--seed", "1", "-o", "a.csv"]).status.success());
    assert!(gen(dir.path(), &["--seed", "2", "-o", "b.json"]).status.success());
    let out = segclust(&["merge", "a.csv", "b.json", "-o", "m.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(text.lines().count(), 401);
    let mut labels: Vec<u32> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    labels.sort();
    labels.dedup();
    assert_eq!(labels, (1..=8).collect::<Vec<_>>());
}

#[test]
fn eval_experiment_and_external_score() {
    let dir = tempfile::tempdir().unwrap();
    let out = segclust(
        &[
            "eval",
            "--llength-values",
            "0,18",
            "--seeds",
            "1,2",
            "--points",
            "200",
            "-o",
            "r.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "llength,seed,h,c,v,iterations");
    assert_eq!(lines.len(), 5);

    assert!(gen(dir.path(), &["--seed", "1", "-o", "d.csv"]).status.success());
    let data = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let labels: String = data
        .lines()
        .skip(1)
        .map(|l| format!("{}\n", l.rsplit(',').next().unwrap()))
        .collect();
    std::fs::write(dir.path().join("assign.txt"), labels).unwrap();
    let out = segclust(
        &["eval", "--dataset", "d.csv", "--assignments", "assign.txt"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().nth(1), Some("1,1,1"));
}
