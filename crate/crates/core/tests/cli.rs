use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsc"))
        .args(args)
        .output()
        .expect("spawn tsc")
}

fn ok(args: &[&str]) -> String {
    let out = tsc(args);
    assert!(
        out.status.success(),
        "tsc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect()
}

#[test]
fn generate_writes_all_companions() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g");
    ok(&[
        "generate",
        "--m",
        "8",
        "--l",
        "2",
        "--d",
        "2",
        "--n",
        "5",
        "--n0",
        "3",
        "--s",
        "2",
        "--seed",
        "4",
        "--out",
        p(&prefix),
    ]);
    let csv = lines(&dir.path().join("g.csv"));
    assert_eq!(csv.len(), 13);
    assert!(csv.iter().all(|l| l.split(',').count() == 8));
    let labels = lines(&dir.path().join("g.labels"));
    assert_eq!(&labels[10..], ["-1", "-1", "-1"]);
    assert!(labels[..10].iter().all(|l| l == "0" || l == "1"));
    let masks = lines(&dir.path().join("g.masks"));
    assert_eq!(masks.len(), 13);
    assert!(masks.iter().all(|l| l.split(',').count() == 2));
    let manifest = fs::read_to_string(dir.path().join("g.manifest")).unwrap();
    assert!(manifest.contains("N0 = 3"));
    assert!(manifest.contains("basis = haar_orthonormal"));
}

#[test]
fn cluster_orthogonal_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("b");
    ok(&[
        "generate",
        "--m",
        "20",
        "--l",
        "2",
        "--d",
        "3",
        "--n",
        "12",
        "--basis",
        "coordinate_blocks",
        "--out",
        p(&prefix),
    ]);
    let labels_out = dir.path().join("pred.labels");
    let stdout = ok(&[
        "cluster",
        p(&dir.path().join("b.csv")),
        "--q",
        "6",
        "--max-clusters",
        "4",
        "--out",
        p(&labels_out),
    ]);
    assert!(stdout.contains("L_hat = 2"), "{stdout}");
    assert!(stdout.contains("smallest eigenvalues:"));
    let pred = lines(&labels_out);
    assert_eq!(pred.len(), 24);
    assert!(pred[..12].iter().all(|l| *l == pred[0]));
    assert!(pred[12..].iter().all(|l| *l == pred[12]));
    assert_ne!(pred[0], pred[12]);

    let again = dir.path().join("again.labels");
    ok(&[
        "cluster",
        p(&dir.path().join("b.csv")),
        "--q",
        "6",
        "--max-clusters",
        "4",
        "--out",
        p(&again),
    ]);
    assert_eq!(fs::read(&labels_out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn cluster_rejects_q_too_large() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    fs::write(&csv, "1,0\n0,1\n1,1\n").unwrap();
    let out = tsc(&[
        "cluster",
        p(&csv),
        "--q",
        "3",
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InvalidQ"));
}

#[test]
fn outlier_flags_file() {
    let dir = tempfile::tempdir().unwrap();
    let ortho = dir.path().join("o.csv");
    let dup = dir.path().join("d.csv");
    let row = |k: usize| {
        (0..20)
            .map(|i| if i == k { "1" } else { "0" })
            .collect::<Vec<_>>()
            .join(",")
    };
    fs::write(&ortho, format!("{}\n{}\n{}\n", row(0), row(1), row(2))).unwrap();
    fs::write(&dup, format!("{}\n{}\n{}\n", row(0), row(0), row(0))).unwrap();
    let flags = dir.path().join("f");
    let stdout = ok(&["outliers", p(&ortho), "--out", p(&flags)]);
    assert!(stdout.contains("outliers = 3"));
    assert_eq!(lines(&flags), ["1", "1", "1"]);
    ok(&["outliers", p(&dup), "--out", p(&flags)]);
    assert_eq!(lines(&flags), ["0", "0", "0"]);
}

const TINY: &str =
    "experiment = vary_d_rho\nm = 20\nL = 3\nd = 2, 3\nrho = 3, 5\ntrials = 2\nseed = 11\n";

#[test]
fn experiment_grid_shape_and_repeatability() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.cfg");
    fs::write(&cfg, TINY).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["experiment", "--config", p(&cfg), "--out", p(&a)]);
    ok(&["experiment", "--config", p(&cfg), "--out", p(&b)]);
    let csv = lines(&dir.path().join("a.csv"));
    assert_eq!(csv[0], "axis1,axis2,trial,ce,fde,el,l_hat,sdp,max_aff");
    assert_eq!(csv.len(), 1 + 2 * 2 * 2);
    assert_eq!(lines(&dir.path().join("a_ce.dat")).len(), 4);
    for ext in [".csv", "_ce.dat", "_fde.dat", "_el.dat"] {
        let fa = fs::read(format!("{}{ext}", p(&a))).unwrap();
        let fb = fs::read(format!("{}{ext}", p(&b))).unwrap();
        assert_eq!(fa, fb, "{ext} differs between runs");
    }
}

#[test]
fn erasure_experiment_writes_one_set_per_s() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("e.cfg");
    fs::write(
        &cfg,
        "experiment = erasures\nm = 20\nL = 2\nd = 3\nrho = 4\ntrials = 1\n",
    )
    .unwrap();
    let out = dir.path().join("e");
    ok(&["experiment", "--config", p(&cfg), "--out", p(&out)]);
    for s in [0, 5, 10, 15] {
        assert!(dir.path().join(format!("e_s{s}_ce.dat")).exists());
        assert!(dir.path().join(format!("e_s{s}.csv")).exists());
    }
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "experiment = vary_d_rho\nwidth = 3\n").unwrap();
    let out = tsc(&[
        "experiment",
        "--config",
        p(&cfg),
        "--out",
        p(&dir.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
