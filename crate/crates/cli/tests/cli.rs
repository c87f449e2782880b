use std::path::Path;
use std::process::{Command, Output};

fn wignerlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wignerlab")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// The single `out/<experiment>/<hash>` directory written by a run.
fn run_dir(out: &Path, exp: &str) -> std::path::PathBuf {
    let mut dirs: Vec<_> = std::fs::read_dir(out.join(exp)).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1);
    dirs.pop().unwrap()
}

#[test]
fn list_has_nine_experiments() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wignerlab(&["list"], tmp.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 9);
}

#[test]
fn describe_mentions_key_phrases() {
    let tmp = tempfile::tempdir().unwrap();
    let g = stdout(&wignerlab(&["describe", "gaussianity"], tmp.path()));
    assert!(g.contains("Gaussianity of bulk eigenvectors"));
    assert!(g.contains("sampling.samples = 400"));
    let a = stdout(&wignerlab(&["describe", "advection"], tmp.path()));
    assert!(a.contains("characteristic map"));
    let bad = wignerlab(&["describe", "nope"], tmp.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unknown_key_and_bad_value_are_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wignerlab(&["run", "kernel-demo", "no.such=1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no.such"));
    let o = wignerlab(&["run", "kernel-demo", "kernel.nodes=many"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn same_seed_gives_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["run", "local-laws", "--seed", "42", "model.n=120", "sampling.samples=3", "bulk.indices=6"];
    let a = wignerlab(&[&args[..], &["--out", "a"]].concat(), tmp.path());
    let b = wignerlab(&[&args[..], &["--out", "b", "--workers", "1"]].concat(), tmp.path());
    assert_eq!(a.status.code(), b.status.code());
    assert_ne!(a.status.code(), Some(2), "{}", String::from_utf8_lossy(&a.stderr));
    let (da, db) = (run_dir(&tmp.path().join("a"), "local-laws"), run_dir(&tmp.path().join("b"), "local-laws"));
    assert_eq!(da.file_name(), db.file_name());
    for f in ["report.json", "averaged.csv", "isotropic.csv"] {
        assert_eq!(std::fs::read(da.join(f)).unwrap(), std::fs::read(db.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn local_laws_series_have_one_row_per_eta() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wignerlab(
        &["run", "local-laws", "model.n=120", "sampling.samples=3", "bulk.indices=6", "eta.points=8"],
        tmp.path(),
    );
    assert_ne!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&tmp.path().join("out"), "local-laws");
    for s in ["averaged", "entrywise", "offdiagonal", "isotropic"] {
        let csv = std::fs::read_to_string(dir.join(format!("{s}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("eta,n_eta,rms_residual,se"));
        assert_eq!(lines.count(), 8, "{s}");
    }
}

#[test]
fn gaussianity_report_has_moments_with_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wignerlab(&["run", "gaussianity", "model.n=200", "sampling.samples=20", "bulk.spacing=4"], tmp.path());
    assert_ne!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&tmp.path().join("out"), "gaussianity");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    let qs = report["quantities"].as_array().unwrap();
    for m in ["moment_2", "moment_4", "moment_6"] {
        let q = qs.iter().find(|q| q["name"] == m).unwrap();
        assert!(q["value"].as_f64().unwrap() > 0.0);
        assert!(q["se"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wignerlab(&["run", "kernel-demo", "--seed", "7", "kernel.nodes=500"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let dir = run_dir(&tmp.path().join("out"), "kernel-demo");
    let manifest = std::fs::read_to_string(dir.join("manifest")).unwrap();
    assert!(manifest.contains("# sha256 report.json "));
    assert!(manifest.contains("kernel.nodes = 500"));
    let first = std::fs::read(dir.join("report.json")).unwrap();
    std::fs::copy(dir.join("manifest"), tmp.path().join("m.txt")).unwrap();
    std::fs::remove_dir_all(tmp.path().join("out")).unwrap();
    let o = wignerlab(&["run", "kernel-demo", "--config", "m.txt"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let again = run_dir(&tmp.path().join("out"), "kernel-demo");
    assert_eq!(again.file_name(), dir.file_name());
    assert_eq!(std::fs::read(again.join("report.json")).unwrap(), first);
}
