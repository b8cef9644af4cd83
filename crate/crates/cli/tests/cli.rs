use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dbar(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbar"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(dir: &TempDir, name: &str) -> String {
    std::fs::read_to_string(dir.path().join(name)).unwrap()
}

const FAST: &[&str] = &["--tol", "1e-4", "--no-residual"];

#[test]
fn corpus_list_names_every_variety() {
    let dir = TempDir::new().unwrap();
    let o = dbar(&["corpus-list"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir, "corpus.csv");
    for name in ["line", "cusp", "cone", "umbrella"] {
        assert!(csv.contains(name), "{name} missing from {csv}");
    }
}

#[test]
fn solve_on_grid_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = [&["solve", "--variety", "cusp", "--form", "bump", "--grid", "2"], FAST].concat();
    assert_eq!(code(&dbar(&args, a.path())), 0);
    assert_eq!(code(&dbar(&args, b.path())), 0);
    let csv = read(&a, "solution.csv");
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(csv.starts_with("point,z1_re,z1_im,z2_re,z2_im,lambda_re,lambda_im,sigma,level"));
    for name in ["solution.csv", "plot.dat", "report.json"] {
        assert_eq!(read(&a, name), read(&b, name), "{name} differs between runs");
    }
}

#[test]
fn json_tables_parse() {
    let dir = TempDir::new().unwrap();
    let args = [
        &[
            "solve",
            "--variety",
            "line",
            "--form",
            "bump",
            "--points",
            "2",
            "--format",
            "json",
        ],
        FAST,
    ]
    .concat();
    assert_eq!(code(&dbar(&args, dir.path())), 0);
    let rows: serde_json::Value = serde_json::from_str(&read(&dir, "solution.json")).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert!(rows[0]["lambda_re"].is_number());
    let report: serde_json::Value = serde_json::from_str(&read(&dir, "report.json")).unwrap();
    assert_eq!(report["variety"], "line");
}

#[test]
fn variety_and_form_files() {
    let dir = TempDir::new().unwrap();
    let variety = dir.path().join("cusp.json");
    std::fs::write(
        &variety,
        r#"{ "n": 2, "beta": [3, 2], "dim": 1,
             "generators": [ { "terms": [ { "exps": [2, 0], "re": 1.0 },
                                          { "exps": [0, 3], "re": -1.0 } ] } ] }"#,
    )
    .unwrap();
    let form = dir.path().join("form.json");
    std::fs::write(
        &form,
        r#"{ "name": "g", "q": 1, "R": 2.0, "potential": { "": "bump(0.3, 2) * z1" } }"#,
    )
    .unwrap();
    let args = [
        &[
            "solve",
            "--variety",
            variety.to_str().unwrap(),
            "--form",
            form.to_str().unwrap(),
            "--points",
            "2",
        ][..],
        FAST,
    ]
    .concat();
    let o = dbar(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&dir, "solution.csv").lines().count(), 3);
}

#[test]
fn missing_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = dbar(
        &["solve", "--variety", "no/such/variety.json", "--form", "bump"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/variety.json"));
}

#[test]
fn bad_exponent_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = dbar(
        &["solve", "--variety", "line", "--form", "bump", "--p", "0.5"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dbar"))
        .args(["corpus-list", "--out-dir"])
        .arg(dir.path())
        .env("DBAR_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn form_degree_mismatch_is_a_form_error() {
    let dir = TempDir::new().unwrap();
    let form = dir.path().join("form.json");
    std::fs::write(
        &form,
        r#"{ "q": 2, "R": 2.0, "potential": { "": "bump(0.3, 2) * z1" } }"#,
    )
    .unwrap();
    let o = dbar(
        &[
            "solve",
            "--variety",
            "cone",
            "--form",
            form.to_str().unwrap(),
            "--points",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 4);
}

#[test]
fn unknown_corpus_name_is_reported() {
    let dir = TempDir::new().unwrap();
    let o = dbar(&["solve", "--variety", "line", "--form", "nonexistent"], dir.path());
    assert_ne!(code(&o), 0);
    assert!(!o.stderr.is_empty());
}

#[test]
fn failed_check_exits_with_six() {
    let dir = TempDir::new().unwrap();
    let o = dbar(
        &[
            "verify",
            "--variety",
            "line",
            "--form",
            "bump",
            "--points",
            "1",
            "--tol",
            "1e-4",
            "--residual-tol",
            "1e-30",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 6);
    assert!(read(&dir, "residuals.csv").lines().count() == 2);
}
