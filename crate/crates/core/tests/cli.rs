use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SQUARE: &str = r#"schema_version = 1
p = 2
alpha = 0.5
seeds = 2

[container]
kind = "polygon"
vertices = [[-1, -1], [1, -1], [1, 1], [-1, 1]]

[grid]
n = 32
n_f = 6
m = 128
q = 256
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_convex-sensor"));
    c.env_remove("CONVEX_SENSOR_OUT");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn validate_accepts_a_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.toml", SQUARE);
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("schema_version = 1"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_alpha = write_config(dir.path(), "a.toml", &SQUARE.replace("alpha = 0.5", "alpha = 2"));
    let out = bin().arg("validate").arg(&bad_alpha).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));

    let unknown = write_config(dir.path(), "u.toml", &format!("{SQUARE}colour = \"red\"\n"));
    assert_eq!(code(&bin().arg("validate").arg(&unknown).output().unwrap()), 2);

    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&bin().arg("solve").arg(&missing).output().unwrap()), 2);

    let ok = write_config(dir.path(), "ok.toml", SQUARE);
    assert_eq!(code(&bin().args(["--threads", "0", "validate"]).arg(&ok).output().unwrap()), 2);
}

#[test]
fn solver_failure_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SQUARE}\n[solver]\nmax_outer = 1\nmax_inner = 1\n");
    let cfg = write_config(dir.path(), "inf.toml", &text);
    let out = bin().arg("--out").arg(dir.path().join("out")).arg("solve").arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn compare_methods_writes_tables_and_figure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.toml", SQUARE);
    let out_dir = dir.path().join("out");
    let out = bin().arg("--out").arg(&out_dir).arg("compare-methods").arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<_> = fs::read_dir(&out_dir).unwrap().collect();
    assert!(files.len() >= 3);
    let table = fs::read_to_string(out_dir.join("compare_methods.csv")).unwrap();
    assert!(table.lines().count() == 4, "{table}");
    assert!(fs::read_to_string(out_dir.join("compare_methods.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn outputs_are_byte_identical_for_the_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.toml", SQUARE);
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = bin()
            .args(["--seed", "7", "--threads", "2", "--out"])
            .arg(&out_dir)
            .arg("solve")
            .arg(&cfg)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let mut names: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        names
            .into_iter()
            .map(|n| (n.clone(), fs::read(out_dir.join(n)).unwrap()))
            .collect::<Vec<_>>()
    };
    let (a, b) = (run("a"), run("b"));
    assert!(a.iter().any(|(n, _)| n.to_string_lossy().ends_with(".svg")));
    assert!(a.iter().any(|(n, _)| n.to_string_lossy().ends_with(".csv")));
    assert_eq!(a, b);
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.toml", SQUARE);
    let env_dir = dir.path().join("from_env");
    let out = bin().env("CONVEX_SENSOR_OUT", &env_dir).arg("solve").arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(env_dir.join("solve_summary.csv").exists());
}

#[test]
fn export_svg_reads_shape_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.toml", SQUARE);
    let out_dir = dir.path().join("out");
    assert_eq!(code(&bin().arg("--out").arg(&out_dir).arg("solve").arg(&cfg).output().unwrap()), 0);
    let samples = out_dir.join("solve_nodal_samples.csv");
    assert!(fs::read_to_string(&samples).unwrap().starts_with("theta,h\n"));
    let svg = dir.path().join("fig.svg");
    let out = bin()
        .arg("export-svg")
        .arg(&cfg)
        .arg("--shape")
        .arg(&samples)
        .arg("-o")
        .arg(&svg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polygon").count(), 2);
}
