use std::path::Path;
use std::process::{Command, Output};

use fwnl::output::{ResultSet, RESULTS_SCHEMA};

fn fwnl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwnl")).args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_GN: &str = "spans = 2, 4\ngrid_resolution = 250 MHz\n";

#[test]
fn gn_writes_versioned_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL_GN);
    let out = fwnl(&["gn", "--config", &cfg, "--out", "r.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(text.starts_with(RESULTS_SCHEMA));
    let set = ResultSet::read_csv(text.as_bytes()).unwrap();
    for span in [2, 4] {
        let truth = set.value(span, "gn", "[A,A,A]").unwrap();
        let fitted = set.value(span, "gn-fit", "[A,A,A]").unwrap();
        assert!((truth - fitted).abs() <= 1e-8 * truth);
    }
    assert!(set.rows.iter().all(|r| !r.mode.starts_with("ssfm")));
}

#[test]
fn gn_to_stdout_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL_GN);
    let out = fwnl(&["gn", "--config", &cfg, "--fit", "apsd"], dir.path());
    assert!(out.status.success());
    let set = ResultSet::read_csv(&out.stdout[..]).unwrap();
    assert!(set.value(2, "gn", "ASE").unwrap() > 0.0);
}

#[test]
fn fit_reproduces_measurement_fits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL_GN);
    assert!(fwnl(&["gn", "--config", &cfg, "--out", "r.csv"], dir.path()).status.success());
    let out = fwnl(&["fit", "--config", &cfg, "--input", "r.csv", "--out", "f.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let orig = ResultSet::read_csv(std::fs::File::open(dir.path().join("r.csv")).unwrap()).unwrap();
    let refit = ResultSet::read_csv(std::fs::File::open(dir.path().join("f.csv")).unwrap()).unwrap();
    assert!(!refit.rows.is_empty());
    for r in &refit.rows {
        let v = orig.value(r.span_count, &r.mode, &r.category).unwrap();
        assert!((v - r.value).abs() <= 1e-9 * v.abs().max(1e-30), "{} {}", r.category, r.mode);
    }
}

#[test]
fn compare_identical_files_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL_GN);
    assert!(fwnl(&["gn", "--config", &cfg, "--out", "r.csv"], dir.path()).status.success());
    let out = fwnl(&["compare", "r.csv", "r.csv", "--select-a", "gn-fit", "--select-b", "gn"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# schema: fwnl-compare v1"));
    assert!(text.lines().any(|l| l.contains("[B,A,A]")));
}

#[test]
fn config_errors_exit_with_two_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "spans = 3\nwidth_q = 2 GHz\n");
    let out = fwnl(&["gn", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn missing_config_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fwnl(&["gn", "--config", "nope.cfg"], dir.path()).status.code(), Some(2));
}

#[test]
fn rank_deficient_fit_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.cfg",
        "spans = 2\ngrid_resolution = 250 MHz\nfit = apsd\nconstant_power = true\nsymmetry_constrained = true\n",
    );
    let out = fwnl(&["gn", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank"));
}

#[test]
fn underdetermined_grid_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", "spans = 2\ngrid_resolution = 250 MHz\ndelta_a = 0 dB\ndelta_b = -1:1:1 dB\n");
    assert_eq!(fwnl(&["gn", "--config", &cfg], dir.path()).status.code(), Some(3));
}

#[test]
fn seed_flag_changes_ssfm_output_only_through_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.cfg",
        "spans = 1\nsymbols = 512\nrealizations = 1\ndelta_a = -2:2:2 dB\ndelta_b = -2:2:2 dB\ngrid_resolution = 250 MHz\n",
    );
    let run = |seed: &str| fwnl(&["ssfm", "--config", &cfg, "--seed", seed, "--threads", "1"], dir.path()).stdout;
    let a = run("5");
    assert!(!a.is_empty());
    assert_eq!(a, run("5"));
    assert_ne!(a, run("6"));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = fwnl(&["selftest"], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().all(|l| !l.starts_with("FAIL")));
}
