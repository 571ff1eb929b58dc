//! Acceptance criteria 1 to 9, one `criterion N PASS|FAIL` line each.
//!
//! Runs without the libtest harness so the lines are always printed.
//! Positional arguments select criteria by number, e.g.
//! `cargo test -p fwnl --test acceptance -- 1 2 9`.

use std::process::{Command, ExitCode};

use fwnl::selftest::{self, Check};
use fwnl_core::units::MHZ;

const DF: f64 = 50.0 * MHZ;

struct Outcome {
    checks: Vec<Check>,
    /// Whether the criterion's outcome is the expected one. Only criterion 7
    /// tolerates a failure, and only the documented rank deficiency.
    expected: bool,
}

impl Outcome {
    fn strict(checks: Vec<Check>) -> Self {
        let expected = checks.iter().all(|c| c.passed);
        Self { checks, expected }
    }
}

fn criterion_1() -> Outcome {
    Outcome::strict(vec![selftest::partition_identity(50, 11)])
}

fn criterion_2() -> Outcome {
    Outcome::strict(vec![selftest::scaling_laws()])
}

fn criterion_3() -> Outcome {
    Outcome::strict(vec![selftest::synthetic_recovery(10, DF), selftest::monte_carlo_recovery(10, DF, 200, 3)])
}

fn criterion_4() -> Outcome {
    Outcome::strict(vec![selftest::ssfm_intra_fit("5, 10, 15", 8)])
}

fn criterion_5() -> Outcome {
    Outcome::strict(vec![selftest::ssfm_xpm_fit(2)])
}

fn criterion_6() -> Outcome {
    Outcome::strict(vec![selftest::ssfm_ase_fit(4)])
}

/// The symmetry-constrained fit is structurally rank 2 when `K_A = K_B`:
/// along `Δ(A) + Δ(B) = 2` the tied `[A,A,A]` column equals `8 − 3·v`
/// in terms of the tied `[B,A,A]` column `v`, so `{u, v, ASE}` cannot be
/// separated. The criterion is reported as it stands; the run only insists
/// that the failing part is that rank deficiency.
fn criterion_7() -> Outcome {
    let conservation = selftest::constant_power_conservation();
    let coefficients = selftest::constant_power_coefficients(10, DF);
    let constrained = selftest::constant_power_constrained_fit(10, DF);
    let expected = conservation.passed
        && coefficients.passed
        && (constrained.passed || constrained.detail.starts_with("rank 2 of 3"));
    Outcome { checks: vec![conservation, coefficients, constrained], expected }
}

fn criterion_8() -> Outcome {
    Outcome::strict(vec![selftest::symmetry_residuals(10, DF, 100.0 * MHZ)])
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(&cfg, "spans = 1:3\nsymbols = 1024\nrealizations = 2\ngrid_resolution = 250 MHz\nseed = 42\n")
        .unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_fwnl"))
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        outputs.push(if status.success() { std::fs::read(&out).unwrap_or_default() } else { Vec::new() });
    }
    let same = outputs[0] == outputs[1];
    Outcome::strict(vec![Check {
        name: "sweep twice".into(),
        passed: same && !outputs[0].is_empty(),
        detail: format!("{} and {} bytes, identical: {same}", outputs[0].len(), outputs[1].len()),
    }])
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
    ];
    let selected: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (n, run) in criteria {
        if !selected.is_empty() && !selected.iter().any(|s| s == n) {
            continue;
        }
        let outcome = run();
        let passed = outcome.checks.iter().all(|c| c.passed);
        let detail: Vec<String> = outcome.checks.iter().map(|c| format!("{} ({})", c.name, c.detail)).collect();
        println!("criterion {n} {}: {}", if passed { "PASS" } else { "FAIL" }, detail.join("; "));
        if !outcome.expected {
            unexpected.push(n);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
