//! Invariant and oracle checks shared by the `selftest` subcommand and the
//! acceptance suite.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use fwnl_core::categories::{check_symmetries, CategoryTable};
use fwnl_core::estimator::{
    constant_power_coeffs_apsd, constant_power_coeffs_nsr, constant_power_pairs, delta_matrix_apsd,
    delta_matrix_nsr, fit, fit_constant_power, propagated_std_errors, DeltaMatrix, SINGLE_CHANNEL_APSD,
    SINGLE_CHANNEL_NSR,
};
use fwnl_core::gn_model::{ase_psd, nln_psd};
use fwnl_core::spectra::{apply_perturbation, apsd};
use fwnl_core::units::{db_to_lin, lin_to_db, MHZ};
use fwnl_core::{
    CategoryKey, Error, FrequencyGrid, FwmKernelSpec, LinkParameters, NoiseDecomposition, PerturbationPair, Psd,
    Quantity, RegionLabel, SpectralLayout,
};

use crate::config::{parse_config, Scenario};
use crate::run::{
    fit_measurements, gn_measurements, gn_truth, instances, measurement_region, run_scenario, ssfm_measurements,
    Instance,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }

    fn from_result(name: &str, r: fwnl_core::Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// Default single-channel scenario plus `extra` lines, on a grid of `df`.
pub fn table_scenario(extra: &str, df: f64) -> Scenario {
    let text = format!("grid_resolution = {} MHz\n{extra}", df / MHZ);
    parse_config(&text).expect("built-in scenario text is valid")
}

/// Randomized band-of-interest spectra on a 512-point grid: the four
/// intra-channel multisets add up to the total GN PSD at every point.
pub fn partition_identity(n_spectra: usize, seed: u64) -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let df = 250.0 * MHZ;
        let grid = FrequencyGrid::centered(512.0 * df, df)?;
        let kernel = FwmKernelSpec::default();
        let mut worst: f64 = 0.0;
        for _ in 0..n_spectra {
            let wa = rng.random_range(4..=80) as f64 * df;
            let wn = 2.0 * rng.random_range(1..=20) as f64 * df;
            let wb = rng.random_range(4..=80) as f64 * df;
            let layout = SpectralLayout::on_grid(
                fwnl_core::Interval::new(-wn / 2.0 - wa, -wn / 2.0),
                fwnl_core::Interval::new(-wn / 2.0, wn / 2.0),
                fwnl_core::Interval::new(wn / 2.0, wn / 2.0 + wb),
                &grid,
            )?;
            let labels = layout.labels(&grid)?;
            let values: Vec<f64> = labels
                .iter()
                .map(|l| match l {
                    RegionLabel::A | RegionLabel::B => rng.random_range(0.2..1.0) * 1e-13,
                    _ => 0.0,
                })
                .collect();
            let tx = Psd::new(grid, values)?;
            let link = LinkParameters::ndsf(rng.random_range(1..=20))?;
            let table = CategoryTable::compute(&tx, &layout, &link, &kernel, &grid)?;
            let total = nln_psd(&tx, &link, &kernel, &grid)?;
            let parts: Vec<Psd> = CategoryKey::intra().iter().map(|k| table.multiset(*k)).collect();
            for (i, t) in total.values().iter().enumerate() {
                let sum: f64 = parts.iter().map(|p| p.values()[i]).sum();
                worst = worst.max(rel(sum, *t));
            }
        }
        Ok((worst <= 1e-10, format!("{n_spectra} spectra, max relative deviation {worst:.2e}")))
    };
    Check::from_result("partition identity", run())
}

/// Category APSDs follow `Δ(A)^{m_A}·Δ(B)^{m_B}`, and the total NLN is
/// cubic in a uniform gain.
pub fn scaling_laws() -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let s = parse_config("channels = 3\ngrid_resolution = 500 MHz\ngrid_span = 250 GHz").expect("valid");
        let tx = s.reference_spectrum()?;
        let link = s.link.with_spans(4)?;
        let region = s.layout.boi();
        let keys: Vec<CategoryKey> = CategoryKey::all_without_notch();
        let base = CategoryTable::for_region(&tx, &s.layout, &link, &s.kernel, region)?;
        let mut worst: f64 = 0.0;
        for da in [0.5, 1.0, 2.0] {
            for db in [0.5, 1.0, 2.0] {
                let p = PerturbationPair::new(da, db)?;
                let scaled = CategoryTable::for_region(&apply_perturbation(&tx, &s.layout, &p)?, &s.layout, &link, &s.kernel, region)?;
                for k in &keys {
                    let want = base.apsd(*k, region)?
                        * da.powi(k.multiplicity(RegionLabel::A) as i32)
                        * db.powi(k.multiplicity(RegionLabel::B) as i32);
                    worst = worst.max(rel(scaled.apsd(*k, region)?, want));
                }
            }
        }
        let mut cubic: f64 = 0.0;
        let out = *base.grid();
        let total = nln_psd(&tx, &link, &s.kernel, &out)?;
        for g in [0.5, 2.0, 3.0] {
            let t = nln_psd(&tx.scaled(g), &link, &s.kernel, &out)?;
            for (a, b) in t.values().iter().zip(total.values()) {
                cubic = cubic.max(rel(*a, b * g * g * g));
            }
        }
        Ok((
            worst <= 1e-12 && cubic <= 1e-12,
            format!("category scaling {worst:.2e}, cubic scaling {cubic:.2e}"),
        ))
    };
    Check::from_result("scaling laws", run())
}

/// Transceiver NSR used by the synthetic NSR recoveries.
pub const SYNTHETIC_TRX_NSR: f64 = 1e-3;

/// Exact GN measurements of the default scenario: every perturbed spectrum
/// is integrated afresh rather than rescaled from the reference table.
pub struct SyntheticCase {
    pub scenario: Scenario,
    pub instances: Vec<Instance>,
    pub truth: NoiseDecomposition,
    pub measurements: Vec<f64>,
    pub delta: DeltaMatrix,
}

pub fn synthetic_case(quantity: Quantity, spans: usize, df: f64) -> fwnl_core::Result<SyntheticCase> {
    let fit = match quantity {
        Quantity::Apsd => "apsd",
        Quantity::Nsr => "nsr",
    };
    let trx = lin_to_db(SYNTHETIC_TRX_NSR);
    let s = table_scenario(&format!("fit = {fit}\nspans = {spans}\ntrx_nsr = {trx} dB\n"), df);
    let tx = s.reference_spectrum()?;
    let link = s.link.with_spans(spans)?;
    let region = measurement_region(&s)?;
    let table = CategoryTable::for_region(&tx, &s.layout, &link, &s.kernel, region)?;
    let ase = apsd(&ase_psd(&link, &s.grid), region)?;
    let truth = gn_truth(&s, &tx, &table, region, ase)?;
    let inst = instances(&s)?;
    let pairs: Vec<PerturbationPair> = inst.iter().map(|i| i.pair).collect();
    let signal = apsd(&tx, s.layout.a())?;
    let mut y = Vec::with_capacity(inst.len());
    for p in &pairs {
        let perturbed = apply_perturbation(&tx, &s.layout, p)?;
        let nln = apsd(&nln_psd(&perturbed, &link, &s.kernel, table.grid())?, region)?;
        y.push(match quantity {
            Quantity::Apsd => nln + ase,
            Quantity::Nsr => (nln + ase) / (signal * p.delta_a()) + s.trx_nsr,
        });
    }
    let delta = match quantity {
        Quantity::Apsd => delta_matrix_apsd(&pairs, &SINGLE_CHANNEL_APSD)?,
        Quantity::Nsr => delta_matrix_nsr(&pairs, &SINGLE_CHANNEL_NSR)?,
    };
    Ok(SyntheticCase { scenario: s, instances: inst, truth, measurements: y, delta })
}

/// Noiseless GN measurements on the 25-instance grid are fitted back to the
/// reference decomposition.
pub fn synthetic_recovery(spans: usize, df: f64) -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        for q in [Quantity::Nsr, Quantity::Apsd] {
            let case = synthetic_case(q, spans, df)?;
            let r = fit(&case.measurements, &case.delta)?;
            for (key, t) in case.truth.iter() {
                worst = worst.max(rel(r.category(key).unwrap_or(f64::NAN), t));
            }
        }
        Ok((worst <= 1e-9, format!("NSR and APSD fits at {spans} spans, max relative error {worst:.2e}")))
    };
    Check::from_result("synthetic recovery", run())
}

/// 0.1 dB multiplicative measurement noise: categories whose value is at
/// least ten analytic standard deviations are recovered within 0.5 dB RMS.
pub fn monte_carlo_recovery(spans: usize, df: f64, trials: usize, seed: u64) -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let sigma_db = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut notes = Vec::new();
        let mut ok = true;
        for q in [Quantity::Nsr, Quantity::Apsd] {
            let case = synthetic_case(q, spans, df)?;
            let keys: Vec<CategoryKey> = case.truth.iter().map(|(k, _)| k).collect();
            let sd: Vec<f64> =
                case.measurements.iter().map(|y| y * sigma_db * std::f64::consts::LN_10 / 10.0).collect();
            let analytic = propagated_std_errors(&case.delta, &sd)?;
            let basis = match q {
                Quantity::Apsd => &SINGLE_CHANNEL_APSD[..],
                Quantity::Nsr => &SINGLE_CHANNEL_NSR[..],
            };
            let dominant: Vec<CategoryKey> = keys
                .iter()
                .copied()
                .filter(|k| {
                    let j = basis.iter().position(|b| b == k).expect("basis key");
                    case.truth.get(*k).unwrap_or(0.0) >= 10.0 * analytic[j]
                })
                .collect();
            let mut sq = vec![0.0; dominant.len()];
            for _ in 0..trials {
                let noisy: Vec<f64> = case
                    .measurements
                    .iter()
                    .map(|y| y * db_to_lin(sigma_db * rng.sample::<f64, _>(StandardNormal)))
                    .collect();
                let r = fit(&noisy, &case.delta)?;
                for (acc, k) in sq.iter_mut().zip(&dominant) {
                    let est = r.category(*k).unwrap_or(f64::NAN);
                    let t = case.truth.get(*k).unwrap_or(f64::NAN);
                    let err = if est > 0.0 { lin_to_db(est / t) } else { f64::INFINITY };
                    *acc += err * err;
                }
            }
            let mut parts = Vec::new();
            for (acc, k) in sq.iter().zip(&dominant) {
                let rms = (acc / trials as f64).sqrt();
                ok &= rms < 0.5;
                parts.push(format!("{k} {rms:.3}"));
            }
            ok &= !dominant.is_empty();
            notes.push(format!("{q:?} RMS dB [{}]", parts.join(", ")));
        }
        Ok((ok, format!("{trials} trials; {}", notes.join("; "))))
    };
    Check::from_result("monte carlo recovery", run())
}

/// `K_A·Δ(A) + K_B·Δ(B) = 1` for the constant-power pairs.
pub fn constant_power_conservation() -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        let deltas: Vec<f64> = (-8..=8).map(|i| db_to_lin(0.25 * i as f64)).collect();
        for (k_a, k_b) in [(0.5, 0.5), (0.3, 0.7), (0.62, 0.38)] {
            for p in constant_power_pairs(&deltas, k_a, k_b)? {
                worst = worst.max((k_a * p.delta_a() + k_b * p.delta_b() - 1.0).abs());
            }
        }
        Ok((worst <= 4.0 * f64::EPSILON, format!("max |K_A·Δ(A) + K_B·Δ(B) − 1| = {worst:.2e}")))
    };
    Check::from_result("constant-power conservation", run())
}

/// The constant-power polynomials equal the direct category sums along
/// the constant-power line.
pub fn constant_power_coefficients(spans: usize, df: f64) -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        for q in [Quantity::Nsr, Quantity::Apsd] {
            let case = synthetic_case(q, spans, df)?;
            let (k_a, k_b) = case.scenario.relative_powers()?;
            let coeffs = match q {
                Quantity::Apsd => constant_power_coeffs_apsd(&case.truth, k_a, k_b)?,
                Quantity::Nsr => constant_power_coeffs_nsr(&case.truth, k_a, k_b)?,
            };
            let deltas: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|d| db_to_lin(*d)).collect();
            let pairs = constant_power_pairs(&deltas, k_a, k_b)?;
            let direct = match q {
                Quantity::Apsd => delta_matrix_apsd(&pairs, &SINGLE_CHANNEL_APSD)?,
                Quantity::Nsr => delta_matrix_nsr(&pairs, &SINGLE_CHANNEL_NSR)?,
            }
            .predict(&case.truth)?;
            for (d, want) in deltas.iter().zip(direct) {
                worst = worst.max(rel(coeffs.evaluate(*d), want));
            }
        }
        Ok((worst <= 1e-10, format!("5 Δ values, NSR and APSD, max relative deviation {worst:.2e}")))
    };
    Check::from_result("constant-power coefficients", run())
}

/// Symmetry-constrained constant-power APSD fit of GN data against the
/// variable-power fit of the same link.
pub fn constant_power_constrained_fit(spans: usize, df: f64) -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let variable = synthetic_case(Quantity::Apsd, spans, df)?;
        let reference = fit(&variable.measurements, &variable.delta)?;

        let s = table_scenario(
            &format!("spans = {spans}\nconstant_power = true\nsymmetry_constrained = true\ndelta_a = -2:0.5:2 dB\n"),
            df,
        );
        let tx = s.reference_spectrum()?;
        let link = s.link.with_spans(spans)?;
        let region = measurement_region(&s)?;
        let table = CategoryTable::for_region(&tx, &s.layout, &link, &s.kernel, region)?;
        let ase = apsd(&ase_psd(&link, &s.grid), region)?;
        let inst = instances(&s)?;
        let y = gn_measurements(&s, &tx, &table, region, ase, &inst)?;
        let (k_a, k_b) = s.relative_powers()?;
        let deltas: Vec<f64> = inst.iter().map(|i| i.pair.delta_a()).collect();
        let (constrained, note) = match fit_constant_power(&y, &deltas, k_a, k_b, Quantity::Apsd, true) {
            Ok(r) => (r, String::new()),
            Err(Error::RankDeficient(report)) => {
                let note = format!("rank {} of {}; using the minimum-norm solution; ", report.rank, report.min_norm.columns.len());
                (report.min_norm, note)
            }
            Err(e) => return Err(e),
        };
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for key in [CategoryKey::AAA, CategoryKey::BAA, CategoryKey::Ase] {
            let a = constrained.category(key).unwrap_or(f64::NAN);
            let b = reference.category(key).unwrap_or(f64::NAN);
            let d = if a > 0.0 && b > 0.0 { lin_to_db(a / b).abs() } else { f64::INFINITY };
            worst = worst.max(d);
            parts.push(format!("{key} {d:.3} dB"));
        }
        Ok((worst <= 0.6, format!("{note}{}", parts.join(", "))))
    };
    Check::from_result("constrained constant-power fit", run())
}

/// Mirror-symmetry residuals of the default layout, single channel and with
/// neighbours.
pub fn symmetry_residuals(spans: usize, df_single: f64, df_wdm: f64) -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let single = table_scenario(&format!("spans = {spans}"), df_single);
        let wdm = table_scenario(&format!("spans = {spans}\nchannels = 3"), df_wdm);
        let mut parts = Vec::new();
        let mut ok = true;
        for (name, s) in [("single", &single), ("wdm", &wdm)] {
            let tx = s.reference_spectrum()?;
            let rep = check_symmetries(&tx, &s.layout, &s.link, &s.kernel)?;
            let intra = rep.intra.iter().map(|r| r.residual).fold(0.0, f64::max);
            let inter = rep.inter.iter().map(|r| r.residual).fold(0.0, f64::max);
            ok &= rep.applicable && !rep.intra.is_empty() && intra <= 1e-9 && inter <= 1e-9;
            if name == "wdm" {
                ok &= !rep.inter.is_empty();
            }
            parts.push(format!("{name}: intra {intra:.2e}, inter {inter:.2e}"));
        }
        Ok((ok, parts.join("; ")))
    };
    Check::from_result("symmetry residuals", run())
}

/// A small sweep run twice gives byte-identical CSV.
pub fn sweep_determinism() -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let s = parse_config(
            "spans = 1:2\nsymbols = 256\nrealizations = 2\ndelta_a = -2:2:2 dB\ndelta_b = -2:2:2 dB\ngrid_resolution = 250 MHz",
        )
        .expect("valid");
        let a = run_scenario(&s)?.to_csv_string();
        let b = run_scenario(&s)?.to_csv_string();
        Ok((a == b, format!("{} bytes", a.len())))
    };
    Check::from_result("determinism", run())
}

/// Noiseless SSFM against the GN conditioned integrals: fitted `[A,A,A]`
/// and `[B,A,A]` notch APSDs within 1 dB at every span count.
pub fn ssfm_intra_fit(spans: &str, realizations: usize) -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let s = parse_config(&format!("spans = {spans}\nase_noise = off\nrealizations = {realizations}\nmode = ssfm"))
            .expect("valid");
        let per_span = ssfm_fit_vs_gn(&s, &[CategoryKey::AAA, CategoryKey::BAA])?;
        let mut ok = true;
        let mut parts = Vec::new();
        for (n, diffs) in per_span {
            let d: Vec<String> = diffs.iter().map(|(k, d)| format!("{k} {d:+.2}")).collect();
            ok &= diffs.iter().all(|(_, d)| d.abs() <= 1.0);
            parts.push(format!("{n} spans [{}]", d.join(", ")));
        }
        Ok((ok, format!("{realizations} realizations; dB vs GN: {}", parts.join("; "))))
    };
    Check::from_result("ssfm vs gn intra-channel", run())
}

/// Fitted-minus-GN dB differences for `keys` at each span count.
pub fn ssfm_fit_vs_gn(s: &Scenario, keys: &[CategoryKey]) -> fwnl_core::Result<Vec<(usize, Vec<(CategoryKey, f64)>)>> {
    let tx = s.reference_spectrum()?;
    let inst = instances(s)?;
    let (mean, _) = ssfm_measurements(s, &tx, &inst)?;
    let region = measurement_region(s)?;
    let mut out = Vec::new();
    for (si, &n) in s.spans.iter().enumerate() {
        let r = fit_measurements(s, &inst, &mean[si])?;
        let link = s.link.with_spans(n)?;
        let table = CategoryTable::for_region(&tx, &s.layout, &link, &s.kernel, region)?;
        let mut diffs = Vec::new();
        for k in keys {
            let gn = table.apsd(*k, region)?;
            let fitted = r.category(*k).unwrap_or(f64::NAN);
            let d = if fitted > 0.0 { lin_to_db(fitted / gn) } else { f64::INFINITY };
            diffs.push((*k, d));
        }
        out.push((n, diffs));
    }
    Ok(out)
}

/// Three-channel SSFM: fitted `[OB,OB,A]` within 1.5 dB of GN and within
/// 0.5 dB of fitted `[OB,OB,B]`.
pub fn ssfm_xpm_fit(realizations: usize) -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let s = parse_config(&format!(
            "channels = 3\nspans = 10\nase_noise = off\nrealizations = {realizations}\nmode = ssfm"
        ))
        .expect("valid");
        let tx = s.reference_spectrum()?;
        let inst = instances(&s)?;
        let (mean, _) = ssfm_measurements(&s, &tx, &inst)?;
        let r = fit_measurements(&s, &inst, &mean[0])?;
        let region = measurement_region(&s)?;
        let table = CategoryTable::for_region(&tx, &s.layout, &s.link, &s.kernel, region)?;
        let gn = table.apsd(CategoryKey::OB_OB_A, region)?;
        let a = r.category(CategoryKey::OB_OB_A).unwrap_or(f64::NAN);
        let b = r.category(CategoryKey::OB_OB_B).unwrap_or(f64::NAN);
        let vs_gn = if a > 0.0 { lin_to_db(a / gn) } else { f64::INFINITY };
        let a_vs_b = if a > 0.0 && b > 0.0 { lin_to_db(a / b) } else { f64::INFINITY };
        Ok((
            vs_gn.abs() <= 1.5 && a_vs_b.abs() <= 0.5,
            format!("[OB,OB,A] {vs_gn:+.2} dB vs GN, [OB,OB,A] vs [OB,OB,B] {a_vs_b:+.2} dB ({realizations} realizations)"),
        ))
    };
    Check::from_result("ssfm xpm fit", run())
}

/// Noise-enabled SSFM: fitted ASE within 0.5 dB of the amplifier chain and
/// within 0.3 dB between two disjoint halves of the perturbation grid.
pub fn ssfm_ase_fit(realizations: usize) -> Check {
    let run = || -> fwnl_core::Result<(bool, String)> {
        let s = parse_config(&format!("spans = 10\nase_noise = on\nrealizations = {realizations}\nmode = ssfm"))
            .expect("valid");
        let tx = s.reference_spectrum()?;
        let inst = instances(&s)?;
        let (mean, _) = ssfm_measurements(&s, &tx, &inst)?;
        let y = &mean[0];
        let region = measurement_region(&s)?;
        let analytic = apsd(&ase_psd(&s.link, &s.grid), region)?;
        let full = fit_measurements(&s, &inst, y)?.category(CategoryKey::Ase).unwrap_or(f64::NAN);

        let mut halves: [(Vec<Instance>, Vec<f64>); 2] = Default::default();
        for (k, (i, v)) in inst.iter().zip(y).enumerate() {
            halves[k % 2].0.push(*i);
            halves[k % 2].1.push(*v);
        }
        let mut sub = Vec::new();
        for (i, v) in &halves {
            sub.push(fit_measurements(&s, i, v)?.category(CategoryKey::Ase).unwrap_or(f64::NAN));
        }
        let db = |a: f64, b: f64| if a > 0.0 && b > 0.0 { lin_to_db(a / b) } else { f64::INFINITY };
        let vs_analytic = db(full, analytic);
        let between = db(sub[0], sub[1]);
        Ok((
            vs_analytic.abs() <= 0.5 && between.abs() <= 0.3,
            format!("ASE {vs_analytic:+.3} dB vs analytic, halves differ by {between:+.3} dB ({realizations} realizations)"),
        ))
    };
    Check::from_result("ssfm ase fit", run())
}

/// Quick invariant suite for the `selftest` subcommand.
pub fn quick_suite() -> Vec<Check> {
    let coarse = 250.0 * MHZ;
    vec![
        partition_identity(5, 1),
        scaling_laws(),
        synthetic_recovery(10, coarse),
        monte_carlo_recovery(10, coarse, 100, 2),
        constant_power_conservation(),
        constant_power_coefficients(10, coarse),
        symmetry_residuals(10, coarse, 500.0 * MHZ),
        sweep_determinism(),
    ]
}

/// Every check at full size, including the split-step comparisons.
pub fn full_suite() -> Vec<Check> {
    let df = 50.0 * MHZ;
    vec![
        partition_identity(50, 1),
        scaling_laws(),
        synthetic_recovery(10, df),
        monte_carlo_recovery(10, df, 200, 2),
        constant_power_conservation(),
        constant_power_coefficients(10, df),
        constant_power_constrained_fit(10, df),
        symmetry_residuals(10, df, 100.0 * MHZ),
        sweep_determinism(),
        ssfm_intra_fit("5, 10, 15", 8),
        ssfm_xpm_fit(2),
        ssfm_ase_fit(4),
    ]
}
