//! Scenario orchestration: GN oracle categories, synthetic and simulated
//! measurements over the perturbation set, and the least-squares fits.

use log::info;
use rayon::prelude::*;

use fwnl_core::categories::{inner_region, CategoryTable};
use fwnl_core::estimator::{
    constant_power_coeffs_apsd, constant_power_coeffs_nsr, constant_power_pairs, delta_matrix_apsd,
    delta_matrix_nsr, fit, fit_constant_power, perturbation_grid, Column, FitResult,
};
use fwnl_core::gn_model::ase_psd;
use fwnl_core::spectra::{apply_perturbation, apsd};
use fwnl_core::ssfm::{
    add_transceiver_noise, measure_nsr, measure_psd, periodogram_psd, propagate_link_with, synthesize_waveform,
    FieldWaveform, NsrConfig, SsfmControl, WaveformConfig,
};
use fwnl_core::units::db_to_lin;
use fwnl_core::{CategoryKey, Interval, NoiseDecomposition, PerturbationPair, Psd, Quantity, Result};

use crate::config::{PsdEstimator, Scenario};
use crate::output::{ResultRow, ResultSet};

pub const MODE_GN: &str = "gn";
pub const MODE_GN_MEASURED: &str = "gn-measured";
pub const MODE_GN_FIT: &str = "gn-fit";
pub const MODE_SSFM_MEASURED: &str = "ssfm-measured";
pub const MODE_SSFM_FIT: &str = "ssfm-fit";

/// One perturbation instance with the dB values it was generated from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Instance {
    pub a_db: f64,
    pub b_db: f64,
    pub pair: PerturbationPair,
}

impl Instance {
    pub fn label(&self) -> String {
        format!("meas:{}:{}", self.a_db, self.b_db)
    }

    /// Inverse of [`Instance::label`] for the dB values.
    pub fn parse_label(s: &str) -> Option<(f64, f64)> {
        let rest = s.strip_prefix("meas:")?;
        let (a, b) = rest.split_once(':')?;
        Some((a.parse().ok()?, b.parse().ok()?))
    }
}

/// Perturbation set of the scenario: the full grid, or the constant-power
/// pairs built from the `delta_a` list.
pub fn instances(s: &Scenario) -> Result<Vec<Instance>> {
    if s.constant_power {
        let (k_a, k_b) = s.relative_powers()?;
        let deltas: Vec<f64> = s.delta_a_db.iter().map(|d| db_to_lin(*d)).collect();
        let pairs = constant_power_pairs(&deltas, k_a, k_b)?;
        Ok(s.delta_a_db
            .iter()
            .zip(pairs)
            .map(|(a, pair)| Instance { a_db: *a, b_db: fwnl_core::units::lin_to_db(pair.delta_b()), pair })
            .collect())
    } else {
        let pairs = perturbation_grid(&s.delta_a_db, &s.delta_b_db)?;
        let mut out = Vec::with_capacity(pairs.len());
        let mut it = pairs.into_iter();
        for a in &s.delta_a_db {
            for b in &s.delta_b_db {
                out.push(Instance { a_db: *a, b_db: *b, pair: it.next().expect("grid size") });
            }
        }
        Ok(out)
    }
}

/// Where the fitted quantity is measured: the inner notch for APSD, the
/// whole lower sub-carrier for NSR.
pub fn measurement_region(s: &Scenario) -> Result<Interval> {
    match s.fit {
        Quantity::Apsd => inner_region(&s.grid, s.layout.n(), s.inner_fraction),
        Quantity::Nsr => Ok(s.layout.a()),
    }
}

/// Fits `measurements` taken at `instances` with the scenario's estimator.
pub fn fit_measurements(s: &Scenario, instances: &[Instance], measurements: &[f64]) -> Result<FitResult> {
    if s.constant_power {
        let (k_a, k_b) = s.relative_powers()?;
        let deltas: Vec<f64> = instances.iter().map(|i| i.pair.delta_a()).collect();
        return fit_constant_power(measurements, &deltas, k_a, k_b, s.fit, s.symmetry_constrained);
    }
    let pairs: Vec<PerturbationPair> = instances.iter().map(|i| i.pair).collect();
    let dm = match s.fit {
        Quantity::Apsd => delta_matrix_apsd(&pairs, &s.basis())?,
        Quantity::Nsr => delta_matrix_nsr(&pairs, &s.basis())?,
    };
    fit(measurements, &dm)
}

/// Fit rows; tied columns are expanded to one row per member category.
pub fn fit_rows(span_count: usize, mode: &str, r: &FitResult, measurements: &[f64], realizations: usize) -> Vec<ResultRow> {
    let norm = measurements.iter().map(|v| v * v).sum::<f64>().sqrt();
    let residual = if norm > 0.0 { r.residual_norm / norm } else { 0.0 };
    let mut rows = Vec::new();
    for (j, col) in r.columns.iter().enumerate() {
        let names: Vec<String> = match col {
            Column::Tied(keys) => keys.iter().map(|k| k.to_string()).collect(),
            other => vec![other.to_string()],
        };
        for name in names {
            rows.push(ResultRow {
                span_count,
                mode: mode.to_string(),
                category: name,
                value: r.estimates[j],
                stderr: Some(r.std_errors[j]),
                residual: Some(residual),
                condition_number: Some(r.condition_number),
                realizations,
            });
        }
    }
    rows
}

/// GN-model categories of the fit basis at one span count, with the
/// categories a basis cannot separate folded into `ASE`/`TRX` the same way
/// the fit folds them.
pub fn gn_truth(s: &Scenario, tx: &Psd, table: &CategoryTable, region: Interval, ase: f64) -> Result<NoiseDecomposition> {
    let signal = match s.fit {
        Quantity::Apsd => 1.0,
        Quantity::Nsr => apsd(tx, s.layout.a())?,
    };
    let mut dec = NoiseDecomposition::new(s.fit);
    let wdm = s.neighbors > 0;
    for key in s.basis() {
        let v = match key {
            CategoryKey::Ase => {
                let ob = if wdm { table.apsd(CategoryKey::OB_OB_OB, region)? } else { 0.0 };
                (ase + ob) / signal
            }
            CategoryKey::Trx => {
                let ob = if wdm { table.apsd(CategoryKey::OB_OB_A, region)? } else { 0.0 };
                s.trx_nsr + ob / signal
            }
            k => table.apsd(k, region)? / signal,
        };
        dec.insert(key, v);
    }
    Ok(dec)
}

fn truth_rows(s: &Scenario, span_count: usize, dec: &NoiseDecomposition) -> Result<Vec<ResultRow>> {
    let mut rows: Vec<ResultRow> = s
        .basis()
        .into_iter()
        .map(|k| ResultRow::plain(span_count, MODE_GN, k.to_string(), dec.get(k).unwrap_or(0.0), 1))
        .collect();
    if s.constant_power && !s.symmetry_constrained {
        let (k_a, k_b) = s.relative_powers()?;
        let coeffs = match s.fit {
            Quantity::Apsd => constant_power_coeffs_apsd(dec, k_a, k_b)?,
            Quantity::Nsr => constant_power_coeffs_nsr(dec, k_a, k_b)?,
        };
        for (p, c) in coeffs.terms() {
            rows.push(ResultRow::plain(span_count, MODE_GN, Column::Power(p).to_string(), c, 1));
        }
    }
    Ok(rows)
}

/// GN prediction of the measured quantity at each instance.
pub fn gn_measurements(
    s: &Scenario,
    tx: &Psd,
    table: &CategoryTable,
    region: Interval,
    ase: f64,
    instances: &[Instance],
) -> Result<Vec<f64>> {
    let signal = apsd(tx, s.layout.a())?;
    instances
        .iter()
        .map(|inst| {
            let nln = apsd(&table.perturbed_total(&inst.pair), region)?;
            Ok(match s.fit {
                Quantity::Apsd => nln + ase,
                Quantity::Nsr => {
                    let sig = signal * inst.pair.delta_a();
                    (nln + ase) / sig + s.trx_nsr
                }
            })
        })
        .collect()
}

fn gn_rows(s: &Scenario, tx: &Psd, instances: &[Instance], span_count: usize) -> Result<Vec<ResultRow>> {
    let link = s.link.with_spans(span_count)?;
    let region = measurement_region(s)?;
    let table = CategoryTable::for_region(tx, &s.layout, &link, &s.kernel, region)?;
    let ase = if s.control.noise_enabled { apsd(&ase_psd(&link, &s.grid), region)? } else { 0.0 };

    let dec = gn_truth(s, tx, &table, region, ase)?;
    let mut rows = truth_rows(s, span_count, &dec)?;
    let y = gn_measurements(s, tx, &table, region, ase, instances)?;
    for (inst, v) in instances.iter().zip(&y) {
        rows.push(ResultRow::plain(span_count, MODE_GN_MEASURED, inst.label(), *v, 1));
    }
    let r = fit_measurements(s, instances, &y)?;
    rows.extend(fit_rows(span_count, MODE_GN_FIT, &r, &y, 1));
    Ok(rows)
}

/// Counter-based seed derivation (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Measurement of one instance and realization at every span count of the
/// sweep, from a single propagation to the longest span count.
///
/// The data symbols and amplifier noise depend only on the realization, so
/// every instance of a realization sees the same random draws.
pub fn simulate_instance(s: &Scenario, tx: &Psd, pair: &PerturbationPair, realization: usize) -> Result<Vec<f64>> {
    let r = realization as u64;
    let target = apply_perturbation(tx, &s.layout, pair)?;
    let cfg = WaveformConfig { seed: derive_seed(s.seed, 2 * r), ..s.waveform };
    let clean = synthesize_waveform(&cfg, &s.layout, &target)?;
    let launched = if s.trx_nsr > 0.0 {
        add_transceiver_noise(&clean, &cfg, &s.layout, &target, s.trx_nsr)?
    } else {
        clean.clone()
    };
    let ctrl = SsfmControl { seed: derive_seed(s.seed, 2 * r + 1), ..s.control };
    let link = s.link.with_spans(s.max_spans())?;
    let region = measurement_region(s)?;
    let mgrid = s.grid.restricted(region)?;

    let mut out = Vec::with_capacity(s.spans.len());
    let measure = |n: usize, w: &FieldWaveform| -> Result<f64> {
        match s.fit {
            Quantity::Apsd => {
                let psd = match s.psd_estimator {
                    PsdEstimator::Periodogram => periodogram_psd(w, &mgrid)?,
                    PsdEstimator::Welch => measure_psd(w, &mgrid)?,
                };
                apsd(&psd, region)
            }
            Quantity::Nsr => measure_nsr(w, &clean, region, &NsrConfig::after_spans(&link, n)),
        }
    };
    propagate_link_with(launched, &link, &ctrl, |n, w| {
        if s.spans.binary_search(&n).is_ok() {
            out.push(measure(n, w)?);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Realization-averaged SSFM measurements, indexed `[span][instance]`, and
/// the standard errors of those means.
pub fn ssfm_measurements(s: &Scenario, tx: &Psd, instances: &[Instance]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let jobs: Vec<(usize, usize)> =
        (0..instances.len()).flat_map(|k| (0..s.realizations).map(move |r| (k, r))).collect();
    info!("ssfm: {} propagations of {} spans", jobs.len(), s.max_spans());
    let results: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(k, r)| simulate_instance(s, tx, &instances[k].pair, r))
        .collect::<Result<_>>()?;

    let n_r = s.realizations as f64;
    let mut mean = vec![vec![0.0; instances.len()]; s.spans.len()];
    let mut sem = vec![vec![f64::NAN; instances.len()]; s.spans.len()];
    for (si, (m_row, e_row)) in mean.iter_mut().zip(sem.iter_mut()).enumerate() {
        for k in 0..instances.len() {
            let vals: Vec<f64> = (0..s.realizations).map(|r| results[k * s.realizations + r][si]).collect();
            let m = vals.iter().sum::<f64>() / n_r;
            m_row[k] = m;
            if s.realizations > 1 {
                let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n_r - 1.0);
                e_row[k] = (var / n_r).sqrt();
            }
        }
    }
    Ok((mean, sem))
}

fn ssfm_rows(s: &Scenario, tx: &Psd, instances: &[Instance]) -> Result<Vec<ResultRow>> {
    let (mean, sem) = ssfm_measurements(s, tx, instances)?;
    let mut rows = Vec::new();
    for (si, &span_count) in s.spans.iter().enumerate() {
        for (k, inst) in instances.iter().enumerate() {
            let mut row = ResultRow::plain(span_count, MODE_SSFM_MEASURED, inst.label(), mean[si][k], s.realizations);
            row.stderr = Some(sem[si][k]).filter(|v| v.is_finite());
            rows.push(row);
        }
        let r = fit_measurements(s, instances, &mean[si])?;
        rows.extend(fit_rows(span_count, MODE_SSFM_FIT, &r, &mean[si], s.realizations));
    }
    Ok(rows)
}

/// Runs the scenario's GN and/or SSFM branches over the span sweep.
pub fn run_scenario(s: &Scenario) -> Result<ResultSet> {
    let tx = s.reference_spectrum()?;
    let inst = instances(s)?;
    let mut rows = Vec::new();
    if s.mode.runs_gn() {
        let per_span: Vec<Vec<ResultRow>> = s
            .spans
            .par_iter()
            .map(|&n| {
                info!("gn: {n} spans");
                gn_rows(s, &tx, &inst, n)
            })
            .collect::<Result<_>>()?;
        rows.extend(per_span.into_iter().flatten());
    }
    if s.mode.runs_ssfm() {
        rows.extend(ssfm_rows(s, &tx, &inst)?);
    }
    rows.sort_by_key(|r| r.span_count);
    Ok(ResultSet { rows })
}
