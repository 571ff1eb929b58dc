//! GN-model nonlinear-noise PSD and analytic ASE for a link of identical,
//! lumped-amplified spans.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, Psd, RegionLabel};
use crate::units::{db_to_lin, PLANCK, SPEED_OF_LIGHT};

/// Largest kernel lookup table (entries) built for a single integration.
const KERNEL_TABLE_LIMIT: usize = 1 << 23;

/// Below this `|sin(x)|` the phased-array factor switches to its series.
const PHASED_ARRAY_SERIES_THRESHOLD: f64 = 1e-6;

/// Description of an isotropic multi-span link. Stored in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkParameters {
    gamma: f64,
    dispersion: f64,
    alpha_db_per_km: f64,
    span_length: f64,
    n_spans: usize,
    amp_gain_db: f64,
    amp_nf_db: f64,
    wavelength: f64,
    dual_polarization: bool,
    beta2: f64,
    alpha_field: f64,
}

impl LinkParameters {
    /// Builds a link from engineering units: `gamma` in 1/(W·km), `d` in
    /// ps/(nm·km), `alpha` in dB/km, `span_km` in km, gains in dB.
    pub fn new(
        gamma_per_w_km: f64,
        d_ps_nm_km: f64,
        alpha_db_km: f64,
        span_km: f64,
        n_spans: usize,
        amp_gain_db: f64,
        amp_nf_db: f64,
    ) -> Result<Self> {
        let mut link = Self {
            gamma: gamma_per_w_km * 1e-3,
            dispersion: d_ps_nm_km * 1e-6,
            alpha_db_per_km: alpha_db_km,
            span_length: span_km * 1e3,
            n_spans,
            amp_gain_db,
            amp_nf_db,
            wavelength: 1550e-9,
            dual_polarization: true,
            beta2: 0.0,
            alpha_field: 0.0,
        };
        link.validate()?;
        link.derive();
        Ok(link)
    }

    /// Standard single-mode fibre: 1.3 /W/km, 16.7 ps/nm/km, 0.2 dB/km,
    /// 100 km spans, 20 dB / 4.5 dB amplifiers.
    pub fn ndsf(n_spans: usize) -> Result<Self> {
        Self::new(1.3, 16.7, 0.2, 100.0, n_spans, 20.0, 4.5)
    }

    fn validate(&self) -> Result<()> {
        let finite = [
            self.gamma,
            self.dispersion,
            self.alpha_db_per_km,
            self.span_length,
            self.amp_gain_db,
            self.amp_nf_db,
            self.wavelength,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("link parameters must be finite".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter("gamma must be non-negative".into()));
        }
        if self.alpha_db_per_km < 0.0 {
            return Err(Error::InvalidParameter("attenuation must be non-negative".into()));
        }
        if self.span_length <= 0.0 {
            return Err(Error::InvalidParameter("span length must be positive".into()));
        }
        if self.n_spans < 1 {
            return Err(Error::InvalidParameter("a link needs at least one span".into()));
        }
        if self.amp_gain_db < 0.0 {
            return Err(Error::InvalidParameter("amplifier gain must be non-negative".into()));
        }
        if self.wavelength <= 0.0 {
            return Err(Error::InvalidParameter("wavelength must be positive".into()));
        }
        Ok(())
    }

    fn derive(&mut self) {
        let lambda = self.wavelength;
        self.beta2 = -self.dispersion * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT);
        self.alpha_field = self.alpha_db_per_km * 10f64.ln() / (20.0 * 1000.0);
    }

    pub fn with_spans(&self, n_spans: usize) -> Result<Self> {
        let mut l = self.clone();
        l.n_spans = n_spans;
        l.validate()?;
        Ok(l)
    }

    pub fn with_gamma(&self, gamma_per_w_km: f64) -> Result<Self> {
        let mut l = self.clone();
        l.gamma = gamma_per_w_km * 1e-3;
        l.validate()?;
        Ok(l)
    }

    pub fn with_dispersion(&self, d_ps_nm_km: f64) -> Result<Self> {
        let mut l = self.clone();
        l.dispersion = d_ps_nm_km * 1e-6;
        l.validate()?;
        l.derive();
        Ok(l)
    }

    pub fn with_attenuation(&self, alpha_db_km: f64) -> Result<Self> {
        let mut l = self.clone();
        l.alpha_db_per_km = alpha_db_km;
        l.validate()?;
        l.derive();
        Ok(l)
    }

    pub fn with_amplifier(&self, gain_db: f64, nf_db: f64) -> Result<Self> {
        let mut l = self.clone();
        l.amp_gain_db = gain_db;
        l.amp_nf_db = nf_db;
        l.validate()?;
        Ok(l)
    }

    pub fn with_wavelength_nm(&self, nm: f64) -> Result<Self> {
        let mut l = self.clone();
        l.wavelength = nm * 1e-9;
        l.validate()?;
        l.derive();
        Ok(l)
    }

    pub fn with_dual_polarization(&self, dual: bool) -> Self {
        Self { dual_polarization: dual, ..self.clone() }
    }

    /// Nonlinear coefficient, 1/(W·m).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Group-velocity dispersion, s²/m.
    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    /// Field attenuation, Np/m. Power decays as `exp(-2·alpha_field·z)`.
    pub fn alpha_field(&self) -> f64 {
        self.alpha_field
    }

    pub fn alpha_db_per_km(&self) -> f64 {
        self.alpha_db_per_km
    }

    /// Span length, m.
    pub fn span_length(&self) -> f64 {
        self.span_length
    }

    pub fn n_spans(&self) -> usize {
        self.n_spans
    }

    pub fn amp_gain_db(&self) -> f64 {
        self.amp_gain_db
    }

    pub fn amp_nf_db(&self) -> f64 {
        self.amp_nf_db
    }

    /// Carrier wavelength, m.
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn carrier_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength
    }

    pub fn dual_polarization(&self) -> bool {
        self.dual_polarization
    }

    pub fn span_loss_db(&self) -> f64 {
        self.alpha_db_per_km * self.span_length * 1e-3
    }

    /// Accumulated `β2·z` over the whole link, s².
    pub fn accumulated_dispersion(&self) -> f64 {
        self.beta2 * self.span_length * self.n_spans as f64
    }

    /// Per-polarization ASE PSD added by one amplifier, W/Hz.
    pub fn amplifier_noise_psd(&self) -> f64 {
        let g = db_to_lin(self.amp_gain_db);
        (g - 1.0) * PLANCK * self.carrier_frequency() * db_to_lin(self.amp_nf_db) / 2.0
    }
}

/// How span contributions add up along the link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coherence {
    /// Coherent accumulation through the phased-array factor.
    PhasedArray,
    /// Spans add in power (factor `N_s`).
    IncoherentSum,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FwmKernelSpec {
    pub polarization_coefficient: f64,
    pub coherence: Coherence,
}

impl Default for FwmKernelSpec {
    fn default() -> Self {
        Self { polarization_coefficient: 16.0 / 27.0, coherence: Coherence::PhasedArray }
    }
}

impl FwmKernelSpec {
    pub fn incoherent() -> Self {
        Self { coherence: Coherence::IncoherentSum, ..Self::default() }
    }
}

/// Kernel constants for one link; evaluates the weight as a function of the
/// phase mismatch `Δβ = 4π²β2(f1−f)(f2−f)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FwmKernel {
    scale: f64,
    span_length: f64,
    alpha_power: f64,
    n_spans: usize,
    coherence: Coherence,
    beta2: f64,
}

impl FwmKernel {
    pub(crate) fn new(link: &LinkParameters, spec: &FwmKernelSpec) -> Self {
        Self {
            scale: spec.polarization_coefficient * link.gamma * link.gamma,
            span_length: link.span_length,
            alpha_power: 2.0 * link.alpha_field,
            n_spans: link.n_spans,
            coherence: spec.coherence,
            beta2: link.beta2,
        }
    }

    #[inline]
    pub(crate) fn dbeta(&self, df1: f64, df2: f64) -> f64 {
        4.0 * PI * PI * self.beta2 * (df1 * df2)
    }

    /// `|L(Δβ)|²` with `L = (1 − e^{−2αL_s}e^{jΔβL_s})/(2α − jΔβ)`.
    #[inline]
    fn link_function(&self, dbeta: f64) -> f64 {
        let l = self.span_length;
        let a = self.alpha_power * l;
        let b = dbeta * l;
        let r2 = a * a + b * b;
        // |expm1(z)/z|² for z = −a + jb.
        let ratio = if r2 < 1e-6 {
            // 1 + z/2 + z²/6 + z³/24 + z⁴/120
            let (zr, zi) = (-a, b);
            let (z2r, z2i) = (zr * zr - zi * zi, 2.0 * zr * zi);
            let (z3r, z3i) = (z2r * zr - z2i * zi, z2r * zi + z2i * zr);
            let (z4r, z4i) = (z3r * zr - z3i * zi, z3r * zi + z3i * zr);
            let re = 1.0 + zr / 2.0 + z2r / 6.0 + z3r / 24.0 + z4r / 120.0;
            let im = zi / 2.0 + z2i / 6.0 + z3i / 24.0 + z4i / 120.0;
            re * re + im * im
        } else {
            let e = (-a).exp();
            (1.0 - 2.0 * e * b.cos() + e * e) / r2
        };
        l * l * ratio
    }

    /// `sin²(N x)/sin²(x)` with `x = ΔβL_s/2`, or `N` when incoherent.
    #[inline]
    fn span_factor(&self, dbeta: f64) -> f64 {
        let n = self.n_spans as f64;
        match self.coherence {
            Coherence::IncoherentSum => n,
            Coherence::PhasedArray => {
                if self.n_spans == 1 {
                    return 1.0;
                }
                let x = 0.5 * dbeta * self.span_length;
                let s = x.sin();
                if s.abs() < PHASED_ARRAY_SERIES_THRESHOLD {
                    let eps = x - PI * (x / PI).round();
                    n * n * (1.0 - (n * n - 1.0) * eps * eps / 3.0)
                } else {
                    let sn = (n * x).sin();
                    sn * sn / (s * s)
                }
            }
        }
    }

    #[inline]
    pub(crate) fn weight(&self, dbeta: f64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        self.scale * self.link_function(dbeta) * self.span_factor(dbeta)
    }
}

/// Four-wave-mixing weight for components at `f1`, `f2`, `f1+f2−f`
/// generating at `f`. Units 1/W² so that `S³·w·df1·df2` is W/Hz.
pub fn fwm_weight(f1: f64, f2: f64, f: f64, link: &LinkParameters, kernel: &FwmKernelSpec) -> f64 {
    let k = FwmKernel::new(link, kernel);
    k.weight(k.dbeta(f1 - f, f2 - f))
}

/// Rectangle-rule evaluator of the GN double integral on the tx grid.
///
/// Output points must sit on the tx grid (same `df`, integer offset), so the
/// third factor `S(f1+f2−f)` lands exactly on a sample. The kernel then only
/// depends on the integer product `m·n` of bin offsets and is tabulated when
/// that pays off.
pub(crate) struct GnIntegrator<'a> {
    values: &'a [f64],
    support: Vec<usize>,
    kernel: FwmKernel,
    dbeta_per_product: f64,
    table: Option<Vec<f64>>,
    out_offset: i64,
    n_out: usize,
    df: f64,
}

impl<'a> GnIntegrator<'a> {
    pub(crate) fn new(
        tx: &'a Psd,
        link: &LinkParameters,
        spec: &FwmKernelSpec,
        out_grid: &FrequencyGrid,
    ) -> Result<Self> {
        let grid = tx.grid();
        let out_offset = grid.offset_bins(out_grid)?;
        let values = tx.values();
        let support: Vec<usize> = (0..values.len()).filter(|&k| values[k] > 0.0).collect();
        let kernel = FwmKernel::new(link, spec);
        let df = grid.df();
        let dbeta_per_product = kernel.dbeta(df, df);

        let mut integrator = Self {
            values,
            support,
            kernel,
            dbeta_per_product,
            table: None,
            out_offset,
            n_out: out_grid.len(),
            df,
        };
        integrator.maybe_build_table();
        Ok(integrator)
    }

    fn maybe_build_table(&mut self) {
        let (Some(&lo), Some(&hi)) = (self.support.first(), self.support.last()) else {
            return;
        };
        let x_lo = self.out_offset;
        let x_hi = self.out_offset + self.n_out as i64 - 1;
        let max_off = [lo as i64 - x_lo, lo as i64 - x_hi, hi as i64 - x_lo, hi as i64 - x_hi]
            .iter()
            .map(|v| v.unsigned_abs())
            .max()
            .unwrap_or(0) as usize;
        let Some(entries) = max_off.checked_mul(max_off).map(|v| v + 1) else {
            return;
        };
        let pair_work = self.support.len().saturating_mul(self.support.len()).saturating_mul(self.n_out);
        if entries > KERNEL_TABLE_LIMIT || pair_work < 4 * entries {
            return;
        }
        let k = self.kernel;
        let step = self.dbeta_per_product;
        let table = (0..entries).map(|p| k.weight(step * p as f64)).collect();
        self.table = Some(table);
    }

    #[inline]
    fn weight(&self, product: i64) -> f64 {
        match &self.table {
            Some(t) => t[product.unsigned_abs() as usize],
            None => self.kernel.weight(self.dbeta_per_product * product as f64),
        }
    }

    /// Total NLN PSD at output index `k`.
    fn point_total(&self, k: usize) -> f64 {
        let x = self.out_offset + k as i64;
        let n = self.values.len() as i64;
        let mut acc = 0.0;
        for &i1 in &self.support {
            let m = i1 as i64 - x;
            let s1 = self.values[i1];
            for &i2 in &self.support {
                let j = i1 as i64 + i2 as i64 - x;
                if j < 0 || j >= n {
                    continue;
                }
                let s3 = self.values[j as usize];
                if s3 == 0.0 {
                    continue;
                }
                let w = self.weight(m * (i2 as i64 - x));
                acc += s1 * self.values[i2] * s3 * w;
            }
        }
        acc * self.df * self.df
    }

    /// Per-ordered-triple accumulators at output index `k`, indexed by
    /// `16·l1 + 4·l2 + l3`.
    fn point_categories(&self, k: usize, labels: &[u8]) -> [f64; 64] {
        let x = self.out_offset + k as i64;
        let n = self.values.len() as i64;
        let mut acc = [0.0; 64];
        for &i1 in &self.support {
            let m = i1 as i64 - x;
            let s1 = self.values[i1];
            let l1 = 16 * labels[i1] as usize;
            for &i2 in &self.support {
                let j = i1 as i64 + i2 as i64 - x;
                if j < 0 || j >= n {
                    continue;
                }
                let s3 = self.values[j as usize];
                if s3 == 0.0 {
                    continue;
                }
                let w = self.weight(m * (i2 as i64 - x));
                let idx = l1 + 4 * labels[i2] as usize + labels[j as usize] as usize;
                acc[idx] += s1 * self.values[i2] * s3 * w;
            }
        }
        let df2 = self.df * self.df;
        for a in acc.iter_mut() {
            *a *= df2;
        }
        acc
    }

    pub(crate) fn total(&self) -> Vec<f64> {
        (0..self.n_out).into_par_iter().map(|k| self.point_total(k)).collect()
    }

    pub(crate) fn categorized(&self, labels: &[RegionLabel]) -> Vec<[f64; 64]> {
        let raw: Vec<u8> = labels.iter().map(|l| l.index() as u8).collect();
        (0..self.n_out).into_par_iter().map(|k| self.point_categories(k, &raw)).collect()
    }
}

/// GN-model nonlinear noise PSD of `tx` at the points of `out_grid`.
pub fn nln_psd(tx: &Psd, link: &LinkParameters, kernel: &FwmKernelSpec, out_grid: &FrequencyGrid) -> Result<Psd> {
    let integrator = GnIntegrator::new(tx, link, kernel, out_grid)?;
    Psd::new(*out_grid, integrator.total())
}

/// Flat ASE PSD accumulated over all amplifiers of the link.
pub fn ase_psd(link: &LinkParameters, grid: &FrequencyGrid) -> Psd {
    let loss = link.span_loss_db();
    if (link.amp_gain_db - loss).abs() > 1e-9 {
        log::warn!(
            "amplifier gain {} dB does not compensate span loss {} dB; ASE assumes an isotropic link",
            link.amp_gain_db,
            loss
        );
    }
    let pols = if link.dual_polarization { 2.0 } else { 1.0 };
    let level = pols * link.n_spans as f64 * link.amplifier_noise_psd();
    Psd::new(*grid, vec![level; grid.len()]).expect("ASE level is finite and non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{apsd, build_reference_spectrum, ShapeSpec, SpectralLayout};
    use crate::units::{dbm_to_watt, GHZ, MHZ};

    fn table1_tx(df: f64) -> (Psd, SpectralLayout) {
        let grid = FrequencyGrid::centered(60.0 * GHZ, df).unwrap();
        let layout = SpectralLayout::symmetric(20.0 * GHZ, 10.0 * GHZ, 20.0 * GHZ).unwrap();
        let tx = build_reference_spectrum(&layout, &ShapeSpec::boi_channel(&layout, dbm_to_watt(2.0)), &grid).unwrap();
        (tx, layout)
    }

    #[test]
    fn beta2_matches_ndsf() {
        let link = LinkParameters::ndsf(10).unwrap();
        // -D λ² / (2πc) for 16.7 ps/nm/km at 1550 nm is about -21.3 ps²/km.
        let ps2_per_km = link.beta2() * 1e24 * 1e3;
        assert!((ps2_per_km + 21.3).abs() < 0.05, "{ps2_per_km}");
        let np_per_km = link.alpha_field() * 1e3;
        assert!((np_per_km - 0.2 * 10f64.ln() / 20.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_links_are_rejected() {
        assert!(LinkParameters::new(1.3, 16.7, 0.2, -5.0, 1, 20.0, 4.5).is_err());
        assert!(LinkParameters::new(1.3, 16.7, 0.2, 100.0, 0, 20.0, 4.5).is_err());
        assert!(LinkParameters::new(-1.0, 16.7, 0.2, 100.0, 1, 20.0, 4.5).is_err());
    }

    #[test]
    fn zero_gamma_gives_zero_weight() {
        let link = LinkParameters::ndsf(10).unwrap().with_gamma(0.0).unwrap();
        for (f1, f2, f) in [(0.0, 0.0, 0.0), (1e9, -3e9, 2e9), (2e10, 1e10, -5e9)] {
            assert_eq!(fwm_weight(f1, f2, f, &link, &FwmKernelSpec::default()), 0.0);
        }
    }

    #[test]
    fn single_span_has_unit_phased_array_factor() {
        let link = LinkParameters::ndsf(1).unwrap();
        let k = FwmKernel::new(&link, &FwmKernelSpec::default());
        for dbeta in [0.0, 1e-6, 3e-5, 0.1] {
            assert_eq!(k.span_factor(dbeta), 1.0);
        }
    }

    #[test]
    fn phase_matched_weight_matches_closed_form() {
        let link = LinkParameters::ndsf(10).unwrap();
        let spec = FwmKernelSpec::default();
        let a2 = 2.0 * link.alpha_field();
        let l = link.span_length();
        let n = 10.0;
        let eff = (1.0 - (-a2 * l).exp()) / a2;
        let expect = spec.polarization_coefficient * link.gamma().powi(2) * n * n * eff * eff;
        let exact = fwm_weight(5e9, 12e9, 5e9, &link, &spec);
        assert!((exact / expect - 1.0).abs() < 1e-12);
        let near = fwm_weight(5e9 + 1e3, 12e9, 5e9, &link, &spec);
        assert!((near / expect - 1.0).abs() < 1e-6, "{}", near / expect - 1.0);

        let inc = fwm_weight(5e9, 12e9, 5e9, &link, &FwmKernelSpec::incoherent());
        assert!((inc / (expect / n) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phased_array_singularity_is_finite() {
        let link = LinkParameters::ndsf(7).unwrap();
        let k = FwmKernel::new(&link, &FwmKernelSpec::default());
        // Δβ·L_s = 2π exactly and just next to it.
        let d = 2.0 * PI / link.span_length();
        for dbeta in [d, d * (1.0 + 1e-12), d * (1.0 - 1e-9), 3.0 * d] {
            let v = k.span_factor(dbeta);
            assert!(v.is_finite() && (v - 49.0).abs() < 1e-3, "{v}");
        }
    }

    #[test]
    fn lossless_link_function_limit() {
        let link = LinkParameters::ndsf(1).unwrap().with_attenuation(0.0).unwrap();
        let k = FwmKernel::new(&link, &FwmKernelSpec::default());
        let l = link.span_length();
        assert!((k.link_function(0.0) / (l * l) - 1.0).abs() < 1e-15);
        // sinc² behaviour: |(e^{jb}-1)/(jb)|² = sinc²(b/2)
        let b = 1.3;
        let expect = (2.0 * (b / 2.0f64).sin() / b).powi(2);
        assert!((k.link_function(b / l) / (l * l) / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weight_is_symmetric_in_f1_f2() {
        let link = LinkParameters::ndsf(10).unwrap();
        let spec = FwmKernelSpec::default();
        for (f1, f2, f) in [(1e9, 7e9, -2e9), (-13e9, 4e9, 0.5e9), (20e9, -20e9, 3e9)] {
            assert_eq!(fwm_weight(f1, f2, f, &link, &spec), fwm_weight(f2, f1, f, &link, &spec));
        }
    }

    #[test]
    fn zero_tx_gives_zero_nln() {
        let (tx, _) = table1_tx(500.0 * MHZ);
        let zero = Psd::zeros(*tx.grid());
        let out = nln_psd(&zero, &LinkParameters::ndsf(3).unwrap(), &FwmKernelSpec::default(), tx.grid()).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn misaligned_output_grid_is_rejected() {
        let (tx, _) = table1_tx(500.0 * MHZ);
        let g = tx.grid();
        let half = FrequencyGrid::new(g.f_start() + 0.5 * g.df(), g.df(), 10).unwrap();
        let link = LinkParameters::ndsf(3).unwrap();
        assert!(matches!(
            nln_psd(&tx, &link, &FwmKernelSpec::default(), &half),
            Err(Error::GridMisalignment(_))
        ));
        let finer = FrequencyGrid::new(g.f_start(), 0.5 * g.df(), 10).unwrap();
        assert!(nln_psd(&tx, &link, &FwmKernelSpec::default(), &finer).is_err());
    }

    #[test]
    fn table_and_direct_kernels_agree() {
        let (tx, layout) = table1_tx(250.0 * MHZ);
        let link = LinkParameters::ndsf(10).unwrap();
        let spec = FwmKernelSpec::default();
        let out = tx.grid().restricted(layout.n()).unwrap();
        let mut integ = GnIntegrator::new(&tx, &link, &spec, &out).unwrap();
        assert!(integ.table.is_some());
        let with_table = integ.total();
        integ.table = None;
        let direct = integ.total();
        for (a, b) in with_table.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-13 * b.abs());
        }
    }

    #[test]
    fn cubic_homogeneity() {
        let (tx, layout) = table1_tx(250.0 * MHZ);
        let link = LinkParameters::ndsf(10).unwrap();
        let spec = FwmKernelSpec::default();
        let out = tx.grid().restricted(layout.n()).unwrap();
        let base = nln_psd(&tx, &link, &spec, &out).unwrap();
        for g in [0.5, 2.0, 10.0] {
            let scaled = nln_psd(&tx.scaled(g), &link, &spec, &out).unwrap();
            for (s, b) in scaled.values().iter().zip(base.values()) {
                assert!((s - g * g * g * b).abs() <= 1e-12 * s.abs(), "g = {g}");
            }
        }
    }

    #[test]
    fn shift_covariance() {
        let (tx, _) = table1_tx(250.0 * MHZ);
        let link = LinkParameters::ndsf(5).unwrap();
        let spec = FwmKernelSpec::default();
        let out = FrequencyGrid::new(-8.0 * GHZ, tx.grid().df(), 64).unwrap();
        let base = nln_psd(&tx, &link, &spec, &out).unwrap();
        for bins in [-7i64, 3, 40] {
            let shifted = nln_psd(&tx.shifted(bins), &link, &spec, &out.shifted(bins)).unwrap();
            for (s, b) in shifted.values().iter().zip(base.values()) {
                assert!((s - b).abs() <= 1e-12 * b.abs(), "shift {bins}");
            }
        }
    }

    #[test]
    fn nln_falls_inside_notch_and_is_positive() {
        let (tx, layout) = table1_tx(250.0 * MHZ);
        let link = LinkParameters::ndsf(10).unwrap();
        let out = tx.grid().restricted(layout.n()).unwrap();
        let nln = nln_psd(&tx, &link, &FwmKernelSpec::default(), &out).unwrap();
        assert!(nln.values().iter().all(|v| *v > 0.0));
        // Sanity: notch NLN is a small fraction of the signal density.
        let ratio = apsd(&nln, layout.n()).unwrap() / apsd(&tx, layout.a()).unwrap();
        assert!(ratio > 1e-5 && ratio < 1e-1, "{ratio}");
    }

    #[test]
    fn ase_psd_examples() {
        let grid = FrequencyGrid::centered(10.0 * GHZ, 1.0 * GHZ).unwrap();
        let link = LinkParameters::ndsf(10).unwrap();
        let ase = ase_psd(&link, &grid);
        // Hand-computed amplifier chain: 10 amplifiers, G−1 = 99, NF = 10^0.45,
        // hν at 1550 nm, both polarizations.
        let h = 6.626_070_15e-34;
        let nu = 299_792_458.0 / 1550e-9;
        let expect = 10.0 * 99.0 * h * nu * 10f64.powf(0.45);
        for v in ase.values() {
            assert!((v / expect - 1.0).abs() < 1e-12);
        }
        let single = ase_psd(&link.with_dual_polarization(false), &grid);
        assert!((single.values()[0] * 2.0 / expect - 1.0).abs() < 1e-12);

        let no_gain = link.with_amplifier(0.0, 4.5).unwrap();
        assert!(ase_psd(&no_gain, &grid).is_zero());
    }
}
