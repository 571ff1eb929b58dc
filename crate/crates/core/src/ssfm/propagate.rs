use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use super::waveform::FieldWaveform;
use super::{bin_frequency, power};
use crate::error::{Error, Result};
use crate::gn_model::LinkParameters;
use crate::units::{db_to_lin, PLANCK};

/// Manakov nonlinear coefficient relative to `γ`.
const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

/// Largest accepted nonlinear phase per step, rad.
const MAX_STEP_PHASE: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    /// Step chosen so the peak nonlinear phase stays below `phase_cap` rad.
    Adaptive { phase_cap: f64 },
    /// Fixed step length, m.
    Fixed { length: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainMode {
    /// Every amplifier applies the configured gain.
    Constant,
    /// Gain restores the waveform's reference launch power.
    TrackPower,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsfmControl {
    pub step: StepControl,
    /// Optional upper bound on any step, m.
    pub max_step: Option<f64>,
    pub noise_enabled: bool,
    pub seed: u64,
    pub gain_mode: GainMode,
}

impl Default for SsfmControl {
    fn default() -> Self {
        Self {
            step: StepControl::Adaptive { phase_cap: 0.02 },
            max_step: None,
            noise_enabled: false,
            seed: 0,
            gain_mode: GainMode::Constant,
        }
    }
}

impl SsfmControl {
    pub fn validate(&self) -> Result<()> {
        match self.step {
            StepControl::Adaptive { phase_cap } if !(phase_cap > 0.0 && phase_cap <= 0.1) => {
                return Err(Error::InvalidParameter(format!("phase cap {phase_cap} rad not in (0, 0.1]")));
            }
            StepControl::Fixed { length } if !(length > 0.0 && length.is_finite()) => {
                return Err(Error::InvalidParameter(format!("step length {length} m")));
            }
            _ => {}
        }
        if let Some(m) = self.max_step {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidParameter(format!("max step {m} m")));
            }
        }
        Ok(())
    }
}

/// Longest step for which four-wave mixing between components up to
/// `bandwidth / 2` apart accumulates less than `2π` of phase mismatch.
/// Longer steps alias the mismatch and produce spurious mixing products.
pub fn fwm_step_limit(link: &LinkParameters, bandwidth: f64) -> f64 {
    let half = bandwidth / 2.0;
    let rate = 2.0 * PI * link.beta2().abs() * half * half;
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

/// `∫₀ʰ e^{−a z} dz`.
fn effective_length(a: f64, h: f64) -> f64 {
    if a * h < 1e-12 {
        h
    } else {
        -(-a * h).exp_m1() / a
    }
}

struct SpanPropagator {
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    omega2: Vec<f64>,
    factor: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SpanPropagator {
    fn new(n: usize, sample_rate: f64) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let omega2 = (0..n).map(|k| (2.0 * PI * bin_frequency(k, n, sample_rate)).powi(2)).collect();
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        Self {
            fft,
            ifft,
            omega2,
            factor: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    fn forward(&mut self, v: &mut [Complex64]) {
        self.fft.process_with_scratch(v, &mut self.scratch);
    }

    fn inverse(&mut self, v: &mut [Complex64]) {
        self.ifft.process_with_scratch(v, &mut self.scratch);
        let s = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|c| *c *= s);
    }

    /// Dispersion and loss over `len` metres, applied in the frequency domain.
    fn linear(&mut self, x: &mut [Complex64], y: &mut [Complex64], beta2: f64, alpha_field: f64, len: f64) {
        if len == 0.0 {
            return;
        }
        let decay = (-alpha_field * len).exp();
        for (f, w2) in self.factor.iter_mut().zip(&self.omega2) {
            *f = Complex64::from_polar(decay, beta2 * w2 * len / 2.0);
        }
        for ((a, b), f) in x.iter_mut().zip(y.iter_mut()).zip(&self.factor) {
            *a *= f;
            *b *= f;
        }
    }

    fn run(&mut self, w: FieldWaveform, link: &LinkParameters, ctrl: &SsfmControl) -> Result<FieldWaveform> {
        let span = link.span_length();
        let beta2 = link.beta2();
        let a_field = link.alpha_field();
        let a_power = 2.0 * a_field;
        let k_nl = MANAKOV_FACTOR * link.gamma();
        let fs = w.sample_rate();
        let reference = w.reference_power();
        let (mut x, mut y) = w.into_parts();

        let mut peak = x.iter().zip(&y).map(|(a, b)| power(a, b)).fold(0.0, f64::max);
        self.forward(&mut x);
        self.forward(&mut y);

        let mut z = 0.0;
        let mut pending = 0.0;
        loop {
            let remaining = span - z;
            let h = self.step_length(peak, remaining, k_nl, a_power, ctrl)?;
            self.linear(&mut x, &mut y, beta2, a_field, pending + h / 2.0);
            self.inverse(&mut x);
            self.inverse(&mut y);

            // Midpoint power scaled to the exact exponential integral over the step.
            let h_eff = if a_power * h < 1e-12 { h } else { 2.0 * (a_power * h / 2.0).sinh() / a_power };
            let mut mid_peak: f64 = 0.0;
            for (a, b) in x.iter_mut().zip(y.iter_mut()) {
                let p = power(a, b);
                mid_peak = mid_peak.max(p);
                let rot = Complex64::from_polar(1.0, k_nl * p * h_eff);
                *a *= rot;
                *b *= rot;
            }
            self.forward(&mut x);
            self.forward(&mut y);

            z += h;
            pending = h / 2.0;
            if span - z <= 1e-9 * span {
                break;
            }
            peak = mid_peak * (-a_power * h / 2.0).exp();
        }
        self.linear(&mut x, &mut y, beta2, a_field, pending);
        self.inverse(&mut x);
        self.inverse(&mut y);
        Ok(FieldWaveform::from_parts_unchecked(x, y, fs, reference))
    }

    fn step_length(&self, peak: f64, remaining: f64, k_nl: f64, a_power: f64, ctrl: &SsfmControl) -> Result<f64> {
        let cap_len = ctrl.max_step.unwrap_or(f64::INFINITY).min(remaining);
        match ctrl.step {
            StepControl::Fixed { length } => {
                let h = length.min(cap_len);
                let phase = k_nl * peak * effective_length(a_power, h);
                if phase > MAX_STEP_PHASE {
                    return Err(Error::StepTooLarge { phase_rad: phase });
                }
                Ok(h)
            }
            StepControl::Adaptive { phase_cap } => {
                let rate = k_nl * peak;
                if rate <= 0.0 {
                    return Ok(cap_len);
                }
                let budget = phase_cap / rate;
                let h = if a_power == 0.0 {
                    budget
                } else if a_power * budget >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-a_power * budget).ln_1p() / a_power
                };
                Ok(h.min(cap_len))
            }
        }
    }
}

/// One fiber span by the symmetric split-step method.
pub fn propagate_span(w: FieldWaveform, link: &LinkParameters, ctrl: &SsfmControl) -> Result<FieldWaveform> {
    ctrl.validate()?;
    SpanPropagator::new(w.len(), w.sample_rate()).run(w, link, ctrl)
}

fn amplify_stream(mut w: FieldWaveform, link: &LinkParameters, ctrl: &SsfmControl, stream: u64) -> FieldWaveform {
    let configured = db_to_lin(link.amp_gain_db());
    let gain = match ctrl.gain_mode {
        GainMode::Constant => configured,
        GainMode::TrackPower => {
            let p = w.mean_power();
            if p > 0.0 && w.reference_power() > 0.0 {
                w.reference_power() / p
            } else {
                configured
            }
        }
    };
    let sqrt_g = gain.sqrt();
    let fs = w.sample_rate();
    let (x, y) = w.parts_mut();
    x.iter_mut().chain(y.iter_mut()).for_each(|v| *v *= sqrt_g);

    if ctrl.noise_enabled && gain > 1.0 {
        let psd_per_pol = (gain - 1.0) * PLANCK * link.carrier_frequency() * db_to_lin(link.amp_nf_db()) / 2.0;
        let sigma = (psd_per_pol * fs / 2.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(ctrl.seed);
        rng.set_stream(stream);
        for v in x.iter_mut().chain(y.iter_mut()) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re, im) * sigma;
        }
    }
    w
}

/// Lumped amplifier at the end of a span; noise uses the first stream of
/// `ctrl.seed`.
pub fn amplify(w: FieldWaveform, link: &LinkParameters, ctrl: &SsfmControl) -> FieldWaveform {
    amplify_stream(w, link, ctrl, 0)
}

/// All spans of the link, each followed by its amplifier.
pub fn propagate_link(w: FieldWaveform, link: &LinkParameters, ctrl: &SsfmControl) -> Result<FieldWaveform> {
    propagate_link_with(w, link, ctrl, |_, _| Ok(()))
}

/// As [`propagate_link`], calling `observer(span_count, &field)` after every
/// amplifier. Amplifier `i` draws its noise from stream `i` of `ctrl.seed`.
pub fn propagate_link_with<F>(
    w: FieldWaveform,
    link: &LinkParameters,
    ctrl: &SsfmControl,
    mut observer: F,
) -> Result<FieldWaveform>
where
    F: FnMut(usize, &FieldWaveform) -> Result<()>,
{
    ctrl.validate()?;
    let mut prop = SpanPropagator::new(w.len(), w.sample_rate());
    let mut w = w;
    for span in 0..link.n_spans() {
        w = prop.run(w, link, ctrl)?;
        w = amplify_stream(w, link, ctrl, span as u64);
        observer(span + 1, &w)?;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_field(n: usize, seed: u64, power: f64) -> FieldWaveform {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (power / 4.0).sqrt();
        let mut draw = || -> Vec<Complex64> {
            (0..n).map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * s).collect()
        };
        let x = draw();
        let y = draw();
        FieldWaveform::new(x, y, 100e9, power).unwrap()
    }

    fn energy(w: &FieldWaveform) -> f64 {
        w.mean_power()
    }

    fn spectrum(v: &[Complex64]) -> Vec<Complex64> {
        let mut s = v.to_vec();
        FftPlanner::<f64>::new().plan_fft_forward(s.len()).process(&mut s);
        s
    }

    #[test]
    fn control_validation() {
        assert!(SsfmControl::default().validate().is_ok());
        let bad = SsfmControl { step: StepControl::Adaptive { phase_cap: 0.2 }, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SsfmControl { step: StepControl::Fixed { length: 0.0 }, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SsfmControl { max_step: Some(-1.0), ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fwm_step_limit_scales_inverse_square() {
        let link = LinkParameters::ndsf(1).unwrap();
        let wide = fwm_step_limit(&link, 200e9);
        assert!((wide - 1.0 / (2.0 * PI * link.beta2().abs() * 1e22)).abs() < 1e-9 * wide);
        assert!((700.0..800.0).contains(&wide));
        assert!((fwm_step_limit(&link, 100e9) / wide - 4.0).abs() < 1e-12);
        let flat = link.with_dispersion(0.0).unwrap();
        assert!(fwm_step_limit(&flat, 200e9).is_infinite());
    }

    #[test]
    fn linear_lossless_preserves_spectrum_magnitude() {
        let link = LinkParameters::ndsf(1).unwrap().with_gamma(0.0).unwrap().with_attenuation(0.0).unwrap();
        let w = random_field(1024, 1, 1e-3);
        let out = propagate_span(w.clone(), &link, &SsfmControl::default()).unwrap();
        for (a, b) in spectrum(w.x()).iter().zip(spectrum(out.x()).iter()) {
            assert!((a.norm() - b.norm()).abs() <= 1e-12 * a.norm().max(1e-6));
        }
        assert!((energy(&out) / energy(&w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_loss() {
        let link = LinkParameters::ndsf(1).unwrap().with_gamma(0.0).unwrap();
        let w = random_field(512, 2, 1e-3);
        let out = propagate_span(w.clone(), &link, &SsfmControl::default()).unwrap();
        let db = 10.0 * (energy(&out) / energy(&w)).log10();
        assert!((db + 20.0).abs() < 1e-10, "{db}");
    }

    #[test]
    fn self_phase_rotation_of_a_tone() {
        let link = LinkParameters::ndsf(1).unwrap().with_dispersion(0.0).unwrap().with_attenuation(0.0).unwrap();
        let p: f64 = 5e-3;
        let n = 64;
        let w = FieldWaveform::new(vec![Complex64::new(p.sqrt(), 0.0); n], vec![Complex64::default(); n], 100e9, p).unwrap();
        let out = propagate_span(w, &link, &SsfmControl::default()).unwrap();
        let expected = MANAKOV_FACTOR * link.gamma() * p * link.span_length();
        for v in out.x() {
            assert!((v.norm_sqr() / p - 1.0).abs() < 1e-12);
            let phase_err = (v.arg() - expected.rem_euclid(2.0 * PI) + PI).rem_euclid(2.0 * PI) - PI;
            assert!(phase_err.abs() < 1e-9, "{} vs {expected}", v.arg());
        }
        assert!(out.y().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn lossless_nonlinear_conserves_energy_for_any_step() {
        let link = LinkParameters::ndsf(1).unwrap().with_attenuation(0.0).unwrap().with_gamma(5.0).unwrap();
        let w = random_field(2048, 3, 2e-3);
        for ctrl in [
            SsfmControl::default(),
            SsfmControl { step: StepControl::Adaptive { phase_cap: 0.1 }, ..Default::default() },
            SsfmControl { step: StepControl::Fixed { length: 250.0 }, ..Default::default() },
        ] {
            let out = propagate_span(w.clone(), &link, &ctrl).unwrap();
            assert!((energy(&out) / energy(&w) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn oversized_fixed_step_is_rejected() {
        let link = LinkParameters::ndsf(1).unwrap();
        let w = random_field(256, 4, 0.5);
        let ctrl = SsfmControl { step: StepControl::Fixed { length: 50e3 }, ..Default::default() };
        assert!(matches!(propagate_span(w, &link, &ctrl), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn noiseless_amplifier_scales() {
        let link = LinkParameters::ndsf(1).unwrap();
        let w = random_field(128, 5, 1e-3);
        let out = amplify(w.clone(), &link, &SsfmControl::default());
        for (a, b) in w.x().iter().zip(out.x()) {
            assert!((a * 10.0 - b).norm() <= 1e-15 * b.norm());
        }
    }

    #[test]
    fn unity_gain_adds_no_noise() {
        let link = LinkParameters::ndsf(1).unwrap().with_amplifier(0.0, 4.5).unwrap();
        let w = random_field(128, 6, 1e-3);
        let ctrl = SsfmControl { noise_enabled: true, ..Default::default() };
        assert_eq!(amplify(w.clone(), &link, &ctrl), w);
    }

    #[test]
    fn amplifier_noise_power() {
        let link = LinkParameters::ndsf(1).unwrap();
        let n = 1 << 16;
        let w = FieldWaveform::zeros(n, 160e9).unwrap();
        let ctrl = SsfmControl { noise_enabled: true, seed: 9, ..Default::default() };
        let out = amplify(w, &link, &ctrl);
        let expected = 2.0 * link.amplifier_noise_psd() * 160e9;
        assert!((energy(&out) / expected - 1.0).abs() < 0.02);
    }

    #[test]
    fn single_span_link_is_span_then_amplifier() {
        let link = LinkParameters::ndsf(1).unwrap();
        let w = random_field(512, 7, 2e-3);
        let ctrl = SsfmControl { noise_enabled: true, seed: 3, ..Default::default() };
        let a = propagate_link(w.clone(), &link, &ctrl).unwrap();
        let b = amplify(propagate_span(w, &link, &ctrl).unwrap(), &link, &ctrl);
        assert_eq!(a, b);
    }

    #[test]
    fn transparent_linear_link_only_disperses() {
        let link = LinkParameters::ndsf(3).unwrap().with_gamma(0.0).unwrap();
        let w = random_field(1024, 8, 1e-3);
        let out = propagate_link(w.clone(), &link, &SsfmControl::default()).unwrap();
        assert!((energy(&out) / energy(&w) - 1.0).abs() < 1e-9);
        let (si, so) = (spectrum(w.x()), spectrum(out.x()));
        for k in 0..w.len() {
            let f = bin_frequency(k, w.len(), w.sample_rate());
            let phase = link.accumulated_dispersion() * (2.0 * PI * f).powi(2) / 2.0;
            let expect = si[k] * Complex64::from_polar(1.0, phase);
            assert!((expect - so[k]).norm() <= 1e-9 * si[k].norm().max(1e-9));
        }
    }

    #[test]
    fn observer_sees_every_span_and_determinism_holds() {
        let link = LinkParameters::ndsf(3).unwrap();
        let w = random_field(256, 10, 1e-3);
        let ctrl = SsfmControl { noise_enabled: true, seed: 21, ..Default::default() };
        let mut seen = Vec::new();
        let a = propagate_link_with(w.clone(), &link, &ctrl, |s, f| {
            seen.push((s, f.mean_power()));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), vec![1, 2, 3]);
        let b = propagate_link(w, &link, &ctrl).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tracking_gain_restores_reference_power() {
        let link = LinkParameters::ndsf(2).unwrap().with_amplifier(15.0, 4.5).unwrap();
        let w = random_field(512, 11, 1e-3);
        let ctrl = SsfmControl { gain_mode: GainMode::TrackPower, ..Default::default() };
        let out = propagate_link(w, &link, &ctrl).unwrap();
        assert!((out.mean_power() / 1e-3 - 1.0).abs() < 1e-12);
    }
}
