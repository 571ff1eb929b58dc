//! Dual-polarization split-step Fourier simulator with lumped amplifiers
//! and receiver-side PSD/NSR measurement.

mod measure;
mod propagate;
mod waveform;

pub use measure::{measure_nsr, measure_psd, measure_psd_with, periodogram_psd, NsrConfig, WelchConfig};
pub use propagate::{amplify, fwm_step_limit, propagate_link, propagate_link_with, propagate_span, GainMode, SsfmControl, StepControl};
pub use waveform::{
    add_transceiver_noise, read_waveform, synthesize_waveform, write_waveform, FieldWaveform, Modulation,
    WaveformConfig, WAVEFORM_MAGIC, WAVEFORM_VERSION,
};

use num_complex::Complex64;

/// Signed frequency of FFT bin `k` for an `n`-point transform at `sample_rate`.
pub(crate) fn bin_frequency(k: usize, n: usize, sample_rate: f64) -> f64 {
    let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
    k * sample_rate / n as f64
}

pub(crate) fn power(x: &Complex64, y: &Complex64) -> f64 {
    x.norm_sqr() + y.norm_sqr()
}
