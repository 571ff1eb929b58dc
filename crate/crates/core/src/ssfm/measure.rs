use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::bin_frequency;
use super::waveform::FieldWaveform;
use crate::error::{Error, Result};
use crate::gn_model::LinkParameters;
use crate::spectra::{FrequencyGrid, Interval, Psd};

/// Minimum number of averaged segments chosen by the default Welch setup.
const MIN_SEGMENTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WelchConfig {
    /// Samples per segment; `None` picks the largest power of two giving at
    /// least 64 segments.
    pub segment_len: Option<usize>,
    /// Fractional overlap between consecutive segments, in `[0, 1)`.
    pub overlap: f64,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self { segment_len: None, overlap: 0.5 }
    }
}

impl WelchConfig {
    fn hop(&self, len: usize) -> usize {
        ((len as f64 * (1.0 - self.overlap)).round() as usize).max(1)
    }

    fn segments(&self, n: usize, len: usize) -> usize {
        if len > n {
            0
        } else {
            (n - len) / self.hop(len) + 1
        }
    }

    fn resolve(&self, n: usize) -> Result<usize> {
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::InvalidParameter(format!("overlap {} not in [0, 1)", self.overlap)));
        }
        match self.segment_len {
            Some(len) if len == 0 => Err(Error::InvalidParameter("zero segment length".into())),
            Some(len) if len > n => Err(Error::TooFewSamples { samples: n, segment: len }),
            Some(len) => Ok(len),
            None => {
                let mut len = 1usize << (usize::BITS - 1 - n.max(1).leading_zeros());
                while len >= 2 && self.segments(n, len) < MIN_SEGMENTS {
                    len /= 2;
                }
                if len < 2 || self.segments(n, len) < MIN_SEGMENTS {
                    return Err(Error::TooFewSamples { samples: n, segment: 2 * MIN_SEGMENTS });
                }
                Ok(len)
            }
        }
    }
}

fn check_nyquist(grid: &FrequencyGrid, sample_rate: f64) -> Result<()> {
    let nyq = sample_rate / 2.0;
    let tol = 1e-9 * sample_rate;
    if grid.f_start() < -nyq - tol || grid.f_end() > nyq + tol {
        let needed = 2.0 * grid.f_start().abs().max(grid.f_end().abs());
        return Err(Error::NyquistExceeded { needed_hz: needed, sample_rate_hz: sample_rate });
    }
    Ok(())
}

/// Area-weighted transfer of a two-sided spectrum with `len` cells of width
/// `fs/len` (cell `j` covering `[f_j, f_j + fs/len)`) onto `grid`.
fn rebin(spectrum: &[f64], sample_rate: f64, grid: &FrequencyGrid) -> Result<Psd> {
    let len = spectrum.len();
    let delta = sample_rate / len as f64;
    // Cells in ascending frequency starting at the most negative bin.
    let first = len.div_ceil(2);
    let f0 = bin_frequency(first, len, sample_rate);
    let cell = |i: usize| spectrum[(first + i) % len];
    let df = grid.df();
    let mut out = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let lo = grid.freq(k);
        let hi = lo + df;
        let i_lo = ((lo - f0) / delta).floor().max(0.0) as usize;
        let i_hi = (((hi - f0) / delta).ceil().max(0.0) as usize).min(len);
        let mut acc = 0.0;
        for i in i_lo..i_hi {
            let c_lo = f0 + i as f64 * delta;
            let c_hi = c_lo + delta;
            let ov = hi.min(c_hi) - lo.max(c_lo);
            if ov > 0.0 {
                acc += cell(i) * ov;
            }
        }
        out.push(acc / df);
    }
    Psd::new(*grid, out)
}

/// Welch PSD with the default configuration.
pub fn measure_psd(w: &FieldWaveform, grid: &FrequencyGrid) -> Result<Psd> {
    measure_psd_with(w, grid, &WelchConfig::default())
}

/// Averaged Hann-windowed periodograms summed over polarizations, W/Hz.
pub fn measure_psd_with(w: &FieldWaveform, grid: &FrequencyGrid, cfg: &WelchConfig) -> Result<Psd> {
    let fs = w.sample_rate();
    check_nyquist(grid, fs)?;
    let n = w.len();
    let len = cfg.resolve(n)?;
    let hop = cfg.hop(len);
    let count = cfg.segments(n, len);
    let window: Vec<f64> = (0..len).map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / len as f64).cos())).collect();
    let energy: f64 = window.iter().map(|v| v * v).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let mut acc = vec![0.0; len];
    let mut buf = vec![Complex64::default(); len];
    for s in 0..count {
        let start = s * hop;
        for pol in [w.x(), w.y()] {
            for ((b, v), h) in buf.iter_mut().zip(&pol[start..start + len]).zip(&window) {
                *b = v * h;
            }
            fft.process(&mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b.norm_sqr();
            }
        }
    }
    let scale = 1.0 / (count as f64 * fs * energy);
    acc.iter_mut().for_each(|v| *v *= scale);
    rebin(&acc, fs, grid)
}

/// Single full-length rectangular periodogram summed over polarizations.
/// Exact for periodic frames whose tones sit on the frame's bins.
pub fn periodogram_psd(w: &FieldWaveform, grid: &FrequencyGrid) -> Result<Psd> {
    let fs = w.sample_rate();
    check_nyquist(grid, fs)?;
    let n = w.len();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut acc = vec![0.0; n];
    for pol in [w.x(), w.y()] {
        let mut buf = pol.to_vec();
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 1.0 / (n as f64 * fs);
    acc.iter_mut().for_each(|v| *v *= scale);
    rebin(&acc, fs, grid)
}

/// Receiver settings for NSR extraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NsrConfig {
    /// Accumulated `β2·z` to undo, s².
    pub dispersion: f64,
}

impl NsrConfig {
    pub fn back_to_back() -> Self {
        Self { dispersion: 0.0 }
    }

    /// Full compensation of `link` after `spans` spans.
    pub fn after_spans(link: &LinkParameters, spans: usize) -> Self {
        Self { dispersion: link.beta2() * link.span_length() * spans as f64 }
    }
}

fn band_symbols(w: &FieldWaveform, k_lo: i64, m: usize, dispersion: f64) -> [Vec<Complex64>; 2] {
    let n = w.len();
    let fs = w.sample_rate();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(m);
    let mut out = [Vec::with_capacity(m), Vec::with_capacity(m)];
    for (pol, dst) in [w.x(), w.y()].into_iter().zip(out.iter_mut()) {
        let mut spec = pol.to_vec();
        fft.process(&mut spec);
        for i in 0..m {
            let k = (k_lo + i as i64).rem_euclid(n as i64) as usize;
            let omega = 2.0 * PI * bin_frequency(k, n, fs);
            dst.push(spec[k] * Complex64::from_polar(1.0, -dispersion * omega * omega / 2.0));
        }
        ifft.process(dst);
    }
    out
}

/// NSR of one Nyquist sub-carrier after dispersion compensation, matched
/// filtering and a single complex gain alignment to the reference symbols.
pub fn measure_nsr(rx: &FieldWaveform, tx_reference: &FieldWaveform, band: Interval, cfg: &NsrConfig) -> Result<f64> {
    if rx.len() != tx_reference.len() {
        return Err(Error::LengthMismatch(format!(
            "received {} samples, reference {}",
            rx.len(),
            tx_reference.len()
        )));
    }
    if rx.sample_rate() != tx_reference.sample_rate() {
        return Err(Error::LengthMismatch(format!(
            "sample rates {} and {} Hz",
            rx.sample_rate(),
            tx_reference.sample_rate()
        )));
    }
    let n = rx.len();
    let fs = rx.sample_rate();
    let delta = fs / n as f64;
    let to_bin = |f: f64| -> Result<i64> {
        let x = f / delta;
        let r = x.round();
        if (x - r).abs() > 1e-6 {
            return Err(Error::OffGrid { freq_hz: f });
        }
        Ok(r as i64)
    };
    let k_lo = to_bin(band.lo)?;
    let k_hi = to_bin(band.hi)?;
    if k_hi <= k_lo {
        return Err(Error::EmptyRegion);
    }
    if band.lo < -fs / 2.0 || band.hi > fs / 2.0 {
        return Err(Error::NyquistExceeded { needed_hz: 2.0 * band.lo.abs().max(band.hi.abs()), sample_rate_hz: fs });
    }
    let m = (k_hi - k_lo) as usize;
    let r = band_symbols(rx, k_lo, m, cfg.dispersion);
    let s = band_symbols(tx_reference, k_lo, m, 0.0);

    let pairs = || r.iter().flatten().zip(s.iter().flatten());
    let ref_energy: f64 = s.iter().flatten().map(|v| v.norm_sqr()).sum();
    // Band symbols carry m·Σ|X_k|²; the whole frame carries n·Σ|x|².
    let frame_energy = n as f64 * tx_reference.mean_power() * n as f64;
    if ref_energy <= 1e-20 * m as f64 * frame_energy {
        return Err(Error::ZeroPower("reference band"));
    }
    let gain = pairs().map(|(a, b)| a * b.conj()).sum::<Complex64>() / ref_energy;
    let noise: f64 = pairs().map(|(a, b)| (a - gain * b).norm_sqr()).sum();
    let signal = gain.norm_sqr() * ref_energy;
    if signal == 0.0 {
        return Err(Error::ZeroPower("received band"));
    }
    Ok(noise / signal)
}
