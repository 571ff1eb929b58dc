use std::io::{Read, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use super::bin_frequency;
use crate::error::{Error, Result};
use crate::spectra::{Psd, RegionLabel, SpectralLayout};

pub const WAVEFORM_MAGIC: [u8; 4] = *b"FWNL";
pub const WAVEFORM_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

/// Stream offset separating transceiver noise from data symbols.
const TRX_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Modulation {
    /// Circular complex Gaussian, unit mean power.
    Gaussian,
    Qpsk,
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Modulation::Gaussian),
            "qpsk" => Ok(Modulation::Qpsk),
            other => Err(Error::InvalidParameter(format!("unknown modulation {other:?}"))),
        }
    }
}

impl Modulation {
    fn draw(self, rng: &mut ChaCha8Rng) -> Complex64 {
        match self {
            Modulation::Gaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            Modulation::Qpsk => {
                let bits: u8 = rng.random();
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Complex64::new(if bits & 1 == 0 { s } else { -s }, if bits & 2 == 0 { s } else { -s })
            }
        }
    }
}

/// Time-domain frame parameters.
///
/// The frame lasts `n_symbols / symbol_rate` and is periodic; every occupied
/// band carries one symbol per frequency bin of the frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveformConfig {
    pub sample_rate: f64,
    pub n_symbols: usize,
    /// Sub-carrier symbol rate, Baud.
    pub symbol_rate: f64,
    pub modulation: Modulation,
    pub seed: u64,
}

impl WaveformConfig {
    pub fn new(sample_rate: f64, n_symbols: usize, symbol_rate: f64, modulation: Modulation, seed: u64) -> Result<Self> {
        let cfg = Self { sample_rate, n_symbols, symbol_rate, modulation, seed };
        cfg.n_samples()?;
        Ok(cfg)
    }

    pub fn frame_duration(&self) -> f64 {
        self.n_symbols as f64 / self.symbol_rate
    }

    /// Frequency spacing of the frame's DFT bins.
    pub fn bin_width(&self) -> f64 {
        self.symbol_rate / self.n_symbols as f64
    }

    pub fn n_samples(&self) -> Result<usize> {
        if !(self.sample_rate > 0.0 && self.symbol_rate > 0.0 && self.sample_rate.is_finite()) || self.n_symbols == 0 {
            return Err(Error::InvalidParameter(format!(
                "sample rate {} Hz, symbol rate {} Bd, {} symbols",
                self.sample_rate, self.symbol_rate, self.n_symbols
            )));
        }
        let n = self.sample_rate * self.frame_duration();
        let rounded = n.round();
        if (n - rounded).abs() > 1e-6 * n.max(1.0) || rounded < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "frame of {} symbols at {} Bd is not an integer number of samples at {} Hz",
                self.n_symbols, self.symbol_rate, self.sample_rate
            )));
        }
        Ok(rounded as usize)
    }
}

/// Sampled dual-polarization field, √W.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldWaveform {
    x: Vec<Complex64>,
    y: Vec<Complex64>,
    sample_rate: f64,
    reference_power: f64,
}

impl FieldWaveform {
    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>, sample_rate: f64, reference_power: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(format!("polarizations of {} and {} samples", x.len(), y.len())));
        }
        if x.is_empty() {
            return Err(Error::LengthMismatch("empty waveform".into()));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample rate {sample_rate}")));
        }
        if x.iter().chain(&y).any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite field sample".into()));
        }
        Ok(Self { x, y, sample_rate, reference_power })
    }

    pub fn zeros(n: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![Complex64::default(); n], vec![Complex64::default(); n], sample_rate, 0.0)
    }

    pub fn x(&self) -> &[Complex64] {
        &self.x
    }

    pub fn y(&self) -> &[Complex64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Launch power the waveform was synthesized for, W.
    pub fn reference_power(&self) -> f64 {
        self.reference_power
    }

    /// Mean power summed over both polarizations, W.
    pub fn mean_power(&self) -> f64 {
        let e: f64 = self.x.iter().zip(&self.y).map(|(a, b)| super::power(a, b)).sum();
        e / self.len() as f64
    }

    pub(crate) fn from_parts_unchecked(x: Vec<Complex64>, y: Vec<Complex64>, sample_rate: f64, reference_power: f64) -> Self {
        Self { x, y, sample_rate, reference_power }
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<Complex64>, &mut Vec<Complex64>) {
        (&mut self.x, &mut self.y)
    }

    pub fn into_parts(self) -> (Vec<Complex64>, Vec<Complex64>) {
        (self.x, self.y)
    }
}

/// Occupied bands of the frame: contiguous nonzero runs of the target,
/// split at region boundaries. Returns `(first fft index order, psd per bin)`.
fn bands(cfg: &WaveformConfig, n: usize, layout: &SpectralLayout, target: &Psd) -> Result<Vec<(Vec<usize>, Vec<f64>)>> {
    let df = cfg.bin_width();
    let nyquist = cfg.sample_rate / 2.0;
    let grid = target.grid();
    let mut extent: f64 = 0.0;
    for (k, v) in target.values().iter().enumerate() {
        if *v > 0.0 {
            extent = extent.max(grid.freq(k).abs()).max((grid.freq(k) + grid.df()).abs());
        }
    }
    if extent > nyquist * (1.0 + 1e-12) {
        return Err(Error::NyquistExceeded { needed_hz: 2.0 * extent, sample_rate_hz: cfg.sample_rate });
    }

    // Bins in ascending signed frequency.
    let order: Vec<usize> = (n.div_ceil(2)..n).chain(0..n.div_ceil(2)).collect();
    let mut out = Vec::new();
    let mut current: Option<(RegionLabel, Vec<usize>, Vec<f64>)> = None;
    for k in order {
        let mid = bin_frequency(k, n, cfg.sample_rate) + df / 2.0;
        let s = target.value_at(mid);
        let label = layout.label_of(mid);
        match (&mut current, s > 0.0) {
            (Some((l, idx, psd)), true) if *l == label => {
                idx.push(k);
                psd.push(s);
            }
            (_, true) => {
                if let Some((_, idx, psd)) = current.take() {
                    out.push((idx, psd));
                }
                current = Some((label, vec![k], vec![s]));
            }
            (_, false) => {
                if let Some((_, idx, psd)) = current.take() {
                    out.push((idx, psd));
                }
            }
        }
    }
    if let Some((_, idx, psd)) = current.take() {
        out.push((idx, psd));
    }
    Ok(out)
}

fn synthesize_streams(
    cfg: &WaveformConfig,
    layout: &SpectralLayout,
    target: &Psd,
    stream_offset: u64,
    modulation: Modulation,
) -> Result<FieldWaveform> {
    let n = cfg.n_samples()?;
    let df = cfg.bin_width();
    let bands = bands(cfg, n, layout, target)?;
    let mut planner = FftPlanner::<f64>::new();
    let mut spectra = [vec![Complex64::default(); n], vec![Complex64::default(); n]];

    for (band, (idx, psd)) in bands.iter().enumerate() {
        let m = idx.len();
        let fft = planner.plan_fft_forward(m);
        for (pol, spectrum) in spectra.iter_mut().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(stream_offset + 2 * band as u64 + pol as u64);
            let mut symbols: Vec<Complex64> = (0..m).map(|_| modulation.draw(&mut rng)).collect();
            fft.process(&mut symbols);
            for ((&k, &s), v) in idx.iter().zip(psd).zip(&symbols) {
                // E|X_k|² = N² · (S/2) · df, split evenly over polarizations.
                spectrum[k] = v * (n as f64 * (s / 2.0 * df / m as f64).sqrt());
            }
        }
    }

    let ifft = planner.plan_fft_inverse(n);
    let scale = 1.0 / n as f64;
    for s in spectra.iter_mut() {
        ifft.process(s);
        s.iter_mut().for_each(|v| *v *= scale);
    }
    let [x, y] = spectra;
    let total: f64 = target.values().iter().sum::<f64>() * target.grid().df();
    FieldWaveform::new(x, y, cfg.sample_rate, total)
}

/// Nyquist-shaped dual-polarization waveform whose expected PSD is `target`.
///
/// Each occupied band (a nonzero run of `target` within one layout region)
/// carries independent symbols per polarization, seeded from `cfg.seed` by
/// band index so that rescaling the target reuses the same symbols.
pub fn synthesize_waveform(cfg: &WaveformConfig, layout: &SpectralLayout, target: &Psd) -> Result<FieldWaveform> {
    synthesize_streams(cfg, layout, target, 0, cfg.modulation)
}

/// Adds Gaussian noise whose PSD is `nsr` times `target` in every band.
pub fn add_transceiver_noise(
    w: &FieldWaveform,
    cfg: &WaveformConfig,
    layout: &SpectralLayout,
    target: &Psd,
    nsr: f64,
) -> Result<FieldWaveform> {
    if !(nsr >= 0.0 && nsr.is_finite()) {
        return Err(Error::InvalidParameter(format!("transceiver NSR {nsr}")));
    }
    let noise = synthesize_streams(cfg, layout, target, TRX_STREAM_OFFSET, Modulation::Gaussian)?;
    if noise.len() != w.len() {
        return Err(Error::LengthMismatch(format!("noise of {} samples for {}", noise.len(), w.len())));
    }
    let g = nsr.sqrt();
    let x = w.x.iter().zip(&noise.x).map(|(a, b)| a + b * g).collect();
    let y = w.y.iter().zip(&noise.y).map(|(a, b)| a + b * g).collect();
    Ok(FieldWaveform::from_parts_unchecked(x, y, w.sample_rate, w.reference_power))
}

/// Writes the binary dump: a 32-byte header (magic, version, sample rate,
/// sample count, reference power) then X and Y as interleaved re/im f64,
/// all little-endian.
pub fn write_waveform<W: Write>(w: &FieldWaveform, mut out: W) -> Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&WAVEFORM_MAGIC);
    header[4..8].copy_from_slice(&WAVEFORM_VERSION.to_le_bytes());
    header[8..16].copy_from_slice(&w.sample_rate.to_le_bytes());
    header[16..24].copy_from_slice(&(w.len() as u64).to_le_bytes());
    header[24..32].copy_from_slice(&w.reference_power.to_le_bytes());
    out.write_all(&header)?;
    let mut buf = Vec::with_capacity(16 * w.len());
    for pol in [&w.x, &w.y] {
        buf.clear();
        for v in pol.iter() {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_waveform<R: Read>(mut input: R) -> Result<FieldWaveform> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header).map_err(|e| Error::WaveformFormat(format!("header: {e}")))?;
    if header[0..4] != WAVEFORM_MAGIC {
        return Err(Error::WaveformFormat("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != WAVEFORM_VERSION {
        return Err(Error::WaveformFormat(format!("unsupported version {version}")));
    }
    let sample_rate = f64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    let len = u64::from_le_bytes(header[16..24].try_into().expect("8 bytes"));
    let reference_power = f64::from_le_bytes(header[24..32].try_into().expect("8 bytes"));
    let len = usize::try_from(len).map_err(|_| Error::WaveformFormat(format!("length {len}")))?;
    let mut read_pol = || -> Result<Vec<Complex64>> {
        let mut raw = vec![0u8; 16 * len];
        input.read_exact(&mut raw).map_err(|e| Error::WaveformFormat(format!("samples: {e}")))?;
        Ok(raw
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..16].try_into().expect("8 bytes")),
                )
            })
            .collect())
    };
    let x = read_pol()?;
    let y = read_pol()?;
    FieldWaveform::new(x, y, sample_rate, reference_power).map_err(|e| Error::WaveformFormat(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{band_power, build_reference_spectrum, FrequencyGrid, Interval, ShapeSpec};
    use crate::units::{dbm_to_watt, GHZ, MHZ};

    fn layout() -> SpectralLayout {
        SpectralLayout::symmetric(20.0 * GHZ, 10.0 * GHZ, 20.0 * GHZ).unwrap()
    }

    fn reference(power: f64) -> Psd {
        let grid = FrequencyGrid::centered(80.0 * GHZ, 50.0 * MHZ).unwrap();
        build_reference_spectrum(&layout(), &ShapeSpec::boi_channel(&layout(), power), &grid).unwrap()
    }

    fn cfg(n_symbols: usize, seed: u64) -> WaveformConfig {
        WaveformConfig::new(160.0 * GHZ, n_symbols, 20.0 * GHZ, Modulation::Gaussian, seed).unwrap()
    }

    fn spectrum_power(w: &FieldWaveform) -> Vec<f64> {
        let n = w.len();
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let mut p = vec![0.0; n];
        for pol in [w.x(), w.y()] {
            let mut s = pol.to_vec();
            fft.process(&mut s);
            for (acc, v) in p.iter_mut().zip(&s) {
                *acc += v.norm_sqr() / (n as f64 * n as f64);
            }
        }
        p
    }

    #[test]
    fn frame_size() {
        assert_eq!(cfg(8192, 0).n_samples().unwrap(), 65536);
        assert!(WaveformConfig::new(160.0 * GHZ, 8191, 20.0 * GHZ, Modulation::Gaussian, 0).is_ok());
        assert!(WaveformConfig::new(100.0 * GHZ, 4, 30.0 * GHZ, Modulation::Gaussian, 0).is_err());
        assert!(WaveformConfig::new(0.0, 3, 30.0 * GHZ, Modulation::Gaussian, 0).is_err());
    }

    #[test]
    fn power_and_notch() {
        let p = dbm_to_watt(2.0);
        let w = synthesize_waveform(&cfg(1 << 13, 3), &layout(), &reference(p)).unwrap();
        assert!((w.mean_power() / p).log10().abs() * 10.0 < 0.1);
        assert!((w.reference_power() / p - 1.0).abs() < 1e-12);

        let spec = spectrum_power(&w);
        let df = cfg(1 << 13, 3).bin_width();
        let n = w.len();
        let band_level: f64 = (0..n)
            .filter(|&k| Interval::new(5.0 * GHZ, 25.0 * GHZ).contains(bin_frequency(k, n, w.sample_rate())))
            .map(|k| spec[k])
            .sum::<f64>()
            / (20.0 * GHZ / df);
        let notch_max = (0..n)
            .filter(|&k| bin_frequency(k, n, w.sample_rate()).abs() < 4.25 * GHZ)
            .map(|k| spec[k])
            .fold(0.0, f64::max);
        assert!(notch_max <= band_level * 1e-4, "{notch_max} vs {band_level}");
    }

    #[test]
    fn large_frame_matches_total_power() {
        let p = dbm_to_watt(0.0);
        let w = synthesize_waveform(&cfg(1 << 16, 9), &layout(), &reference(p)).unwrap();
        let db = 10.0 * (w.mean_power() / p).log10();
        assert!(db.abs() < 0.05, "{db}");
    }

    #[test]
    fn single_carrier_is_rectangular() {
        let grid = FrequencyGrid::centered(80.0 * GHZ, 50.0 * MHZ).unwrap();
        let psd = build_reference_spectrum(
            &layout(),
            &ShapeSpec { power_a: 0.0, power_b: 0.0, out_of_band: vec![] },
            &grid,
        )
        .unwrap();
        let mut v = psd.into_values();
        for k in grid.index_range(Interval::centered(0.0, 20.0 * GHZ)).unwrap() {
            v[k] = 1e-12;
        }
        let psd = Psd::new(grid, v).unwrap();
        let c = cfg(1 << 12, 1);
        let w = synthesize_waveform(&c, &layout(), &psd).unwrap();
        let spec = spectrum_power(&w);
        let n = w.len();
        for k in 0..n {
            let f = bin_frequency(k, n, w.sample_rate());
            let inside = (-10.0 * GHZ..10.0 * GHZ).contains(&f);
            if !inside {
                assert!(spec[k] < 1e-30, "{f}");
            }
        }
        let measured: f64 = spec.iter().sum();
        assert!((measured / band_power(&psd, grid_iv(&grid)).unwrap() - 1.0).abs() < 0.1);
    }

    fn grid_iv(g: &FrequencyGrid) -> Interval {
        Interval::new(g.f_start(), g.f_end())
    }

    #[test]
    fn qpsk_has_constant_symbol_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert!((Modulation::Qpsk.draw(&mut rng).norm_sqr() - 1.0).abs() < 1e-15);
        }
        assert_eq!("QPSK".parse::<Modulation>().unwrap(), Modulation::Qpsk);
        assert!("16qam".parse::<Modulation>().is_err());
    }

    #[test]
    fn zero_target_gives_zero_waveform() {
        let w = synthesize_waveform(&cfg(512, 0), &layout(), &reference(0.0)).unwrap();
        assert!(w.x().iter().chain(w.y()).all(|v| *v == Complex64::default()));
    }

    #[test]
    fn nyquist_violation() {
        let c = WaveformConfig::new(40.0 * GHZ, 512, 20.0 * GHZ, Modulation::Gaussian, 0).unwrap();
        assert!(matches!(
            synthesize_waveform(&c, &layout(), &reference(1e-3)),
            Err(Error::NyquistExceeded { .. })
        ));
    }

    #[test]
    fn deterministic_and_scale_covariant() {
        let c = cfg(1024, 77);
        let a = synthesize_waveform(&c, &layout(), &reference(1e-3)).unwrap();
        let b = synthesize_waveform(&c, &layout(), &reference(1e-3)).unwrap();
        assert_eq!(a, b);
        let d = synthesize_waveform(&c, &layout(), &reference(4e-3)).unwrap();
        for (u, v) in a.x().iter().zip(d.x()) {
            assert!((u * 2.0 - v).norm() <= 1e-12 * v.norm().max(1e-9));
        }
        let other = synthesize_waveform(&cfg(1024, 78), &layout(), &reference(1e-3)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn transceiver_noise_power() {
        let c = cfg(1 << 14, 4);
        let p = 1e-3;
        let w = synthesize_waveform(&c, &layout(), &reference(p)).unwrap();
        let noisy = add_transceiver_noise(&w, &c, &layout(), &reference(p), 0.01).unwrap();
        let diff: f64 = noisy.x().iter().zip(w.x()).chain(noisy.y().iter().zip(w.y())).map(|(a, b)| (a - b).norm_sqr()).sum();
        let ratio = diff / w.len() as f64 / p;
        assert!((ratio / 0.01 - 1.0).abs() < 0.05, "{ratio}");
        assert!(add_transceiver_noise(&w, &c, &layout(), &reference(p), -1.0).is_err());
    }

    #[test]
    fn dump_round_trip_and_layout() {
        let w = synthesize_waveform(&cfg(256, 2), &layout(), &reference(1e-3)).unwrap();
        let mut buf = Vec::new();
        write_waveform(&w, &mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 2 * 16 * w.len());
        assert_eq!(&buf[0..4], b"FWNL");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 160.0 * GHZ);
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), w.len() as u64);
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), w.x()[0].re);
        assert_eq!(f64::from_le_bytes(buf[40..48].try_into().unwrap()), w.x()[0].im);
        let y0 = 32 + 16 * w.len();
        assert_eq!(f64::from_le_bytes(buf[y0..y0 + 8].try_into().unwrap()), w.y()[0].re);
        assert_eq!(read_waveform(&buf[..]).unwrap(), w);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_waveform(&bad[..]), Err(Error::WaveformFormat(_))));
        assert!(matches!(read_waveform(&buf[..100]), Err(Error::WaveformFormat(_))));
    }

    #[test]
    fn mismatched_polarizations_rejected() {
        assert!(FieldWaveform::new(vec![Complex64::default(); 3], vec![Complex64::default(); 2], 1.0, 0.0).is_err());
        assert!(FieldWaveform::new(vec![Complex64::new(f64::NAN, 0.0)], vec![Complex64::default()], 1.0, 0.0).is_err());
    }
}
