//! Line-oriented scenario configuration.
//!
//! Each non-blank line is `key = value`; `#` starts a comment. Physical
//! values carry their unit (`20 GHz`, `2 dBm`, `1.3 /W/km`). Lists are
//! comma separated and ranges are written `a:b` or `a:step:b`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fwnl_core::categories::DEFAULT_INNER_FRACTION;
use fwnl_core::estimator::{db_steps, SINGLE_CHANNEL_APSD, SINGLE_CHANNEL_NSR, WDM_APSD, WDM_NSR};
use fwnl_core::spectra::{build_reference_spectrum, relative_powers, ShapeSpec};
use fwnl_core::ssfm::{fwm_step_limit, GainMode, Modulation, SsfmControl, StepControl, WaveformConfig};
use fwnl_core::units::{db_to_lin, dbm_to_watt, GHZ, MHZ};
use fwnl_core::{CategoryKey, Coherence, FrequencyGrid, FwmKernelSpec, LinkParameters, Psd, Quantity, SpectralLayout};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line of the offending entry, if it can be pinned to one.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Gn,
    Ssfm,
    Both,
}

impl Mode {
    pub fn runs_gn(self) -> bool {
        matches!(self, Mode::Gn | Mode::Both)
    }

    pub fn runs_ssfm(self) -> bool {
        matches!(self, Mode::Ssfm | Mode::Both)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gn" => Ok(Mode::Gn),
            "ssfm" => Ok(Mode::Ssfm),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode '{other}' (expected gn, ssfm or both)")),
        }
    }
}

pub fn parse_quantity(s: &str) -> Result<Quantity, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "nsr" => Ok(Quantity::Nsr),
        "apsd" => Ok(Quantity::Apsd),
        other => Err(format!("unknown fit quantity '{other}' (expected nsr or apsd)")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsdEstimator {
    /// Full-frame rectangular periodogram.
    Periodogram,
    /// Averaged Hann-windowed segments.
    Welch,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    /// Link with as many spans as the longest entry of `spans`.
    pub link: LinkParameters,
    pub kernel: FwmKernelSpec,
    pub layout: SpectralLayout,
    /// Reference power of the band of interest, W.
    pub launch_power: f64,
    /// Channels on each side of the band of interest.
    pub neighbors: usize,
    pub channel_spacing: f64,
    pub oob_width: f64,
    pub oob_power: f64,
    pub grid: FrequencyGrid,
    pub inner_fraction: f64,
    pub waveform: WaveformConfig,
    pub delta_a_db: Vec<f64>,
    pub delta_b_db: Vec<f64>,
    /// Sorted, distinct, all ≥ 1.
    pub spans: Vec<usize>,
    pub mode: Mode,
    pub fit: Quantity,
    pub constant_power: bool,
    pub symmetry_constrained: bool,
    pub realizations: usize,
    /// Linear transceiver NSR; zero disables it.
    pub trx_nsr: f64,
    pub control: SsfmControl,
    pub psd_estimator: PsdEstimator,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        parse_config("").expect("built-in defaults are valid")
    }
}

impl Scenario {
    pub fn shape(&self) -> ShapeSpec {
        ShapeSpec::boi_channel(&self.layout, self.launch_power).with_neighbors(
            &self.layout,
            self.neighbors,
            self.channel_spacing,
            self.oob_width,
            self.oob_power,
        )
    }

    pub fn reference_spectrum(&self) -> fwnl_core::Result<Psd> {
        build_reference_spectrum(&self.layout, &self.shape(), &self.grid)
    }

    /// Fit basis for the configured quantity and channel count.
    pub fn basis(&self) -> Vec<CategoryKey> {
        match (self.fit, self.neighbors) {
            (Quantity::Apsd, 0) => SINGLE_CHANNEL_APSD.to_vec(),
            (Quantity::Apsd, _) => WDM_APSD.to_vec(),
            (Quantity::Nsr, 0) => SINGLE_CHANNEL_NSR.to_vec(),
            (Quantity::Nsr, _) => WDM_NSR.to_vec(),
        }
    }

    /// `(K_A, K_B)` of the reference spectrum.
    pub fn relative_powers(&self) -> fwnl_core::Result<(f64, f64)> {
        relative_powers(&self.reference_spectrum()?, &self.layout)
    }

    pub fn max_spans(&self) -> usize {
        *self.spans.last().expect("span sweep is non-empty")
    }
}

/// Value of a line with its number, for cross-key validation messages.
#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: String,
}

/// Width from the lowest to the highest occupied frequency.
fn occupied_bandwidth(layout: &SpectralLayout, neighbors: usize, spacing: f64, oob_width: f64) -> f64 {
    let boi = layout.boi().width();
    if neighbors == 0 {
        return boi;
    }
    boi.max(2.0 * neighbors as f64 * spacing + oob_width)
}

pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::at(line, format!("expected 'key = value', found '{content}'")));
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::at(line, format!("unknown key '{key}'")));
        }
        if value.is_empty() {
            return Err(ConfigError::at(line, format!("'{key}' has no value")));
        }
        if let Some(prev) = entries.get(&key) {
            return Err(ConfigError::at(line, format!("'{key}' already set on line {}", prev.line)));
        }
        entries.insert(key, Entry { line, value: value.to_string() });
    }
    Builder { entries }.build()
}

const KEYS: &[&str] = &[
    "gamma",
    "dispersion",
    "attenuation",
    "span_length",
    "spans",
    "amp_gain",
    "amp_nf",
    "wavelength",
    "polarization",
    "kernel_coefficient",
    "coherence",
    "width_a",
    "width_n",
    "width_b",
    "launch_power",
    "channels",
    "channel_spacing",
    "oob_symbol_rate",
    "oob_power",
    "grid_resolution",
    "grid_span",
    "inner_fraction",
    "delta_a",
    "delta_b",
    "sample_rate",
    "symbols",
    "symbol_rate",
    "modulation",
    "realizations",
    "ase_noise",
    "trx_nsr",
    "phase_cap",
    "step_size",
    "max_step",
    "gain_mode",
    "mode",
    "fit",
    "constant_power",
    "symmetry_constrained",
    "psd_estimator",
    "seed",
    "output",
];

#[derive(Clone, Copy)]
enum Kind {
    Frequency,
    SymbolRate,
    Length,
    Wavelength,
    Decibel,
    Power,
    Gamma,
    Dispersion,
    Attenuation,
    Angle,
    Percent,
}

impl Kind {
    fn scale(self, unit: &str) -> Option<f64> {
        let u = unit.trim();
        let s = match self {
            Kind::Frequency => match u {
                "Hz" => 1.0,
                "kHz" => 1e3,
                "MHz" => MHZ,
                "GHz" => GHZ,
                "THz" => 1e12,
                _ => return None,
            },
            Kind::SymbolRate => match u {
                "Baud" | "Bd" => 1.0,
                "kBaud" | "kBd" => 1e3,
                "MBaud" | "MBd" => 1e6,
                "GBaud" | "GBd" => 1e9,
                _ => return None,
            },
            Kind::Length => match u {
                "m" => 1.0,
                "km" => 1e3,
                _ => return None,
            },
            Kind::Wavelength => match u {
                "nm" => 1e-9,
                "um" | "µm" => 1e-6,
                _ => return None,
            },
            Kind::Decibel => match u {
                "dB" => 1.0,
                _ => return None,
            },
            Kind::Power => match u {
                "W" => 1.0,
                "mW" => 1e-3,
                "uW" | "µW" => 1e-6,
                _ => return None,
            },
            Kind::Gamma => match u {
                "/W/km" | "1/W/km" => 1.0,
                "/W/m" | "1/W/m" => 1e3,
                _ => return None,
            },
            Kind::Dispersion => match u {
                "ps/nm/km" | "ps/(nm km)" => 1.0,
                _ => return None,
            },
            Kind::Attenuation => match u {
                "dB/km" => 1.0,
                _ => return None,
            },
            Kind::Angle => match u {
                "rad" => 1.0,
                "mrad" => 1e-3,
                _ => return None,
            },
            Kind::Percent => match u {
                "%" => 0.01,
                _ => return None,
            },
        };
        Some(s)
    }

    fn expected(self) -> &'static str {
        match self {
            Kind::Frequency => "Hz, kHz, MHz, GHz or THz",
            Kind::SymbolRate => "Baud, kBaud, MBaud or GBaud",
            Kind::Length => "m or km",
            Kind::Wavelength => "nm or um",
            Kind::Decibel => "dB",
            Kind::Power => "dBm, W, mW or uW",
            Kind::Gamma => "/W/km or /W/m",
            Kind::Dispersion => "ps/nm/km",
            Kind::Attenuation => "dB/km",
            Kind::Angle => "rad or mrad",
            Kind::Percent => "%",
        }
    }
}

/// Splits `"1.3 /W/km"` into `("1.3", "/W/km")`.
fn split_unit(v: &str) -> (&str, &str) {
    let end = v.rfind(|c: char| c.is_ascii_digit() || c == '.').map_or(0, |i| i + 1);
    (v[..end].trim(), v[end..].trim())
}

fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: f64 = n.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
        let d: f64 = d.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
        if d == 0.0 {
            return Err(format!("'{s}' divides by zero"));
        }
        return Ok(n / d);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

/// Expands `a:b`, `a:step:b` or a comma-separated list.
fn parse_series(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let nums = parts.iter().map(|p| parse_number(p)).collect::<Result<Vec<f64>, _>>()?;
        let (lo, step, hi) = match nums.as_slice() {
            [lo, hi] => (*lo, 1.0, *hi),
            [lo, step, hi] => (*lo, *step, *hi),
            _ => return Err(format!("range '{s}' must be a:b or a:step:b")),
        };
        return db_steps(lo, step, hi).map_err(|e| format!("range '{s}': {e}"));
    }
    s.split(',').map(parse_number).collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        other => Err(format!("'{other}' is not a boolean (true/false, on/off)")),
    }
}

struct Builder {
    entries: BTreeMap<String, Entry>,
}

impl Builder {
    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    /// Error pinned to the first of `keys` that appears in the file.
    fn err_on(&self, keys: &[&str], message: impl Into<String>) -> ConfigError {
        match keys.iter().find_map(|k| self.line(k)) {
            Some(l) => ConfigError::at(l, message),
            None => ConfigError::general(message),
        }
    }

    fn with<T>(&self, key: &str, default: T, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(e) => f(&e.value).map_err(|m| ConfigError::at(e.line, format!("{key}: {m}"))),
        }
    }

    fn quantity(&self, key: &str, kind: Kind, default: f64) -> Result<f64, ConfigError> {
        self.with(key, default, |v| {
            let (num, unit) = split_unit(v);
            if unit.is_empty() {
                return Err(format!("missing unit (expected {})", kind.expected()));
            }
            if matches!(kind, Kind::Power) && unit == "dBm" {
                return Ok(dbm_to_watt(parse_number(num)?));
            }
            let scale = kind.scale(unit).ok_or_else(|| format!("unit '{unit}' not accepted (expected {})", kind.expected()))?;
            Ok(parse_number(num)? * scale)
        })
    }

    fn positive(&self, key: &str, kind: Kind, default: f64) -> Result<f64, ConfigError> {
        let v = self.quantity(key, kind, default)?;
        if v <= 0.0 {
            return Err(self.err_on(&[key], format!("{key} must be positive")));
        }
        Ok(v)
    }

    fn non_negative(&self, key: &str, kind: Kind, default: f64) -> Result<f64, ConfigError> {
        let v = self.quantity(key, kind, default)?;
        if v < 0.0 {
            return Err(self.err_on(&[key], format!("{key} must not be negative")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        self.with(key, default, |v| {
            let (_, unit) = split_unit(v);
            if !unit.is_empty() {
                return Err(format!("a count takes no unit, found '{unit}'"));
            }
            v.trim().parse::<u64>().map_err(|_| format!("'{v}' is not a non-negative integer"))
        })
    }

    fn db_series(&self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
        self.with(key, default, |v| {
            let (num, unit) = split_unit(v);
            if unit != "dB" {
                return Err(if unit.is_empty() { "missing unit (expected dB)".into() } else { format!("unit '{unit}' not accepted (expected dB)") });
            }
            let s = parse_series(num)?;
            if s.is_empty() {
                return Err("empty list".into());
            }
            Ok(s)
        })
    }

    fn build(self) -> Result<Scenario, ConfigError> {
        let gamma = self.non_negative("gamma", Kind::Gamma, 1.3)?;
        let dispersion = self.quantity("dispersion", Kind::Dispersion, 16.7)?;
        let attenuation = self.non_negative("attenuation", Kind::Attenuation, 0.2)?;
        let span_length = self.positive("span_length", Kind::Length, 100e3)? / 1e3;
        let amp_gain = self.non_negative("amp_gain", Kind::Decibel, 20.0)?;
        let amp_nf = self.quantity("amp_nf", Kind::Decibel, 4.5)?;
        let wavelength = self.positive("wavelength", Kind::Wavelength, 1550e-9)?;

        let spans = self.with("spans", (1..=30).collect::<Vec<usize>>(), |v| {
            let (_, unit) = split_unit(v);
            if !unit.is_empty() {
                return Err(format!("a span count takes no unit, found '{unit}'"));
            }
            let mut out = Vec::new();
            for x in parse_series(v)? {
                if x < 1.0 || x.fract() != 0.0 {
                    return Err(format!("span count {x} must be a positive integer"));
                }
                out.push(x as usize);
            }
            out.sort_unstable();
            out.dedup();
            Ok(out)
        })?;
        let max_spans = *spans.last().ok_or_else(|| self.err_on(&["spans"], "span sweep is empty"))?;

        let dual = self.with("polarization", true, |v| match v.trim().to_ascii_lowercase().as_str() {
            "dual" => Ok(true),
            "single" => Ok(false),
            other => Err(format!("'{other}' is not dual or single")),
        })?;
        let link = LinkParameters::new(gamma, dispersion, attenuation, span_length, max_spans, amp_gain, amp_nf)
            .and_then(|l| l.with_wavelength_nm(wavelength * 1e9))
            .map(|l| l.with_dual_polarization(dual))
            .map_err(|e| self.err_on(&["gamma", "dispersion", "attenuation", "span_length", "amp_gain", "amp_nf"], e.to_string()))?;

        let default_kernel = FwmKernelSpec::default();
        let coefficient = self.with("kernel_coefficient", default_kernel.polarization_coefficient, |v| {
            let (num, unit) = split_unit(v);
            if !unit.is_empty() {
                return Err(format!("a coefficient takes no unit, found '{unit}'"));
            }
            let c = parse_number(num)?;
            if c < 0.0 {
                return Err("must not be negative".into());
            }
            Ok(c)
        })?;
        let coherence = self.with("coherence", default_kernel.coherence, |v| match v.trim().to_ascii_lowercase().as_str() {
            "coherent" | "phased_array" => Ok(Coherence::PhasedArray),
            "incoherent" => Ok(Coherence::IncoherentSum),
            other => Err(format!("'{other}' is not coherent or incoherent")),
        })?;
        let kernel = FwmKernelSpec { polarization_coefficient: coefficient, coherence };

        let width_a = self.positive("width_a", Kind::Frequency, 20.0 * GHZ)?;
        let width_n = self.positive("width_n", Kind::Frequency, 10.0 * GHZ)?;
        let width_b = self.positive("width_b", Kind::Frequency, 20.0 * GHZ)?;
        let layout = SpectralLayout::symmetric(width_a, width_n, width_b)
            .map_err(|e| self.err_on(&["width_a", "width_n", "width_b"], e.to_string()))?;

        let launch_power = self.positive("launch_power", Kind::Power, dbm_to_watt(2.0))?;
        let channels = self.count("channels", 1)?;
        if channels == 0 || channels % 2 == 0 {
            return Err(self.err_on(&["channels"], "channels must be odd: the band of interest sits in the middle"));
        }
        let neighbors = ((channels - 1) / 2) as usize;
        let channel_spacing = self.positive("channel_spacing", Kind::Frequency, 75.0 * GHZ)?;
        let oob_width = self.positive("oob_symbol_rate", Kind::SymbolRate, 50.0 * GHZ)?;
        let oob_power = self.positive("oob_power", Kind::Power, launch_power)?;

        let resolution = self.positive("grid_resolution", Kind::Frequency, 50.0 * MHZ)?;
        let default_span = if neighbors == 0 { 160.0 * GHZ } else { 400.0 * GHZ };
        let grid_span = self.positive("grid_span", Kind::Frequency, default_span)?;
        let grid = FrequencyGrid::centered(grid_span, resolution)
            .map_err(|e| self.err_on(&["grid_span", "grid_resolution"], e.to_string()))?;
        layout
            .check_grid(&grid)
            .map_err(|e| self.err_on(&["width_a", "width_n", "width_b", "grid_resolution", "grid_span"], e.to_string()))?;

        let inner_fraction = self.quantity("inner_fraction", Kind::Percent, DEFAULT_INNER_FRACTION)?;
        if !(inner_fraction > 0.0 && inner_fraction <= 1.0) {
            return Err(self.err_on(&["inner_fraction"], "inner_fraction must be in (0, 100] %"));
        }

        let table_grid = db_steps(-2.0, 1.0, 2.0).expect("valid range");
        let delta_a_db = self.db_series("delta_a", table_grid.clone())?;
        let delta_b_db = self.db_series("delta_b", table_grid)?;

        let default_fs = if neighbors == 0 { 160.0 * GHZ } else { 320.0 * GHZ };
        let sample_rate = self.positive("sample_rate", Kind::Frequency, default_fs)?;
        let n_symbols = self.count("symbols", 8192)? as usize;
        let symbol_rate = self.positive("symbol_rate", Kind::SymbolRate, 20.0 * GHZ)?;
        let modulation = self.with("modulation", Modulation::Gaussian, |v| v.parse::<Modulation>().map_err(|e| e.to_string()))?;
        let seed = self.count("seed", 1)?;
        let waveform = WaveformConfig::new(sample_rate, n_symbols, symbol_rate, modulation, seed)
            .map_err(|e| self.err_on(&["symbols", "symbol_rate", "sample_rate"], e.to_string()))?;

        let scenario_shape = ShapeSpec::boi_channel(&layout, launch_power).with_neighbors(
            &layout,
            neighbors,
            channel_spacing,
            oob_width,
            oob_power,
        );
        let highest = scenario_shape
            .out_of_band
            .iter()
            .map(|c| c.interval().lo.abs().max(c.interval().hi.abs()))
            .fold(layout.boi().lo.abs().max(layout.boi().hi.abs()), f64::max);
        if sample_rate < 2.0 * highest {
            return Err(self.err_on(
                &["sample_rate", "channels", "channel_spacing"],
                format!("sample rate {sample_rate} Hz is below twice the highest occupied frequency {highest} Hz"),
            ));
        }
        if grid.f_start() > -highest || grid.f_end() < highest {
            return Err(self.err_on(&["grid_span", "channels"], "grid_span does not cover every channel"));
        }
        build_reference_spectrum(&layout, &scenario_shape, &grid).map_err(|e| {
            self.err_on(&["channel_spacing", "oob_symbol_rate", "channels", "grid_resolution"], e.to_string())
        })?;
        let bin = waveform.bin_width();
        for f in [layout.a().lo, layout.a().hi, layout.b().lo, layout.b().hi] {
            let x = f / bin;
            if (x - x.round()).abs() > 1e-6 {
                return Err(self.err_on(
                    &["width_a", "width_n", "width_b", "symbols", "symbol_rate"],
                    format!("band edge {f} Hz is not a multiple of the frame resolution {bin} Hz"),
                ));
            }
        }

        let realizations = self.count("realizations", 8)? as usize;
        if realizations == 0 {
            return Err(self.err_on(&["realizations"], "realizations must be at least 1"));
        }
        let noise_enabled = self.with("ase_noise", true, parse_bool)?;
        let trx_nsr = self.with("trx_nsr", 0.0, |v| {
            if v.trim().eq_ignore_ascii_case("off") {
                return Ok(0.0);
            }
            let (num, unit) = split_unit(v);
            if unit != "dB" {
                return Err("expected 'off' or a value in dB".into());
            }
            Ok(db_to_lin(parse_number(num)?))
        })?;

        let phase_cap = self.positive("phase_cap", Kind::Angle, 0.02)?;
        let step = match self.entries.get("step_size") {
            Some(_) => StepControl::Fixed { length: self.positive("step_size", Kind::Length, 1.0)? },
            None => StepControl::Adaptive { phase_cap },
        };
        let max_step = match self.entries.get("max_step") {
            Some(_) => Some(self.positive("max_step", Kind::Length, 1.0)?),
            None => Some(fwm_step_limit(&link, occupied_bandwidth(&layout, neighbors, channel_spacing, oob_width))),
        };
        let gain_mode = self.with("gain_mode", GainMode::Constant, |v| match v.trim().to_ascii_lowercase().as_str() {
            "constant" => Ok(GainMode::Constant),
            "track" | "track_power" => Ok(GainMode::TrackPower),
            other => Err(format!("'{other}' is not constant or track")),
        })?;
        let control = SsfmControl { step, max_step, noise_enabled, seed, gain_mode };
        control.validate().map_err(|e| self.err_on(&["phase_cap", "step_size", "max_step"], e.to_string()))?;

        let mode = self.with("mode", Mode::Both, |v| v.parse())?;
        let fit = self.with("fit", Quantity::Apsd, parse_quantity)?;
        let constant_power = self.with("constant_power", false, parse_bool)?;
        let symmetry_constrained = self.with("symmetry_constrained", false, parse_bool)?;
        let psd_estimator = self.with("psd_estimator", PsdEstimator::Periodogram, |v| {
            match v.trim().to_ascii_lowercase().as_str() {
                "periodogram" => Ok(PsdEstimator::Periodogram),
                "welch" => Ok(PsdEstimator::Welch),
                other => Err(format!("'{other}' is not periodogram or welch")),
            }
        })?;
        let output = self.with("output", None, |v| Ok(Some(PathBuf::from(v.trim()))))?;

        Ok(Scenario {
            link,
            kernel,
            layout,
            launch_power,
            neighbors,
            channel_spacing,
            oob_width,
            oob_power,
            grid,
            inner_fraction,
            waveform,
            delta_a_db,
            delta_b_db,
            spans,
            mode,
            fit,
            constant_power,
            symmetry_constrained,
            realizations,
            trx_nsr,
            control,
            psd_estimator,
            seed,
            output,
        })
    }
}
