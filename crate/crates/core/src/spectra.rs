//! Frequency grids, spectral regions and the reference / perturbed transmit
//! spectra.
//!
//! A [`Psd`] sample at grid point `f_k` stands for the constant density on
//! `[f_k, f_k + df)`. Regions are half-open intervals whose edges sit on grid
//! points, so every band integral is an exact finite sum.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Bins are considered aligned if they agree to this fraction of a bin.
const ALIGN_TOL_BINS: f64 = 1e-6;

/// Uniform frequency grid `f_start + k·df`, `k in 0..n_points`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid {
    f_start: f64,
    df: f64,
    n_points: usize,
}

impl FrequencyGrid {
    pub fn new(f_start: f64, df: f64, n_points: usize) -> Result<Self> {
        if !(df > 0.0 && df.is_finite()) {
            return Err(Error::InvalidGrid(format!("df must be positive, got {df}")));
        }
        if !f_start.is_finite() {
            return Err(Error::InvalidGrid("f_start must be finite".into()));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n_points}")));
        }
        Ok(Self { f_start, df, n_points })
    }

    /// Grid covering `[-span/2, span/2)`.
    pub fn centered(span: f64, df: f64) -> Result<Self> {
        let n = (span / df).round();
        if (n * df - span).abs() > ALIGN_TOL_BINS * df {
            return Err(Error::InvalidGrid(format!("span {span} is not a multiple of df {df}")));
        }
        Self::new(-0.5 * span, df, n as usize)
    }

    pub fn f_start(&self) -> f64 {
        self.f_start
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    /// One past the last grid point's cell.
    pub fn f_end(&self) -> f64 {
        self.freq(self.n_points)
    }

    #[inline]
    pub fn freq(&self, k: usize) -> f64 {
        self.f_start + k as f64 * self.df
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.freq(k))
    }

    /// Signed bin index of an on-grid frequency (may lie outside `0..len`).
    pub fn bin_of(&self, f: f64) -> Result<i64> {
        let x = (f - self.f_start) / self.df;
        let k = x.round();
        if (x - k).abs() > ALIGN_TOL_BINS {
            return Err(Error::OffGrid { freq_hz: f });
        }
        Ok(k as i64)
    }

    /// Index range of the grid points inside `iv`, clipped to the grid.
    pub fn index_range(&self, iv: Interval) -> Result<Range<usize>> {
        let lo = self.bin_of(iv.lo)?.clamp(0, self.n_points as i64) as usize;
        let hi = self.bin_of(iv.hi)?.clamp(0, self.n_points as i64) as usize;
        Ok(lo..hi.max(lo))
    }

    /// Offset of `other`'s first point in bins of `self`. Requires equal `df`
    /// and an integer offset.
    pub fn offset_bins(&self, other: &FrequencyGrid) -> Result<i64> {
        if ((self.df - other.df) / self.df).abs() > 1e-12 {
            return Err(Error::GridMisalignment(format!(
                "df {} vs {}",
                self.df, other.df
            )));
        }
        self.bin_of(other.f_start).map_err(|_| {
            Error::GridMisalignment(format!(
                "start {} is not an integer number of bins from {}",
                other.f_start, self.f_start
            ))
        })
    }

    /// Same start, `factor` times finer spacing, same extent.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.f_start, self.df / factor as f64, self.n_points * factor)
    }

    pub fn shifted(&self, bins: i64) -> Self {
        Self { f_start: self.f_start + bins as f64 * self.df, ..*self }
    }

    /// Sub-grid consisting of the points in `iv`.
    pub fn restricted(&self, iv: Interval) -> Result<Self> {
        let r = self.index_range(iv)?;
        if r.len() < 2 {
            return Err(Error::EmptyRegion);
        }
        Self::new(self.freq(r.start), self.df, r.len())
    }
}

/// Half-open frequency interval `[lo, hi)` in Hz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn centered(center: f64, width: f64) -> Self {
        Self::new(center - 0.5 * width, center + 0.5 * width)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, f: f64) -> bool {
        self.lo <= f && f < self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6e}, {:.6e}) Hz", self.lo, self.hi)
    }
}

/// Spectral region a frequency belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionLabel {
    A,
    B,
    N,
    OB,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 4] = [RegionLabel::A, RegionLabel::B, RegionLabel::N, RegionLabel::OB];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            RegionLabel::A => "A",
            RegionLabel::B => "B",
            RegionLabel::N => "N",
            RegionLabel::OB => "OB",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The `F_A | F_N | F_B` partition of the band of interest; everything else
/// on the grid is `F_OB`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralLayout {
    a: Interval,
    n: Interval,
    b: Interval,
}

impl SpectralLayout {
    /// `a`, `n`, `b` must be non-empty and contiguous in that order.
    pub fn new(a: Interval, n: Interval, b: Interval) -> Result<Self> {
        for (name, iv) in [("F_A", a), ("F_N", n), ("F_B", b)] {
            if iv.is_empty() || !iv.lo.is_finite() || !iv.hi.is_finite() {
                return Err(Error::LayoutMismatch(format!("{name} is empty: {iv}")));
            }
        }
        let tol = 1e-9 * (b.hi - a.lo).abs().max(1.0);
        if (a.hi - n.lo).abs() > tol || (n.hi - b.lo).abs() > tol {
            return Err(Error::LayoutMismatch(
                "F_A, F_N and F_B must be contiguous in that order".into(),
            ));
        }
        Ok(Self { a, n: Interval::new(a.hi, n.hi), b: Interval::new(n.hi, b.hi) })
    }

    /// Constructs the layout and checks every edge against `grid`.
    pub fn on_grid(a: Interval, n: Interval, b: Interval, grid: &FrequencyGrid) -> Result<Self> {
        let layout = Self::new(a, n, b)?;
        layout.check_grid(grid)?;
        Ok(layout)
    }

    /// Notch centred on 0 Hz with `F_A` below and `F_B` above.
    pub fn symmetric(width_a: f64, width_n: f64, width_b: f64) -> Result<Self> {
        let h = 0.5 * width_n;
        Self::new(
            Interval::new(-h - width_a, -h),
            Interval::new(-h, h),
            Interval::new(h, h + width_b),
        )
    }

    pub fn check_grid(&self, grid: &FrequencyGrid) -> Result<()> {
        for f in [self.a.lo, self.a.hi, self.b.lo, self.b.hi] {
            grid.bin_of(f).map_err(|_| {
                Error::LayoutMismatch(format!("edge {f} Hz is not on the grid"))
            })?;
        }
        Ok(())
    }

    pub fn a(&self) -> Interval {
        self.a
    }

    pub fn n(&self) -> Interval {
        self.n
    }

    pub fn b(&self) -> Interval {
        self.b
    }

    pub fn boi(&self) -> Interval {
        Interval::new(self.a.lo, self.b.hi)
    }

    /// Interval of a contiguous region; `None` for `OB`.
    pub fn region(&self, label: RegionLabel) -> Option<Interval> {
        match label {
            RegionLabel::A => Some(self.a),
            RegionLabel::B => Some(self.b),
            RegionLabel::N => Some(self.n),
            RegionLabel::OB => None,
        }
    }

    pub fn label_of(&self, f: f64) -> RegionLabel {
        if self.a.contains(f) {
            RegionLabel::A
        } else if self.n.contains(f) {
            RegionLabel::N
        } else if self.b.contains(f) {
            RegionLabel::B
        } else {
            RegionLabel::OB
        }
    }

    /// Region label of every grid point, computed in bin space so that labels
    /// are exact.
    pub fn labels(&self, grid: &FrequencyGrid) -> Result<Vec<RegionLabel>> {
        self.check_grid(grid)?;
        let mut out = vec![RegionLabel::OB; grid.len()];
        for (label, iv) in [(RegionLabel::A, self.a), (RegionLabel::N, self.n), (RegionLabel::B, self.b)] {
            for k in grid.index_range(iv)? {
                out[k] = label;
            }
        }
        Ok(out)
    }

    /// Mirror map `k -> c - k` on `grid` that swaps `F_A` and `F_B`, when the
    /// layout is symmetric about the notch centre.
    pub fn mirror_center(&self, grid: &FrequencyGrid) -> Result<Option<i64>> {
        self.check_grid(grid)?;
        let (a0, a1) = (grid.bin_of(self.a.lo)?, grid.bin_of(self.a.hi)?);
        let (b0, b1) = (grid.bin_of(self.b.lo)?, grid.bin_of(self.b.hi)?);
        if a1 - a0 != b1 - b0 {
            return Ok(None);
        }
        Ok(Some(a0 + b1 - 1))
    }
}

/// Power spectral density (W/Hz, or dimensionless in the normalized view)
/// sampled on a [`FrequencyGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Psd {
    grid: FrequencyGrid,
    values: Vec<f64>,
}

impl Psd {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidPsd(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidPsd(format!("value {v} is negative or not finite")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        Self { values: vec![0.0; grid.len()], grid }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * gain).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Same values re-anchored on a grid shifted by `bins`.
    pub fn shifted(&self, bins: i64) -> Self {
        Self { grid: self.grid.shifted(bins), values: self.values.clone() }
    }

    /// Pointwise sum; grids must be identical.
    pub fn add(&self, other: &Psd) -> Result<Psd> {
        if self.grid != other.grid {
            return Err(Error::GridMisalignment("cannot add PSDs on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Psd { grid: self.grid, values })
    }

    /// Value at `f` treating the spectrum as zero off-grid.
    pub fn value_at(&self, f: f64) -> f64 {
        let x = ((f - self.grid.f_start) / self.grid.df).floor();
        if x < 0.0 || x >= self.grid.len() as f64 {
            0.0
        } else {
            self.values[x as usize]
        }
    }
}

/// A rectangular channel outside the band of interest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelBand {
    pub center: f64,
    pub width: f64,
    /// Total power, W.
    pub power: f64,
}

impl ChannelBand {
    pub fn interval(&self) -> Interval {
        Interval::centered(self.center, self.width)
    }
}

/// Shape of the reference transmit spectrum: flat sub-carriers on `F_A` and
/// `F_B`, nothing in `F_N`, optional Nyquist neighbours in `F_OB`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShapeSpec {
    /// Power in `F_A`, W.
    pub power_a: f64,
    /// Power in `F_B`, W.
    pub power_b: f64,
    pub out_of_band: Vec<ChannelBand>,
}

impl ShapeSpec {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Band-of-interest channel of `total_power` W with the same density on
    /// `F_A` and `F_B`.
    pub fn boi_channel(layout: &SpectralLayout, total_power: f64) -> Self {
        let (wa, wb) = (layout.a().width(), layout.b().width());
        let h = total_power / (wa + wb);
        Self { power_a: h * wa, power_b: h * wb, out_of_band: Vec::new() }
    }

    /// Adds `count` neighbours on each side at multiples of `spacing`
    /// from the band-of-interest centre.
    pub fn with_neighbors(mut self, layout: &SpectralLayout, count: usize, spacing: f64, width: f64, power: f64) -> Self {
        let c = layout.boi().center();
        for i in 1..=count {
            let off = i as f64 * spacing;
            self.out_of_band.push(ChannelBand { center: c - off, width, power });
            self.out_of_band.push(ChannelBand { center: c + off, width, power });
        }
        self.out_of_band.sort_by(|x, y| x.center.total_cmp(&y.center));
        self
    }
}

/// Builds the reference transmit PSD of `shape` on `grid`.
pub fn build_reference_spectrum(layout: &SpectralLayout, shape: &ShapeSpec, grid: &FrequencyGrid) -> Result<Psd> {
    layout.check_grid(grid)?;
    if !(shape.power_a >= 0.0 && shape.power_b >= 0.0) {
        return Err(Error::InvalidParameter("sub-carrier powers must be non-negative".into()));
    }
    let mut values = vec![0.0; grid.len()];
    let mut fill = |iv: Interval, power: f64| -> Result<()> {
        let h = power / iv.width();
        for k in grid.index_range(iv)? {
            values[k] = h;
        }
        Ok(())
    };
    fill(layout.a(), shape.power_a)?;
    fill(layout.b(), shape.power_b)?;

    let boi = layout.boi();
    for (i, ch) in shape.out_of_band.iter().enumerate() {
        if !(ch.width > 0.0) || !(ch.power >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "out-of-band channel {i}: width and power must be positive"
            )));
        }
        let iv = ch.interval();
        grid.bin_of(iv.lo)?;
        grid.bin_of(iv.hi)?;
        if iv.overlaps(&boi) {
            return Err(Error::OverlappingChannels(format!("channel at {} Hz overlaps F_BOI", ch.center)));
        }
        for other in &shape.out_of_band[..i] {
            if iv.overlaps(&other.interval()) {
                return Err(Error::OverlappingChannels(format!(
                    "channels at {} Hz and {} Hz overlap",
                    other.center, ch.center
                )));
            }
        }
        fill(iv, ch.power)?;
    }
    Psd::new(*grid, values)
}

/// Rectangle-rule integral of `psd` over `region` (W).
pub fn band_power(psd: &Psd, region: Interval) -> Result<f64> {
    let r = psd.grid.index_range(region)?;
    Ok(psd.values[r].iter().sum::<f64>() * psd.grid.df)
}

/// Average power spectral density over `region`.
pub fn apsd(psd: &Psd, region: Interval) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let r = psd.grid.index_range(region)?;
    let n_bins = (region.width() / psd.grid.df).round();
    if r.is_empty() || n_bins < 1.0 {
        return Err(Error::EmptyRegion);
    }
    Ok(psd.values[r].iter().sum::<f64>() / n_bins)
}

/// Scales `psd` so its APSD over `F_BOI` is exactly one.
pub fn normalize_boi(psd: &Psd, layout: &SpectralLayout) -> Result<Psd> {
    layout.check_grid(&psd.grid)?;
    let level = apsd(psd, layout.boi())?;
    if level <= 0.0 {
        return Err(Error::ZeroPower("F_BOI"));
    }
    Ok(psd.scaled(1.0 / level))
}

/// Fractions `(K_A, K_B)` of the band-of-interest power carried by `F_A`
/// and `F_B`.
pub fn relative_powers(psd: &Psd, layout: &SpectralLayout) -> Result<(f64, f64)> {
    layout.check_grid(&psd.grid)?;
    let a = band_power(psd, layout.a())?;
    let b = band_power(psd, layout.b())?;
    let total = a + b + band_power(psd, layout.n())?;
    if total <= 0.0 {
        return Err(Error::ZeroPower("F_BOI"));
    }
    Ok((a / total, b / total))
}

/// Linear power gains applied to `F_A` and `F_B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationPair {
    delta_a: f64,
    delta_b: f64,
}

impl PerturbationPair {
    pub const IDENTITY: PerturbationPair = PerturbationPair { delta_a: 1.0, delta_b: 1.0 };

    pub fn new(delta_a: f64, delta_b: f64) -> Result<Self> {
        for d in [delta_a, delta_b] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter(format!("perturbation gain {d} must be positive")));
            }
        }
        Ok(Self { delta_a, delta_b })
    }

    pub fn from_db(a_db: f64, b_db: f64) -> Result<Self> {
        Self::new(crate::units::db_to_lin(a_db), crate::units::db_to_lin(b_db))
    }

    pub fn delta_a(&self) -> f64 {
        self.delta_a
    }

    pub fn delta_b(&self) -> f64 {
        self.delta_b
    }

    /// Gain applied to `label`; out-of-band and notch are untouched.
    pub fn gain(&self, label: RegionLabel) -> f64 {
        match label {
            RegionLabel::A => self.delta_a,
            RegionLabel::B => self.delta_b,
            RegionLabel::N | RegionLabel::OB => 1.0,
        }
    }

    pub fn then(&self, next: &PerturbationPair) -> PerturbationPair {
        PerturbationPair { delta_a: self.delta_a * next.delta_a, delta_b: self.delta_b * next.delta_b }
    }
}

/// Multiplies `F_A` by `Δ(A)` and `F_B` by `Δ(B)`.
pub fn apply_perturbation(psd: &Psd, layout: &SpectralLayout, p: &PerturbationPair) -> Result<Psd> {
    let mut values = psd.values.clone();
    for k in psd.grid.index_range(layout.a())? {
        values[k] *= p.delta_a;
    }
    for k in psd.grid.index_range(layout.b())? {
        values[k] *= p.delta_b;
    }
    layout.check_grid(&psd.grid)?;
    Ok(Psd { grid: psd.grid, values })
}
