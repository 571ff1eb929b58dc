//! Region-conditioned GN integration: permutation and multiset noise
//! categories, their APSD/NSR, and the mirror-symmetry checks.
//!
//! All 64 ordered label triples are accumulated in a single pass of the GN
//! double sum, so any partition of the categories adds back to the
//! unconditioned integral up to rounding.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gn_model::{FwmKernelSpec, GnIntegrator, LinkParameters};
use crate::spectra::{apsd, band_power, FrequencyGrid, Interval, PerturbationPair, Psd, SpectralLayout};

pub use crate::spectra::RegionLabel;

use RegionLabel::{A, B, N, OB};

/// Default fraction of the notch that is integrated; the edges are dropped.
pub const DEFAULT_INNER_FRACTION: f64 = 0.85;

/// Noise category: a 3-multiset of source regions, or one of the
/// perturbation-independent sentinels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CategoryKey {
    /// Sorted ascending (`A < B < N < OB`).
    Nln([RegionLabel; 3]),
    Ase,
    Trx,
}

impl CategoryKey {
    pub const AAA: CategoryKey = CategoryKey::Nln([A, A, A]);
    pub const BAA: CategoryKey = CategoryKey::Nln([A, A, B]);
    pub const BBA: CategoryKey = CategoryKey::Nln([A, B, B]);
    pub const BBB: CategoryKey = CategoryKey::Nln([B, B, B]);
    pub const OB_OB_A: CategoryKey = CategoryKey::Nln([A, OB, OB]);
    pub const OB_OB_B: CategoryKey = CategoryKey::Nln([B, OB, OB]);
    pub const OB_A_A: CategoryKey = CategoryKey::Nln([A, A, OB]);
    pub const OB_B_B: CategoryKey = CategoryKey::Nln([B, B, OB]);
    pub const OB_A_B: CategoryKey = CategoryKey::Nln([A, B, OB]);
    pub const OB_OB_OB: CategoryKey = CategoryKey::Nln([OB, OB, OB]);

    pub fn nln(a: RegionLabel, b: RegionLabel, c: RegionLabel) -> Self {
        let mut t = [a, b, c];
        t.sort();
        CategoryKey::Nln(t)
    }

    pub fn labels(&self) -> Option<[RegionLabel; 3]> {
        match self {
            CategoryKey::Nln(t) => Some(*t),
            _ => None,
        }
    }

    pub fn multiplicity(&self, label: RegionLabel) -> u32 {
        self.labels().map_or(0, |t| t.iter().filter(|l| **l == label).count() as u32)
    }

    pub fn is_nln(&self) -> bool {
        matches!(self, CategoryKey::Nln(_))
    }

    /// Distinct ordered arrangements of the multiset.
    pub fn arrangements(&self) -> Vec<[RegionLabel; 3]> {
        let Some([x, y, z]) = self.labels() else {
            return Vec::new();
        };
        let mut out = vec![
            [x, y, z],
            [x, z, y],
            [y, x, z],
            [y, z, x],
            [z, x, y],
            [z, y, x],
        ];
        out.sort();
        out.dedup();
        out
    }

    /// The four multisets over `{A, B}`.
    pub fn intra() -> [CategoryKey; 4] {
        [Self::AAA, Self::BAA, Self::BBA, Self::BBB]
    }

    /// All ten multisets over `{A, B, OB}`.
    pub fn all_without_notch() -> Vec<CategoryKey> {
        let labels = [A, B, OB];
        let mut out = Vec::new();
        for i in 0..3 {
            for j in i..3 {
                for k in j..3 {
                    out.push(CategoryKey::Nln([labels[i], labels[j], labels[k]]));
                }
            }
        }
        out
    }
}

impl fmt::Display for CategoryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategoryKey::Nln([x, y, z]) => write!(f, "[{z},{y},{x}]"),
            CategoryKey::Ase => f.write_str("ASE"),
            CategoryKey::Trx => f.write_str("TRX"),
        }
    }
}

impl FromStr for CategoryKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_uppercase().as_str() {
            "ASE" => return Ok(CategoryKey::Ase),
            "TRX" => return Ok(CategoryKey::Trx),
            _ => {}
        }
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .or_else(|| t.strip_prefix('(').and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| Error::InvalidParameter(format!("bad category {s:?}")))?;
        let labels: Vec<RegionLabel> = inner
            .split(',')
            .map(|p| match p.trim().to_ascii_uppercase().as_str() {
                "A" => Ok(A),
                "B" => Ok(B),
                "N" => Ok(N),
                "OB" => Ok(OB),
                other => Err(Error::InvalidParameter(format!("bad region label {other:?}"))),
            })
            .collect::<Result<_>>()?;
        match labels[..] {
            [a, b, c] => Ok(CategoryKey::nln(a, b, c)),
            _ => Err(Error::InvalidParameter(format!("category {s:?} needs three labels"))),
        }
    }
}

/// Which quantity a decomposition holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// Average PSD, W/Hz.
    Apsd,
    /// Noise-to-signal ratio, dimensionless.
    Nsr,
}

/// Category → value map. Small negative values coming out of a fit are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseDecomposition {
    pub quantity: Quantity,
    pub values: BTreeMap<CategoryKey, f64>,
}

impl NoiseDecomposition {
    pub fn new(quantity: Quantity) -> Self {
        Self { quantity, values: BTreeMap::new() }
    }

    pub fn get(&self, key: CategoryKey) -> Option<f64> {
        self.values.get(&key).copied()
    }

    pub fn require(&self, key: CategoryKey) -> Result<f64> {
        self.get(key).ok_or_else(|| Error::MissingCategory(key.to_string()))
    }

    pub fn insert(&mut self, key: CategoryKey, value: f64) {
        self.values.insert(key, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (CategoryKey, f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }
}

#[inline]
fn triple_index(t: [RegionLabel; 3]) -> usize {
    16 * t[0].index() + 4 * t[1].index() + t[2].index()
}

/// All 64 ordered-triple NLN spectra on one output grid.
#[derive(Clone, Debug)]
pub struct CategoryTable {
    grid: FrequencyGrid,
    cells: Vec<[f64; 64]>,
}

impl CategoryTable {
    pub fn compute(
        tx: &Psd,
        layout: &SpectralLayout,
        link: &LinkParameters,
        kernel: &FwmKernelSpec,
        out_grid: &FrequencyGrid,
    ) -> Result<Self> {
        let labels = layout.labels(tx.grid())?;
        let integrator = GnIntegrator::new(tx, link, kernel, out_grid)?;
        Ok(Self { grid: *out_grid, cells: integrator.categorized(&labels) })
    }

    /// Table on the tx-grid points spanning `region`.
    pub fn for_region(
        tx: &Psd,
        layout: &SpectralLayout,
        link: &LinkParameters,
        kernel: &FwmKernelSpec,
        region: Interval,
    ) -> Result<Self> {
        let out = output_grid_for(tx, region)?;
        Self::compute(tx, layout, link, kernel, &out)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn permutation(&self, t: [RegionLabel; 3]) -> Psd {
        let i = triple_index(t);
        Psd::new(self.grid, self.cells.iter().map(|c| c[i]).collect()).expect("non-negative sums")
    }

    /// Sum over the distinct arrangements of `key`. Sentinel keys have no
    /// NLN and yield zero.
    pub fn multiset(&self, key: CategoryKey) -> Psd {
        let idx: Vec<usize> = key.arrangements().into_iter().map(triple_index).collect();
        let values = self.cells.iter().map(|c| idx.iter().map(|&i| c[i]).sum()).collect();
        Psd::new(self.grid, values).expect("non-negative sums")
    }

    pub fn total(&self) -> Psd {
        Psd::new(self.grid, self.cells.iter().map(|c| c.iter().sum()).collect()).expect("non-negative sums")
    }

    /// APSD of a multiset over `region`, which must lie inside the table grid.
    pub fn apsd(&self, key: CategoryKey, region: Interval) -> Result<f64> {
        apsd(&self.multiset(key), region)
    }

    /// Total NLN PSD of the spectrum rescaled by `pair`. Every ordered triple
    /// scales with the product of its three region gains.
    pub fn perturbed_total(&self, pair: &PerturbationPair) -> Psd {
        let mut factors = [0.0; 64];
        for (i, f) in factors.iter_mut().enumerate() {
            let l = |k: usize| RegionLabel::from_index(k).expect("label index");
            *f = pair.gain(l(i / 16)) * pair.gain(l(i / 4 % 4)) * pair.gain(l(i % 4));
        }
        let values = self.cells.iter().map(|c| c.iter().zip(&factors).map(|(v, f)| v * f).sum()).collect();
        Psd::new(self.grid, values).expect("non-negative sums")
    }
}

/// `region` shrunk symmetrically (in whole bins) to its central `fraction`.
pub fn inner_region(grid: &FrequencyGrid, region: Interval, fraction: f64) -> Result<Interval> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("inner fraction {fraction} not in (0, 1]")));
    }
    let lo = grid.bin_of(region.lo)?;
    let hi = grid.bin_of(region.hi)?;
    let n = hi - lo;
    let drop = ((1.0 - fraction) * n as f64 / 2.0).round() as i64;
    if n - 2 * drop < 1 {
        return Err(Error::EmptyRegion);
    }
    let df = grid.df();
    let f0 = grid.f_start();
    Ok(Interval::new(f0 + (lo + drop) as f64 * df, f0 + (hi - drop) as f64 * df))
}

fn output_grid_for(tx: &Psd, region: Interval) -> Result<FrequencyGrid> {
    let g = tx.grid();
    let lo = g.bin_of(region.lo)?;
    let hi = g.bin_of(region.hi)?;
    if hi - lo < 1 {
        return Err(Error::EmptyRegion);
    }
    // A one-point region still needs a valid grid; the second point is unused.
    FrequencyGrid::new(g.f_start() + lo as f64 * g.df(), g.df(), ((hi - lo) as usize).max(2))
}

fn notch_is_empty(tx: &Psd, layout: &SpectralLayout) -> Result<bool> {
    Ok(band_power(tx, layout.n())? == 0.0)
}

/// NLN conditioned on `f1 ∈ t[0]`, `f2 ∈ t[1]`, `f1+f2−f ∈ t[2]`.
pub fn nln_psd_permutation(
    tx: &Psd,
    layout: &SpectralLayout,
    link: &LinkParameters,
    kernel: &FwmKernelSpec,
    ordered_triple: [RegionLabel; 3],
    out_grid: &FrequencyGrid,
) -> Result<Psd> {
    Ok(CategoryTable::compute(tx, layout, link, kernel, out_grid)?.permutation(ordered_triple))
}

/// NLN of a multiset category: the sum of its distinct arrangements.
pub fn nln_psd_multiset(
    tx: &Psd,
    layout: &SpectralLayout,
    link: &LinkParameters,
    kernel: &FwmKernelSpec,
    key: CategoryKey,
    out_grid: &FrequencyGrid,
) -> Result<Psd> {
    if !key.is_nln() {
        return Err(Error::InvalidParameter(format!("{key} is not an NLN multiset")));
    }
    if key.multiplicity(N) > 0 && notch_is_empty(tx, layout)? {
        return Ok(Psd::zeros(*out_grid));
    }
    let table = CategoryTable::compute(tx, layout, link, kernel, out_grid)?;
    Ok(table.multiset(key))
}

/// APSD of `key` over the central `inner_fraction` of `region`.
#[allow(clippy::too_many_arguments)]
pub fn category_apsd(
    tx: &Psd,
    layout: &SpectralLayout,
    link: &LinkParameters,
    kernel: &FwmKernelSpec,
    key: CategoryKey,
    region: Interval,
    inner_fraction: f64,
) -> Result<f64> {
    let dec = category_apsds(tx, layout, link, kernel, &[key], region, inner_fraction)?;
    dec.require(key)
}

/// APSDs of several categories from a single integration.
#[allow(clippy::too_many_arguments)]
pub fn category_apsds(
    tx: &Psd,
    layout: &SpectralLayout,
    link: &LinkParameters,
    kernel: &FwmKernelSpec,
    keys: &[CategoryKey],
    region: Interval,
    inner_fraction: f64,
) -> Result<NoiseDecomposition> {
    let inner = inner_region(tx.grid(), region, inner_fraction)?;
    let out = output_grid_for(tx, inner)?;
    let table = CategoryTable::compute(tx, layout, link, kernel, &out)?;
    let mut dec = NoiseDecomposition::new(Quantity::Apsd);
    for &key in keys {
        dec.insert(key, table.apsd(key, inner)?);
    }
    Ok(dec)
}

/// Category APSD over `signal_region` relative to the signal APSD there.
pub fn category_nsr(
    tx: &Psd,
    layout: &SpectralLayout,
    link: &LinkParameters,
    kernel: &FwmKernelSpec,
    key: CategoryKey,
    signal_region: Interval,
) -> Result<f64> {
    let signal = apsd(tx, signal_region)?;
    if signal <= 0.0 {
        return Err(Error::ZeroPower("signal region"));
    }
    Ok(category_apsd(tx, layout, link, kernel, key, signal_region, 1.0)? / signal)
}

/// One mirror-symmetry comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryResidual {
    pub lhs: String,
    pub rhs: String,
    pub lhs_value: f64,
    pub rhs_value: f64,
    /// `|lhs − rhs| / max(lhs, rhs)`, zero when both vanish.
    pub residual: f64,
}

impl SymmetryResidual {
    fn new(lhs: String, rhs: String, l: f64, r: f64) -> Self {
        let m = l.abs().max(r.abs());
        let residual = if m == 0.0 { 0.0 } else { (l - r).abs() / m };
        Self { lhs, rhs, lhs_value: l, rhs_value: r, residual }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    /// False when the transmit spectrum is not mirror-symmetric about the
    /// notch centre; the residual lists are then empty.
    pub applicable: bool,
    /// Notch APSD pairs built from `F_A`/`F_B` only.
    pub intra: Vec<SymmetryResidual>,
    /// Notch APSD pairs involving `F_OB`.
    pub inter: Vec<SymmetryResidual>,
    /// NSR pairs between the `F_A` and `F_B` sub-carriers.
    pub nsr: Vec<SymmetryResidual>,
}

impl SymmetryReport {
    pub fn max_residual(&self) -> f64 {
        self.intra.iter().chain(&self.inter).chain(&self.nsr).map(|r| r.residual).fold(0.0, f64::max)
    }
}

fn is_mirror_symmetric(tx: &Psd, center: i64) -> bool {
    let v = tx.values();
    let n = v.len() as i64;
    (0..n).all(|k| {
        let m = center - k;
        let other = if (0..n).contains(&m) { v[m as usize] } else { 0.0 };
        let scale = v[k as usize].abs().max(other.abs());
        (v[k as usize] - other).abs() <= 1e-12 * scale
    })
}

/// Residuals of the mirror symmetries between `F_A`- and `F_B`-generated
/// categories.
pub fn check_symmetries(
    tx: &Psd,
    layout: &SpectralLayout,
    link: &LinkParameters,
    kernel: &FwmKernelSpec,
) -> Result<SymmetryReport> {
    let grid = tx.grid();
    let applicable = match layout.mirror_center(grid)? {
        Some(c) => is_mirror_symmetric(tx, c),
        None => false,
    };
    if !applicable {
        return Ok(SymmetryReport { applicable: false, intra: vec![], inter: vec![], nsr: vec![] });
    }

    let out = output_grid_for(tx, layout.boi())?;
    let table = CategoryTable::compute(tx, layout, link, kernel, &out)?;
    let pair = |l: CategoryKey, r: CategoryKey, region: Interval| -> Result<SymmetryResidual> {
        Ok(SymmetryResidual::new(
            format!("S^(N){l}"),
            format!("S^(N){r}"),
            table.apsd(l, region)?,
            table.apsd(r, region)?,
        ))
    };
    let n = layout.n();
    let intra = vec![
        pair(CategoryKey::AAA, CategoryKey::BBB, n)?,
        pair(CategoryKey::BAA, CategoryKey::BBA, n)?,
    ];
    let inter = vec![
        pair(CategoryKey::OB_A_A, CategoryKey::OB_B_B, n)?,
        pair(CategoryKey::OB_OB_A, CategoryKey::OB_OB_B, n)?,
    ];

    let sa = apsd(tx, layout.a())?;
    let sb = apsd(tx, layout.b())?;
    let mut nsr = Vec::new();
    if sa > 0.0 && sb > 0.0 {
        for (l, r) in [
            (CategoryKey::AAA, CategoryKey::BBB),
            (CategoryKey::BAA, CategoryKey::BBA),
            (CategoryKey::BBA, CategoryKey::BAA),
            (CategoryKey::BBB, CategoryKey::AAA),
        ] {
            nsr.push(SymmetryResidual::new(
                format!("NSR^(A){l}"),
                format!("NSR^(B){r}"),
                table.apsd(l, layout.a())? / sa,
                table.apsd(r, layout.b())? / sb,
            ));
        }
    }
    Ok(SymmetryReport { applicable: true, intra, inter, nsr })
}
