//! Perturbation sets, delta matrices and least-squares recovery of noise
//! decompositions, including the constant-power variant.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::categories::{CategoryKey, NoiseDecomposition, Quantity, RegionLabel};
use crate::error::{Error, Result};
use crate::spectra::PerturbationPair;

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

pub const SINGLE_CHANNEL_NSR: [CategoryKey; 6] = [
    CategoryKey::AAA,
    CategoryKey::BAA,
    CategoryKey::BBA,
    CategoryKey::BBB,
    CategoryKey::Trx,
    CategoryKey::Ase,
];

pub const SINGLE_CHANNEL_APSD: [CategoryKey; 5] = [
    CategoryKey::AAA,
    CategoryKey::BAA,
    CategoryKey::BBA,
    CategoryKey::BBB,
    CategoryKey::Ase,
];

/// `[OB,OB,OB]` has a constant column and is absorbed by `ASE`.
pub const WDM_APSD: [CategoryKey; 10] = [
    CategoryKey::AAA,
    CategoryKey::BAA,
    CategoryKey::BBA,
    CategoryKey::BBB,
    CategoryKey::OB_OB_A,
    CategoryKey::OB_OB_B,
    CategoryKey::OB_A_A,
    CategoryKey::OB_B_B,
    CategoryKey::OB_A_B,
    CategoryKey::Ase,
];

/// NSR in `F_A` with neighbouring channels. `[OB,OB,A]` is constant there
/// and lands in `TRX`; `[OB,OB,OB]` goes as `1/Δ(A)` and lands in `ASE`.
pub const WDM_NSR: [CategoryKey; 10] = [
    CategoryKey::AAA,
    CategoryKey::BAA,
    CategoryKey::BBA,
    CategoryKey::BBB,
    CategoryKey::OB_OB_B,
    CategoryKey::OB_A_A,
    CategoryKey::OB_B_B,
    CategoryKey::OB_A_B,
    CategoryKey::Trx,
    CategoryKey::Ase,
];

/// Cartesian product of per-region dB offsets.
pub fn perturbation_grid(db_values_a: &[f64], db_values_b: &[f64]) -> Result<Vec<PerturbationPair>> {
    if db_values_a.is_empty() || db_values_b.is_empty() {
        return Err(Error::InvalidParameter("perturbation lists must be non-empty".into()));
    }
    let mut out = Vec::with_capacity(db_values_a.len() * db_values_b.len());
    for &a in db_values_a {
        for &b in db_values_b {
            out.push(PerturbationPair::from_db(a, b)?);
        }
    }
    Ok(out)
}

/// `lo, lo+step, ..., hi` in dB, inclusive of `hi` up to rounding.
pub fn db_steps(lo: f64, step: f64, hi: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::InvalidParameter(format!("bad dB range {lo}:{step}:{hi}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// One unknown of a least-squares system.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Column {
    Category(CategoryKey),
    /// Categories constrained to share one value.
    Tied(Vec<CategoryKey>),
    /// Coefficient of `Δ(A)^p`.
    Power(i32),
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Category(k) => write!(f, "{k}"),
            Column::Tied(keys) => {
                let names: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
                f.write_str(&names.join("="))
            }
            Column::Power(p) => write!(f, "Δ^{p}"),
        }
    }
}

/// Scaling of a category's contribution under a perturbation.
///
/// APSD sees `Δ(A)^{m_A} Δ(B)^{m_B}`; NSR measured in a sub-carrier band is
/// additionally divided by that band's gain. `F_OB` is never perturbed.
fn category_factor(key: CategoryKey, p: &PerturbationPair, quantity: Quantity, signal: RegionLabel) -> Result<f64> {
    let (da, db) = (p.delta_a(), p.delta_b());
    let signal_gain = match signal {
        RegionLabel::A => da,
        RegionLabel::B => db,
        other => return Err(Error::InvalidParameter(format!("NSR signal band must be A or B, got {other}"))),
    };
    match (key, quantity) {
        (CategoryKey::Ase, Quantity::Apsd) => Ok(1.0),
        (CategoryKey::Ase, Quantity::Nsr) => Ok(1.0 / signal_gain),
        (CategoryKey::Trx, Quantity::Nsr) => Ok(1.0),
        (CategoryKey::Trx, Quantity::Apsd) => {
            Err(Error::InvalidParameter("TRX has no APSD column".into()))
        }
        (CategoryKey::Nln(_), _) => {
            if key.multiplicity(RegionLabel::N) > 0 {
                return Err(Error::InvalidParameter(format!("{key} draws on the empty notch")));
            }
            let g = da.powi(key.multiplicity(RegionLabel::A) as i32) * db.powi(key.multiplicity(RegionLabel::B) as i32);
            Ok(match quantity {
                Quantity::Apsd => g,
                Quantity::Nsr => g / signal_gain,
            })
        }
    }
}

/// Rows are perturbation instances, columns the unknowns of the fit.
#[derive(Clone, Debug)]
pub struct DeltaMatrix {
    quantity: Quantity,
    columns: Vec<Column>,
    matrix: DMatrix<f64>,
    condition_number: f64,
}

impl DeltaMatrix {
    pub fn new(quantity: Quantity, columns: Vec<Column>, matrix: DMatrix<f64>) -> Result<Self> {
        if columns.is_empty() || matrix.ncols() != columns.len() || matrix.nrows() == 0 {
            return Err(Error::LengthMismatch(format!(
                "{} columns for a {}x{} matrix",
                columns.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let distinct: BTreeSet<&Column> = columns.iter().collect();
        if distinct.len() != columns.len() {
            return Err(Error::InvalidParameter("duplicate basis column".into()));
        }
        if let Some(bad) = matrix.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!("delta matrix entry {bad} is not positive")));
        }
        let sv = matrix.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        let condition_number = if min > 0.0 { max / min } else { f64::INFINITY };
        Ok(Self { quantity, columns, matrix, condition_number })
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[(row, col)]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.matrix.row(row).iter().copied().collect()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    /// Forward model: predicted measurements for unknowns `x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::LengthMismatch(format!("{} values for {} columns", x.len(), self.cols())));
        }
        Ok((&self.matrix * DVector::from_column_slice(x)).iter().copied().collect())
    }

    /// Forward model from a decomposition keyed by category.
    pub fn predict(&self, dec: &NoiseDecomposition) -> Result<Vec<f64>> {
        let x = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Category(k) => dec.require(*k),
                Column::Tied(keys) => dec.require(keys[0]),
                Column::Power(p) => Err(Error::MissingCategory(format!("Δ^{p}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        self.apply(&x)
    }
}

fn category_matrix(
    pairs: &[PerturbationPair],
    basis: &[CategoryKey],
    quantity: Quantity,
    signal: RegionLabel,
) -> Result<DeltaMatrix> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no perturbation instances".into()));
    }
    let mut m = DMatrix::zeros(pairs.len(), basis.len());
    for (i, p) in pairs.iter().enumerate() {
        for (j, key) in basis.iter().enumerate() {
            m[(i, j)] = category_factor(*key, p, quantity, signal)?;
        }
    }
    DeltaMatrix::new(quantity, basis.iter().map(|k| Column::Category(*k)).collect(), m)
}

/// Delta matrix for NSR measured in `F_A`.
pub fn delta_matrix_nsr(pairs: &[PerturbationPair], basis: &[CategoryKey]) -> Result<DeltaMatrix> {
    delta_matrix_nsr_in(pairs, basis, RegionLabel::A)
}

/// Delta matrix for NSR measured in the given sub-carrier band.
pub fn delta_matrix_nsr_in(pairs: &[PerturbationPair], basis: &[CategoryKey], signal: RegionLabel) -> Result<DeltaMatrix> {
    category_matrix(pairs, basis, Quantity::Nsr, signal)
}

/// Delta matrix for the APSD measured in the notch.
pub fn delta_matrix_apsd(pairs: &[PerturbationPair], basis: &[CategoryKey]) -> Result<DeltaMatrix> {
    category_matrix(pairs, basis, Quantity::Apsd, RegionLabel::A)
}

/// A direction in coefficient space that the data cannot see.
#[derive(Clone, Debug, PartialEq)]
pub struct NullCombination {
    /// Weights normalized so the largest magnitude is one; tiny weights dropped.
    pub terms: Vec<(Column, f64)>,
}

impl fmt::Display for NullCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (col, w)) in self.terms.iter().enumerate() {
            let sign = if *w < 0.0 { '-' } else { '+' };
            if i == 0 {
                if *w < 0.0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{:.3}*{col}", w.abs())?;
        }
        Ok(())
    }
}

/// Outcome of a rank-deficient fit.
#[derive(Clone, Debug)]
pub struct DegeneracyReport {
    pub rank: usize,
    pub null_space: Vec<NullCombination>,
    /// Minimum-norm least-squares solution.
    pub min_norm: FitResult,
}

impl DegeneracyReport {
    /// Columns that appear in any null-space direction.
    pub fn conflated_columns(&self) -> Vec<Column> {
        let set: BTreeSet<Column> = self.null_space.iter().flat_map(|c| c.terms.iter().map(|t| t.0.clone())).collect();
        set.into_iter().collect()
    }
}

impl fmt::Display for DegeneracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank-deficient delta matrix (rank {} of {}); unidentifiable:", self.rank, self.min_norm.columns.len())?;
        for c in &self.null_space {
            write!(f, " [{c}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub columns: Vec<Column>,
    pub estimates: Vec<f64>,
    /// NaN when the residual has no degrees of freedom.
    pub std_errors: Vec<f64>,
    /// Category-keyed view; tied columns assign their value to every member.
    pub decomposition: NoiseDecomposition,
    pub residual_norm: f64,
    pub condition_number: f64,
    pub rank: usize,
    /// Structural conflations of the chosen basis that are not numerical.
    pub conflations: Vec<String>,
}

impl FitResult {
    pub fn estimate(&self, column: &Column) -> Option<f64> {
        self.columns.iter().position(|c| c == column).map(|i| self.estimates[i])
    }

    pub fn std_error(&self, column: &Column) -> Option<f64> {
        self.columns.iter().position(|c| c == column).map(|i| self.std_errors[i])
    }

    pub fn category(&self, key: CategoryKey) -> Option<f64> {
        self.decomposition.get(key)
    }

    /// Standard error of the column that determines `key`.
    pub fn category_std_error(&self, key: CategoryKey) -> Option<f64> {
        self.columns
            .iter()
            .position(|c| match c {
                Column::Category(k) => *k == key,
                Column::Tied(keys) => keys.contains(&key),
                Column::Power(_) => false,
            })
            .map(|i| self.std_errors[i])
    }
}

/// Ordinary least squares via SVD.
pub fn fit(measurements: &[f64], dm: &DeltaMatrix) -> Result<FitResult> {
    solve(measurements, dm, None)
}

/// Weighted least squares with per-measurement variances.
pub fn fit_weighted(measurements: &[f64], variances: &[f64], dm: &DeltaMatrix) -> Result<FitResult> {
    if variances.len() != measurements.len() {
        return Err(Error::LengthMismatch(format!(
            "{} variances for {} measurements",
            variances.len(),
            measurements.len()
        )));
    }
    if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidParameter(format!("variance {v} must be positive")));
    }
    solve(measurements, dm, Some(variances))
}

fn solve(measurements: &[f64], dm: &DeltaMatrix, variances: Option<&[f64]>) -> Result<FitResult> {
    let (m, n) = (dm.rows(), dm.cols());
    if measurements.len() != m {
        return Err(Error::LengthMismatch(format!("{} measurements for {m} rows", measurements.len())));
    }
    if m < n {
        return Err(Error::Underdetermined { rows: m, cols: n });
    }
    if let Some(v) = measurements.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("measurement {v} is not finite")));
    }

    let mut a = dm.matrix.clone();
    let mut y = DVector::from_column_slice(measurements);
    if let Some(var) = variances {
        for (i, v) in var.iter().enumerate() {
            let w = 1.0 / v.sqrt();
            a.row_mut(i).scale_mut(w);
            y[i] *= w;
        }
    }

    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sv = &svd.singular_values;
    let smax = sv.max();
    let keep: Vec<bool> = sv.iter().map(|s| *s > smax * RANK_TOLERANCE).collect();
    let rank = keep.iter().filter(|k| **k).count();

    let uty = u.transpose() * &y;
    let mut x = DVector::zeros(n);
    for i in 0..sv.len() {
        if keep[i] {
            x += v_t.row(i).transpose() * (uty[i] / sv[i]);
        }
    }

    let fitted = &dm.matrix * &x;
    let residual: f64 = measurements.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let weighted_rss = (&a * &x - &y).norm_squared();

    // Known variances fix the scale; otherwise it is estimated from the residual.
    let scale = match variances {
        Some(_) => 1.0,
        None if m > rank => weighted_rss / (m - rank) as f64,
        None => f64::NAN,
    };
    let std_errors: Vec<f64> = (0..n)
        .map(|j| {
            let var: f64 = (0..sv.len()).filter(|&i| keep[i]).map(|i| (v_t[(i, j)] / sv[i]).powi(2)).sum();
            (scale * var).sqrt()
        })
        .collect();

    let estimates: Vec<f64> = x.iter().copied().collect();
    let mut decomposition = NoiseDecomposition::new(dm.quantity);
    for (col, val) in dm.columns.iter().zip(&estimates) {
        match col {
            Column::Category(k) => decomposition.insert(*k, *val),
            Column::Tied(keys) => keys.iter().for_each(|k| decomposition.insert(*k, *val)),
            Column::Power(_) => {}
        }
    }

    let result = FitResult {
        columns: dm.columns.clone(),
        estimates,
        std_errors,
        decomposition,
        residual_norm: residual,
        condition_number: dm.condition_number,
        rank,
        conflations: Vec::new(),
    };

    if rank < n {
        let mut null_space = Vec::new();
        for i in 0..sv.len() {
            if !keep[i] {
                null_space.push(null_combination(&dm.columns, v_t.row(i).iter().copied()));
            }
        }
        // Wide-but-tall matrices have fewer singular values than columns only when m < n, excluded above.
        return Err(Error::RankDeficient(Box::new(DegeneracyReport { rank, null_space, min_norm: result })));
    }
    if dm.condition_number > 1e8 {
        log::warn!("delta matrix condition number {:.3e}", dm.condition_number);
    }
    Ok(result)
}

/// Standard deviation of each fitted column when measurement `i` carries
/// independent noise of standard deviation `measurement_std[i]`.
pub fn propagated_std_errors(dm: &DeltaMatrix, measurement_std: &[f64]) -> Result<Vec<f64>> {
    if measurement_std.len() != dm.rows() {
        return Err(Error::LengthMismatch(format!("{} deviations for {} rows", measurement_std.len(), dm.rows())));
    }
    let pinv = dm
        .matrix
        .clone()
        .pseudo_inverse(RANK_TOLERANCE * dm.matrix.norm())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((0..dm.cols())
        .map(|j| {
            pinv.row(j)
                .iter()
                .zip(measurement_std)
                .map(|(p, s)| (p * s).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

fn null_combination(columns: &[Column], weights: impl Iterator<Item = f64>) -> NullCombination {
    let w: Vec<f64> = weights.collect();
    let max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lead = w.iter().copied().find(|v| v.abs() == max).unwrap_or(1.0).signum();
    let terms = columns
        .iter()
        .zip(&w)
        .filter(|(_, v)| v.abs() > 1e-6 * max)
        .map(|(c, v)| (c.clone(), lead * v / max))
        .collect();
    NullCombination { terms }
}

/// `Δ(B)` that keeps the total BOI power unchanged.
pub fn constant_power_delta_b(delta_a: f64, k_a: f64, k_b: f64) -> Result<f64> {
    if !(k_a > 0.0 && k_b > 0.0 && k_a.is_finite() && k_b.is_finite()) {
        return Err(Error::InvalidParameter(format!("power fractions ({k_a}, {k_b}) must be positive")));
    }
    if !(delta_a > 0.0 && delta_a.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta_a {delta_a} must be positive")));
    }
    let delta_b = (1.0 - k_a * delta_a) / k_b;
    if delta_b <= 0.0 {
        return Err(Error::InfeasiblePerturbation { delta_a, delta_b });
    }
    Ok(delta_b)
}

/// Constant-power pairs for each `Δ(A)`.
pub fn constant_power_pairs(delta_as: &[f64], k_a: f64, k_b: f64) -> Result<Vec<PerturbationPair>> {
    delta_as
        .iter()
        .map(|&da| PerturbationPair::new(da, constant_power_delta_b(da, k_a, k_b)?))
        .collect()
}

/// Polynomial in `Δ(A)` describing a decomposition under constant power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConstantPowerCoeffs {
    /// `c2 Δ² + c1 Δ + c0 + c_inv / Δ`, NSR in `F_A`.
    Nsr { c2: f64, c1: f64, c0: f64, c_inv: f64 },
    /// `c3 Δ³ + c2 Δ² + c1 Δ + c0`, APSD in the notch.
    Apsd { c3: f64, c2: f64, c1: f64, c0: f64 },
}

impl ConstantPowerCoeffs {
    /// `(power, coefficient)` pairs, highest power first.
    pub fn terms(&self) -> [(i32, f64); 4] {
        match *self {
            ConstantPowerCoeffs::Nsr { c2, c1, c0, c_inv } => [(2, c2), (1, c1), (0, c0), (-1, c_inv)],
            ConstantPowerCoeffs::Apsd { c3, c2, c1, c0 } => [(3, c3), (2, c2), (1, c1), (0, c0)],
        }
    }

    pub fn evaluate(&self, delta_a: f64) -> f64 {
        self.terms().iter().map(|(p, c)| c * delta_a.powi(*p)).sum()
    }

    fn from_terms(quantity: Quantity, t: &[f64; 4]) -> Self {
        match quantity {
            Quantity::Nsr => ConstantPowerCoeffs::Nsr { c2: t[0], c1: t[1], c0: t[2], c_inv: t[3] },
            Quantity::Apsd => ConstantPowerCoeffs::Apsd { c3: t[0], c2: t[1], c1: t[2], c0: t[3] },
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn constant_power_coeffs(dec: &NoiseDecomposition, k_a: f64, k_b: f64, quantity: Quantity) -> Result<ConstantPowerCoeffs> {
    if !(k_a > 0.0 && k_b > 0.0 && k_a.is_finite() && k_b.is_finite()) {
        return Err(Error::InvalidParameter(format!("power fractions ({k_a}, {k_b}) must be positive")));
    }
    for key in CategoryKey::intra() {
        dec.require(key)?;
    }
    // Δ(B) = p − qΔ(A)
    let p = 1.0 / k_b;
    let q = k_a / k_b;
    let top = match quantity {
        Quantity::Nsr => 2,
        Quantity::Apsd => 3,
    };
    let mut t = [0.0; 4];
    for (key, value) in dec.iter() {
        let (base, m_b) = match key {
            CategoryKey::Ase => (if quantity == Quantity::Nsr { -1 } else { 0 }, 0),
            CategoryKey::Trx => match quantity {
                Quantity::Nsr => (0, 0),
                Quantity::Apsd => return Err(Error::InvalidParameter("TRX has no APSD term".into())),
            },
            CategoryKey::Nln(_) => {
                if key.multiplicity(RegionLabel::N) > 0 {
                    return Err(Error::InvalidParameter(format!("{key} draws on the empty notch")));
                }
                let m_a = key.multiplicity(RegionLabel::A) as i32;
                (if quantity == Quantity::Nsr { m_a - 1 } else { m_a }, key.multiplicity(RegionLabel::B))
            }
        };
        for j in 0..=m_b {
            let c = binomial(m_b, j) * p.powi((m_b - j) as i32) * (-q).powi(j as i32);
            let power = base + j as i32;
            t[(top - power) as usize] += c * value;
        }
    }
    Ok(ConstantPowerCoeffs::from_terms(quantity, &t))
}

/// Constant-power NSR polynomial from a category decomposition. `TRX` and
/// `ASE`, when present, land in the constant and inverse terms.
pub fn constant_power_coeffs_nsr(dec: &NoiseDecomposition, k_a: f64, k_b: f64) -> Result<ConstantPowerCoeffs> {
    constant_power_coeffs(dec, k_a, k_b, Quantity::Nsr)
}

/// Constant-power notch APSD polynomial; `ASE` lands in the constant term.
pub fn constant_power_coeffs_apsd(dec: &NoiseDecomposition, k_a: f64, k_b: f64) -> Result<ConstantPowerCoeffs> {
    constant_power_coeffs(dec, k_a, k_b, Quantity::Apsd)
}

/// Fits constant-power measurements taken at the given `Δ(A)` values.
///
/// The unconstrained mode fits the polynomial coefficients. The constrained
/// APSD mode ties `[A,A,A]=[B,B,B]` and `[B,A,A]=[B,B,A]` and solves for
/// those two values and `ASE`. The constrained NSR mode keeps
/// `[A,A,A]`, `[B,B,A]`, `TRX` and `ASE` and neglects `[B,A,A]` and `[B,B,B]`.
pub fn fit_constant_power(
    measurements: &[f64],
    delta_as: &[f64],
    k_a: f64,
    k_b: f64,
    quantity: Quantity,
    symmetry_constrained: bool,
) -> Result<FitResult> {
    if measurements.len() != delta_as.len() {
        return Err(Error::LengthMismatch(format!(
            "{} measurements for {} perturbations",
            measurements.len(),
            delta_as.len()
        )));
    }
    let pairs = constant_power_pairs(delta_as, k_a, k_b)?;

    let (columns, conflations): (Vec<Column>, Vec<String>) = match (quantity, symmetry_constrained) {
        (Quantity::Nsr, false) => (
            vec![Column::Power(2), Column::Power(1), Column::Power(0), Column::Power(-1)],
            vec![
                "Δ^0 combines TRX with the constant NLN term".into(),
                "Δ^-1 combines ASE with the inverse NLN term".into(),
            ],
        ),
        (Quantity::Apsd, false) => (
            vec![Column::Power(3), Column::Power(2), Column::Power(1), Column::Power(0)],
            vec!["Δ^0 combines ASE with the constant NLN term".into()],
        ),
        (Quantity::Nsr, true) => (
            vec![
                Column::Category(CategoryKey::AAA),
                Column::Category(CategoryKey::BBA),
                Column::Category(CategoryKey::Trx),
                Column::Category(CategoryKey::Ase),
            ],
            vec!["[B,A,A] and [B,B,B] neglected".into()],
        ),
        (Quantity::Apsd, true) => (
            vec![
                Column::Tied(vec![CategoryKey::AAA, CategoryKey::BBB]),
                Column::Tied(vec![CategoryKey::BAA, CategoryKey::BBA]),
                Column::Category(CategoryKey::Ase),
            ],
            Vec::new(),
        ),
    };

    let distinct: BTreeSet<u64> = delta_as.iter().map(|d| d.to_bits()).collect();
    if distinct.len() < columns.len() {
        return Err(Error::Underdetermined { rows: distinct.len(), cols: columns.len() });
    }

    let mut m = DMatrix::zeros(pairs.len(), columns.len());
    for (i, pair) in pairs.iter().enumerate() {
        let (da, db) = (pair.delta_a(), pair.delta_b());
        for (j, col) in columns.iter().enumerate() {
            m[(i, j)] = match col {
                Column::Power(p) => da.powi(*p),
                Column::Category(k) => category_factor(*k, pair, quantity, RegionLabel::A)?,
                Column::Tied(keys) => keys
                    .iter()
                    .map(|k| category_factor(*k, pair, quantity, RegionLabel::A))
                    .sum::<Result<f64>>()?,
            };
            debug_assert!(db > 0.0);
        }
    }
    let dm = DeltaMatrix::new(quantity, columns, m)?;
    let mut result = fit(measurements, &dm)?;
    result.conflations = conflations;
    Ok(result)
}
