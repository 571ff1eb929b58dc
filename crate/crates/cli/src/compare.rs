//! Per-category dB differences between two result sets.

use std::collections::BTreeMap;
use std::io::Write;

use fwnl_core::units::lin_to_db;

use crate::output::{CsvError, ResultSet, COMPARE_SCHEMA};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CompareError {
    #[error("no rows selected from {0}")]
    Empty(&'static str),
    #[error("bases differ: {0}")]
    BasisMismatch(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub span_count: usize,
    /// `mode/category`, or just the category when a mode filter is applied.
    pub key: String,
    pub a: f64,
    pub b: f64,
    /// `10·log10(a/b)`, NaN where either side is not positive.
    pub diff_db: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
}

impl Comparison {
    /// Largest finite |difference|, restricted to keys accepted by `keep`.
    pub fn max_abs_diff(&self, keep: impl Fn(&CompareRow) -> bool) -> f64 {
        self.rows.iter().filter(|r| keep(r)).map(|r| r.diff_db.abs()).filter(|d| d.is_finite()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CsvError> {
        let mut out = out;
        writeln!(out, "{COMPARE_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["span_count", "category", "a_db", "b_db", "diff_db"])?;
        for r in &self.rows {
            w.write_record([
                r.span_count.to_string(),
                r.key.clone(),
                crate::output::db_field(r.a),
                crate::output::db_field(r.b),
                format!("{:.6}", r.diff_db),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn keyed(set: &ResultSet, mode: Option<&str>) -> BTreeMap<(usize, String), f64> {
    set.rows
        .iter()
        .filter(|r| mode.is_none_or(|m| r.mode == m))
        .map(|r| {
            let key = match mode {
                Some(_) => r.category.clone(),
                None => format!("{}/{}", r.mode, r.category),
            };
            ((r.span_count, key), r.value)
        })
        .collect()
}

/// Matches rows by span count and category. With a mode filter on each
/// side only those rows are compared; without, rows match by mode too.
pub fn compare(a: &ResultSet, mode_a: Option<&str>, b: &ResultSet, mode_b: Option<&str>) -> Result<Comparison, CompareError> {
    let ka = keyed(a, mode_a);
    let kb = keyed(b, mode_b.or(if mode_a.is_some() { mode_a } else { None }));
    if ka.is_empty() {
        return Err(CompareError::Empty("first input"));
    }
    if kb.is_empty() {
        return Err(CompareError::Empty("second input"));
    }
    let only_a: Vec<String> = ka.keys().filter(|k| !kb.contains_key(*k)).map(|(s, c)| format!("{c}@{s}")).collect();
    let only_b: Vec<String> = kb.keys().filter(|k| !ka.contains_key(*k)).map(|(s, c)| format!("{c}@{s}")).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(CompareError::BasisMismatch(format!(
            "only in first: [{}]; only in second: [{}]",
            only_a.join(" "),
            only_b.join(" ")
        )));
    }
    let rows = ka
        .into_iter()
        .map(|((span_count, key), va)| {
            let vb = kb[&(span_count, key.clone())];
            let diff_db = if va > 0.0 && vb > 0.0 { lin_to_db(va / vb) } else { f64::NAN };
            CompareRow { span_count, key, a: va, b: vb, diff_db }
        })
        .collect();
    Ok(Comparison { rows })
}
