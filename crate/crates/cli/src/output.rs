//! Versioned CSV result tables.

use std::io::{BufRead, BufReader, Read, Write};

use fwnl_core::units::lin_to_db;

pub const RESULTS_SCHEMA: &str = "# schema: fwnl-results v1";
pub const COMPARE_SCHEMA: &str = "# schema: fwnl-compare v1";

pub const RESULTS_HEADER: [&str; 9] = [
    "span_count",
    "mode",
    "category",
    "value_db",
    "stderr_db",
    "residual_db",
    "condition_number",
    "realizations",
    "value_linear",
];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub span_count: usize,
    pub mode: String,
    pub category: String,
    /// Linear value (W/Hz for APSD, ratio for NSR).
    pub value: f64,
    /// Linear standard error.
    pub stderr: Option<f64>,
    /// Residual norm relative to the measurement norm.
    pub residual: Option<f64>,
    pub condition_number: Option<f64>,
    pub realizations: usize,
}

impl ResultRow {
    pub fn plain(span_count: usize, mode: &str, category: String, value: f64, realizations: usize) -> Self {
        Self {
            span_count,
            mode: mode.to_string(),
            category,
            value,
            stderr: None,
            residual: None,
            condition_number: None,
            realizations,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultSet {
    pub rows: Vec<ResultRow>,
}

impl ResultSet {
    pub fn value(&self, span_count: usize, mode: &str, category: &str) -> Option<f64> {
        self.find(span_count, mode, category).map(|r| r.value)
    }

    pub fn find(&self, span_count: usize, mode: &str, category: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.span_count == span_count && r.mode == mode && r.category == category)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CsvError> {
        let mut out = out;
        writeln!(out, "{RESULTS_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(RESULTS_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.span_count.to_string(),
                r.mode.clone(),
                r.category.clone(),
                db_field(r.value),
                r.stderr.map(|e| stderr_db(r.value, e)).unwrap_or_default(),
                r.residual.map(amplitude_db).unwrap_or_default(),
                r.condition_number.map(|c| format!("{c:.6e}")).unwrap_or_default(),
                r.realizations.to_string(),
                format!("{:e}", r.value),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, CsvError> {
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        if first.trim_end() != RESULTS_SCHEMA {
            return Err(CsvError::Format(format!("expected '{RESULTS_SCHEMA}', found '{}'", first.trim_end())));
        }
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != RESULTS_HEADER {
            return Err(CsvError::Format(format!("unexpected header {headers:?}")));
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 3;
            let num = |idx: usize| -> Result<Option<f64>, CsvError> {
                let f = &rec[idx];
                if f.is_empty() {
                    return Ok(None);
                }
                f.parse::<f64>().map(Some).map_err(|_| CsvError::Format(format!("line {line}: bad number '{f}'")))
            };
            let int = |idx: usize| -> Result<usize, CsvError> {
                rec[idx].parse().map_err(|_| CsvError::Format(format!("line {line}: bad integer '{}'", &rec[idx])))
            };
            let value = num(8)?.ok_or_else(|| CsvError::Format(format!("line {line}: missing value_linear")))?;
            let stderr = num(4)?.map(|db| (10f64.powf(db / 10.0) - 1.0) * value.abs());
            let residual = num(5)?.map(|db| 10f64.powf(db / 20.0));
            rows.push(ResultRow {
                span_count: int(0)?,
                mode: rec[1].to_string(),
                category: rec[2].to_string(),
                value,
                stderr,
                residual,
                condition_number: num(6)?,
                realizations: int(7)?,
            });
        }
        Ok(Self { rows })
    }
}

/// `10·log10(v)`: `-inf` at zero, `nan` for negative values.
pub fn db_field(v: f64) -> String {
    if v > 0.0 {
        format!("{:.6}", lin_to_db(v))
    } else if v == 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

/// Standard error as the dB width `10·log10(1 + σ/|v|)`.
fn stderr_db(v: f64, e: f64) -> String {
    if !e.is_finite() || v == 0.0 {
        return String::new();
    }
    format!("{:.6}", lin_to_db(1.0 + e / v.abs()))
}

fn amplitude_db(ratio: f64) -> String {
    if ratio > 0.0 {
        format!("{:.6}", 20.0 * ratio.log10())
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultSet {
        let mut fitted = ResultRow::plain(10, "gn-fit", "[A,A,A]".into(), 3.5e-17, 8);
        fitted.stderr = Some(1e-19);
        fitted.residual = Some(1e-3);
        fitted.condition_number = Some(123.0);
        ResultSet {
            rows: vec![
                ResultRow::plain(10, "gn", "[A,A,A]".into(), 3.5e-17, 1),
                ResultRow::plain(10, "gn", "ASE".into(), 0.0, 1),
                ResultRow::plain(10, "gn-fit", "[B,A,A]".into(), -1e-20, 1),
                fitted,
            ],
        }
    }

    #[test]
    fn schema_line_comes_first() {
        let text = sample().to_csv_string();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(RESULTS_SCHEMA));
        assert_eq!(
            lines.next(),
            Some("span_count,mode,category,value_db,stderr_db,residual_db,condition_number,realizations,value_linear")
        );
        assert!(text.contains("-inf"));
        assert!(text.contains(",nan,"));
    }

    #[test]
    fn round_trip_keeps_values() {
        let s = sample();
        let back = ResultSet::read_csv(s.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back.rows.len(), s.rows.len());
        for (a, b) in s.rows.iter().zip(&back.rows) {
            assert_eq!(a.value, b.value);
            assert_eq!(a.category, b.category);
            assert_eq!(a.mode, b.mode);
        }
        let f = back.find(10, "gn-fit", "[A,A,A]").unwrap();
        assert!((f.stderr.unwrap() - 1e-19).abs() < 1e-3 * 1e-19);
        assert!((f.residual.unwrap() - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(ResultSet::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
