//! Scenario runner behind the `fwnl` binary: configuration parsing, GN and
//! split-step sweeps, least-squares fits and CSV output.

pub mod compare;
pub mod config;
pub mod output;
pub mod run;
pub mod selftest;

use std::collections::BTreeMap;
use std::path::Path;

use fwnl_core::PerturbationPair;

use crate::compare::CompareError;
use crate::config::{ConfigError, Scenario};
use crate::output::{CsvError, ResultRow, ResultSet};
use crate::run::{fit_measurements, fit_rows, Instance};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Bad input: configuration, parameters, files.
pub const EXIT_INPUT: i32 = 2;
/// The numerics refused: rank-deficient fit or an unstable step size.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] fwnl_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] CsvError),
    #[error("compare: {0}")]
    Compare(#[from] CompareError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use fwnl_core::Error as E;
        match self {
            CliError::Core(E::RankDeficient(_) | E::Underdetermined { .. } | E::StepTooLarge { .. }) => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        }
    }
}

pub fn load_scenario(path: Option<&Path>) -> Result<Scenario, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io { path: p.display().to_string(), source: e })?,
        None => String::new(),
    };
    Ok(config::parse_config(&text)?)
}

pub fn read_results(path: &Path) -> Result<ResultSet, CliError> {
    let f = std::fs::File::open(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    Ok(ResultSet::read_csv(f)?)
}

/// Refits the `*-measured` rows of a result file. Each `(span count, mode)`
/// group becomes one fit whose rows are tagged `<prefix>-fit`.
pub fn refit(s: &Scenario, input: &ResultSet) -> Result<ResultSet, CliError> {
    let mut groups: BTreeMap<(usize, String), (Vec<Instance>, Vec<f64>, usize)> = BTreeMap::new();
    for r in &input.rows {
        let Some(prefix) = r.mode.strip_suffix("-measured") else { continue };
        let Some((a_db, b_db)) = Instance::parse_label(&r.category) else {
            return Err(CliError::Usage(format!("measurement row with malformed label '{}'", r.category)));
        };
        let pair = PerturbationPair::from_db(a_db, b_db)?;
        let g = groups.entry((r.span_count, prefix.to_string())).or_default();
        g.0.push(Instance { a_db, b_db, pair });
        g.1.push(r.value);
        g.2 = r.realizations;
    }
    if groups.is_empty() {
        return Err(CliError::Usage("no '*-measured' rows in input".into()));
    }
    let mut rows: Vec<ResultRow> = Vec::new();
    for ((span, prefix), (inst, y, realizations)) in groups {
        let r = fit_measurements(s, &inst, &y)?;
        rows.extend(fit_rows(span, &format!("{prefix}-fit"), &r, &y, realizations));
    }
    Ok(ResultSet { rows })
}

/// Writes `set` to `path`, or to stdout when `path` is `None`.
pub fn emit(set: &ResultSet, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| CliError::Io { path: p.display().to_string(), source: e })?;
            set.write_csv(std::io::BufWriter::new(f))?;
        }
        None => set.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}
