use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fwnl::compare::compare;
use fwnl::config::{parse_quantity, Mode, Scenario};
use fwnl::run::run_scenario;
use fwnl::{emit, load_scenario, read_results, refit, selftest, CliError, EXIT_INPUT, EXIT_NUMERIC};

#[derive(Parser)]
#[command(name = "fwnl", version, about = "Separate nonlinear, ASE and transceiver noise by spectral perturbation")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "FWNL_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV (stdout when omitted, unless the scenario names one).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Measured quantity: nsr or apsd.
    #[arg(long, value_parser = parse_quantity)]
    fit: Option<fwnl_core::Quantity>,
    /// Use constant-power perturbations.
    #[arg(long)]
    constant_power: bool,
}

#[derive(Subcommand)]
enum Command {
    /// GN-model categories and synthetic fits.
    Gn(Common),
    /// Split-step simulation and fits.
    Ssfm(Common),
    /// GN and/or split-step over the scenario's span sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// gn, ssfm or both (overrides the scenario).
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Refit the measurement rows of a result file.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Per-category dB differences between two result files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Mode of the rows taken from A, e.g. ssfm-fit.
        #[arg(long)]
        select_a: Option<String>,
        /// Mode of the rows taken from B (defaults to --select-a).
        #[arg(long)]
        select_b: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in invariant checks.
    Selftest {
        /// Include the full-resolution and split-step checks.
        #[arg(long)]
        full: bool,
    },
}

fn scenario(c: &Common, mode: Option<Mode>) -> Result<Scenario, CliError> {
    let mut s = load_scenario(c.config.as_deref())?;
    if let Some(seed) = c.seed {
        s.seed = seed;
    }
    if let Some(q) = c.fit {
        s.fit = q;
    }
    if c.constant_power {
        s.constant_power = true;
    }
    if let Some(m) = mode {
        s.mode = m;
    }
    Ok(s)
}

fn output_path<'a>(c: &'a Common, s: &'a Scenario) -> Option<&'a Path> {
    c.out.as_deref().or(s.output.as_deref())
}

fn sweep(c: &Common, mode: Option<Mode>) -> Result<(), CliError> {
    let s = scenario(c, mode)?;
    let set = run_scenario(&s)?;
    emit(&set, output_path(c, &s))
}

fn execute(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Gn(c) => sweep(&c, Some(Mode::Gn))?,
        Command::Ssfm(c) => sweep(&c, Some(Mode::Ssfm))?,
        Command::Sweep { common, mode } => sweep(&common, mode)?,
        Command::Fit { common, input } => {
            let s = scenario(&common, None)?;
            let set = refit(&s, &read_results(&input)?)?;
            emit(&set, output_path(&common, &s))?;
        }
        Command::Compare { a, b, select_a, select_b, out } => {
            let c = compare(&read_results(&a)?, select_a.as_deref(), &read_results(&b)?, select_b.as_deref())?;
            match out {
                Some(p) => {
                    let f = std::fs::File::create(&p)
                        .map_err(|e| CliError::Io { path: p.display().to_string(), source: e })?;
                    c.write_csv(std::io::BufWriter::new(f))?;
                }
                None => c.write_csv(std::io::stdout().lock())?,
            }
            eprintln!("max |diff| = {:.3} dB", c.max_abs_diff(|_| true));
        }
        Command::Selftest { full } => {
            let checks = if full { selftest::full_suite() } else { selftest::quick_suite() };
            let mut failed = 0;
            for c in &checks {
                println!("{c}");
                failed += usize::from(!c.passed);
            }
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            if failed > 0 {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(code == EXIT_INPUT || code == EXIT_NUMERIC);
            ExitCode::from(code as u8)
        }
    }
}
