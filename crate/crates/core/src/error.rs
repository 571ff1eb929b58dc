use thiserror::Error;

use crate::estimator::DegeneracyReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid power spectral density: {0}")]
    InvalidPsd(String),

    #[error("frequency {freq_hz} Hz is not on the grid")]
    OffGrid { freq_hz: f64 },

    #[error("layout does not match grid: {0}")]
    LayoutMismatch(String),

    #[error("grids are not aligned: {0}")]
    GridMisalignment(String),

    #[error("overlapping channel bands: {0}")]
    OverlappingChannels(String),

    #[error("empty region")]
    EmptyRegion,

    #[error("zero power in {0}")]
    ZeroPower(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible constant-power perturbation: delta_a = {delta_a} gives delta_b = {delta_b}")]
    InfeasiblePerturbation { delta_a: f64, delta_b: f64 },

    #[error("missing category {0} in decomposition")]
    MissingCategory(String),

    #[error("least-squares system is under-determined: {rows} rows for {cols} columns")]
    Underdetermined { rows: usize, cols: usize },

    #[error("{0}")]
    RankDeficient(Box<DegeneracyReport>),

    #[error("bandwidth {needed_hz} Hz exceeds the Nyquist band of {sample_rate_hz} Hz sampling")]
    NyquistExceeded { needed_hz: f64, sample_rate_hz: f64 },

    #[error("nonlinear phase per step {phase_rad} rad exceeds the 0.3 rad limit")]
    StepTooLarge { phase_rad: f64 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("too few samples: {samples} < segment length {segment}")]
    TooFewSamples { samples: usize, segment: usize },

    #[error("waveform file: {0}")]
    WaveformFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
