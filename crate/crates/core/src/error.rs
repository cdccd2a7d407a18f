use thiserror::Error;

/// Errors produced by the numerical layers and the CLI front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("adaptive quadrature did not converge: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("lead temperatures differ; the fluctuation-dissipation shortcut requires a common temperature")]
    TemperatureMismatch,

    #[error("frequency {omega:.6e} outside table range [{min:.6e}, {max:.6e}]")]
    OutOfTableRange { omega: f64, min: f64, max: f64 },

    #[error("harmonic sum truncated while the edge Fourier weight {weight:.3e} is still significant")]
    TruncationWarning { weight: f64 },

    #[error("no interior extremum found while searching for the resonance")]
    ResonanceNotFound,

    #[error("heat power does not change sign on the probe-temperature bracket: P(lo) = {p_low:.6e}, P(hi) = {p_high:.6e}")]
    NoSignChange { p_low: f64, p_high: f64 },

    #[error("noise covariance not positive semidefinite: eigenvalue {eigenvalue:.3e} with trace {trace:.3e}")]
    NotPositiveSemidefinite { eigenvalue: f64, trace: f64 },

    #[error("memory kernel anticausal fraction {fraction:.3e} above tolerance")]
    KernelNotCausal { fraction: f64 },

    #[error("time stepping became unstable at step {step}")]
    UnstableStep { step: usize },

    #[error("need at least {needed} trajectories, got {got}")]
    InsufficientStatistics { needed: usize, got: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code: 2 for configuration problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::TemperatureMismatch => "temperature_mismatch",
            Error::OutOfTableRange { .. } => "out_of_table_range",
            Error::TruncationWarning { .. } => "truncation_warning",
            Error::ResonanceNotFound => "resonance_not_found",
            Error::NoSignChange { .. } => "no_sign_change",
            Error::NotPositiveSemidefinite { .. } => "not_positive_semidefinite",
            Error::KernelNotCausal { .. } => "kernel_not_causal",
            Error::UnstableStep { .. } => "unstable_step",
            Error::InsufficientStatistics { .. } => "insufficient_statistics",
            Error::Parse { .. } => "parse_error",
            Error::Validation(_) => "validation_error",
            Error::Io(_) => "io_error",
        }
    }
}
