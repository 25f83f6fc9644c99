use thiserror::Error;

/// Errors raised anywhere in the simulation / extraction pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WktError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("spectrum has zero (or negative) mass")]
    ZeroSpectrum,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid wavelength: {0}")]
    InvalidWavelength(String),
    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),
    #[error("input not normalized (integral = {0})")]
    NotNormalized(f64),
    #[error("joint spectral amplitude is not exchange-symmetric (residual {0:e})")]
    AsymmetricJsa(f64),
    #[error("joint spectral amplitude is not real (relative imaginary part {0:e})")]
    ComplexJsa(f64),
    #[error("delay step {step:e} s exceeds Nyquist limit {limit:e} s")]
    NyquistViolation { step: f64, limit: f64 },
    #[error("interferogram kind not set")]
    UnknownKind,
    #[error("window too short: {0}")]
    WindowTooShort(String),
    #[error("non-uniform grid: {0}")]
    NonUniformGrid(String),
    #[error("too few samples: need {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("curve never falls to half maximum on the {0} side")]
    NoCrossing(&'static str),
    #[error("fit diverged: {0}")]
    FitDiverged(String),
    #[error("incomplete grid: {0}")]
    IncompleteGrid(String),
    #[error("negative count {value} at ({lambda_s_nm} nm, {lambda_i_nm} nm)")]
    NegativeCount { lambda_s_nm: f64, lambda_i_nm: f64, value: f64 },
    #[error("grid is not square: {0}")]
    NotSquare(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl WktError {
    /// Variant name, used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            WktError::InvalidGrid(_) => "InvalidGrid",
            WktError::ZeroSpectrum => "ZeroSpectrum",
            WktError::GridMismatch(_) => "GridMismatch",
            WktError::InvalidWavelength(_) => "InvalidWavelength",
            WktError::GridTooNarrow(_) => "GridTooNarrow",
            WktError::NotNormalized(_) => "NotNormalized",
            WktError::AsymmetricJsa(_) => "AsymmetricJsa",
            WktError::ComplexJsa(_) => "ComplexJsa",
            WktError::NyquistViolation { .. } => "NyquistViolation",
            WktError::UnknownKind => "UnknownKind",
            WktError::WindowTooShort(_) => "WindowTooShort",
            WktError::NonUniformGrid(_) => "NonUniformGrid",
            WktError::TooFewSamples { .. } => "TooFewSamples",
            WktError::NoCrossing(_) => "NoCrossing",
            WktError::FitDiverged(_) => "FitDiverged",
            WktError::IncompleteGrid(_) => "IncompleteGrid",
            WktError::NegativeCount { .. } => "NegativeCount",
            WktError::NotSquare(_) => "NotSquare",
            WktError::InvalidValue(_) => "InvalidValue",
            WktError::Config(_) => "Config",
            WktError::Parse(_) => "Parse",
            WktError::Io(_) => "Io",
        }
    }

    /// Process exit status: 2 for input/parse problems, 3 for numerical
    /// precondition failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            WktError::Config(_)
            | WktError::Parse(_)
            | WktError::Io(_)
            | WktError::IncompleteGrid(_)
            | WktError::NegativeCount { .. }
            | WktError::InvalidValue(_)
            | WktError::UnknownKind => 2,
            WktError::NonUniformGrid(_) | WktError::NotSquare(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, WktError>;
