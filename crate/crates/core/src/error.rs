use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: x_left = {x_left} must be less than x_right = {x_right}")]
    InvalidDomain { x_left: f64, x_right: f64 },
    #[error("too few cells: {n_cells} (need at least 3)")]
    TooFewCells { n_cells: usize },
    #[error("fine grid with {n_cells} cells is not divisible by three")]
    NotDivisibleByThree { n_cells: usize },
    #[error("coarse grid would have {n_cells} cells (need at least 3)")]
    CoarseTooSmall { n_cells: usize },
    #[error("non-finite input: {0}")]
    NonFinite(f64),
    #[error("diffusion coefficient {value} at edge {edge} is not positive")]
    NonpositiveDiffusion { edge: usize, value: f64 },
    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("BDF2 step requires the solution two levels back")]
    MissingHistory,
    #[error("time step must be positive, got {0}")]
    NonpositiveTau(f64),
    #[error("t_final / tau = {ratio} is not a whole number of steps")]
    NonintegralStepCount { ratio: f64 },
    #[error("zero pivot in tridiagonal solve at row {index}")]
    ZeroPivot { index: usize },
    #[error("zero diagonal entry at row {index}")]
    ZeroDiagonal { index: usize },
    #[error("cannot normalize a vector with zero mass")]
    ZeroMass,
    #[error("two-level iteration did not converge in {cycles} cycles (last norm gap {gap:e})")]
    NoConvergence { cycles: usize, gap: f64 },
    #[error("unknown problem '{name}'; valid ids: {valid}")]
    UnknownProblem { name: String, valid: String },
    #[error("grid sequence {0:?} must increase by a factor of three")]
    NotFactorThreeSequence(Vec<usize>),
    #[error("need at least {needed} values, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("error values must be positive, got {0}")]
    NonpositiveError(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty input")]
    EmptyInput,
}
