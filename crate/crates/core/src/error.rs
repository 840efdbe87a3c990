use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: max |A_ij - conj(A_ji)| = {deviation:e} exceeds {tolerance:e}")]
    NonHermitianInput { deviation: f64, tolerance: f64 },

    #[error("vector is not unit length: |v| = {norm}")]
    NonUnitVector { norm: f64 },

    #[error("observable is not a projector: max |P^2 - P| = {deviation:e}")]
    NonProjectorInput { deviation: f64 },

    #[error("imaginary residue {residue:e} in a quantity that must be real")]
    ImaginaryResidue { residue: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("ensemble weights do not sum to one (deficit {deficit:e})")]
    UnnormalizedWeights { deficit: f64 },

    #[error("negative ensemble weight {0}")]
    NegativeWeight(f64),

    #[error("Werner parameter beta = {0} outside [0, 1]")]
    BetaOutOfRange(f64),

    #[error("state is not pure (largest eigenvalue {largest}); use the mixed-state criteria")]
    NotPure { largest: f64 },

    #[error("averaging mode {mode} does not match {other}")]
    ModeMismatch { mode: String, other: String },

    #[error("curve rejected: {0}")]
    InvalidCurve(String),

    #[error("degenerate least-squares fit")]
    DegenerateFit,

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("rate R0 must be positive, got {0}")]
    NonPositiveR0(f64),

    #[error("negative rate {0}")]
    NegativeRate(f64),

    #[error("unknown figure index {0} (expected 1, 2 or 3)")]
    UnknownFigure(u32),

    #[error("grid of {got} points too small (need at least {min})")]
    GridTooSmall { min: usize, got: usize },

    #[error("state spec: {0}")]
    Spec(String),
}
