use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("N = {0} has no representation k^2 + kl + l^2 with k >= l >= 1")]
    NotCritical(i64),
    #[error("length class N = {0} has no pair with positive frequency")]
    NoPositiveFrequency(i64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("z = {z} is within tolerance of a pole (relative denominator {rel:e})")]
    NearPole { z: f64, rel: f64 },
    #[error("constant E vanishes for ({k},{l})")]
    Case { k: i64, l: i64 },
    #[error("grid too coarse: {0}")]
    Resolution(String),
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("fixed-point iteration diverged at step {step} (update {update:e})")]
    FixedPointDiverged { step: usize, update: f64 },
    #[error("target not reachable: residual stagnated at {residual:e} relative")]
    NotReachable { residual: f64 },
    #[error("root derivative singular near z = {z}: |3 lambda^2 + 1| = {value:e}")]
    RootDerivativeSingular { z: num_complex::Complex64, value: f64 },
    #[error("support leak: mass outside [0, T] is {0:e} relative")]
    SupportLeak(f64),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
