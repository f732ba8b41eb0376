use thiserror::Error;

use crate::metric::NewtonSolveTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A jet operation left the smooth domain of the function (sqrt of a
    /// negative leading coefficient, division by a vanishing one, ...).
    #[error("jet domain error: {0}")]
    JetDomain(String),

    #[error("requested derivative order {requested} exceeds the engine limit {limit}")]
    OrderTooHigh { requested: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("norm is undefined at the origin")]
    UndefinedAtOrigin,

    #[error("point is not interior to the domain (phi(x - x_o) = {level})")]
    OutsideDomain { level: f64 },

    #[error("implicit Funk solve failed after {} iterations (residual {:e})", .0.iterations, .0.residual)]
    Solver(NewtonSolveTrace),

    #[error("metric value is not positive ({value:e}) at the requested point")]
    NonPositive { value: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("singular linear system (pivot {pivot:e})")]
    Singular { pivot: f64 },

    #[error("degenerate flag: u is parallel to y (denominator {denominator:e})")]
    DegenerateFlag { denominator: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0}")]
    Config(String),

    #[error("integration step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
}
