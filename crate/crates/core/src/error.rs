use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: z = {0} must be positive")]
    InvalidPoint(f64),
    #[error("tangent vectors are based at different points")]
    BaseMismatch,
    #[error("zero tangent vector")]
    ZeroVector,
    #[error("peripheral element (lower-left entry vanishes)")]
    Peripheral,
    #[error("horoballs are tangent or overlap (length {0:.3e})")]
    Overlapping(f64),
    #[error("horoballs share the center")]
    SameCenter,
    #[error("constant cord")]
    ConstantCord,
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("horoball height {height} is below the embedded height {embedded}")]
    NotEmbedded { height: f64, embedded: f64 },
    #[error("cover certificate failed: {0}")]
    Certificate(String),
    #[error("boundary field is not tangent to the horosphere (defect {0:.3e})")]
    NotTangent(f64),
    #[error("non-convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("integration step underflow at z = {0:.3e}")]
    Underflow(f64),
    #[error("eigen-solver failure")]
    Eigen,
    #[error("bisection failure: {0}")]
    Bisection(String),
    #[error("centers are not concyclic")]
    NotCoplanar,
    #[error("horocyclic arc of length {0} meets the opposite side")]
    NotHexagon(f64),
    #[error("classes are not composable")]
    NotComposable,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
