use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LawError {
    #[error("power-law exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("curvature must be positive, got {0}")]
    NonPositiveCurvature(f64),
    #[error("speed law evaluation is not finite at x = {x}")]
    Evaluation { x: f64 },
    #[error("invalid probe range [{lo}, {hi}] with {probes} probes")]
    ProbeRange { lo: f64, hi: f64, probes: usize },
    #[error("tail integral quadrature did not converge at k = {k}")]
    Quadrature { k: f64 },
    #[error("unknown speed law '{0}' (expected power:<p>)")]
    UnknownLaw(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("grid size {0} must be a power of two and at least 32")]
    GridSize(usize),
    #[error("profile has {got} samples, grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("curvature is not positive at node {index} (k = {value})")]
    NonPositiveCurvature { index: usize, value: f64 },
    #[error("convexity lost at node {index} (h'' + h = {value})")]
    ConvexityLoss { index: usize, value: f64 },
    #[error("curvature profile is not closed (residual {residual:e}, length {length:e})")]
    NotClosed { residual: f64, length: f64 },
    #[error("profile is numerically non-convex (k_max/k_min = {ratio:e})")]
    Degenerate { ratio: f64 },
    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("step rejected: {0}")]
    StepRejected(String),
    #[error("invalid flow configuration: {0}")]
    Config(String),
    #[error("speed law violates the flow hypotheses on [{lo}, {hi}]")]
    Hypotheses { lo: f64, hi: f64 },
    #[error("trajectory has no snapshots")]
    EmptyTrajectory,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("monitor '{monitor}' needs at least {needed} snapshots, got {got}")]
    InsufficientData { monitor: &'static str, needed: usize, got: usize },
    #[error("monitor '{0}' needs a blow-up time estimate")]
    MissingBlowUp(&'static str),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("trajectory has no snapshots")]
    EmptyTrajectory,
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("time {t} is at or past the blow-up time {omega}")]
    PastBlowUp { t: f64, omega: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("polygon is not strictly convex at vertex {0}")]
    NonConvex(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
