//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({0}, {1}) is outside the chart domain")]
    OutOfChart(f64, f64),
    #[error("geodesic integrator step underflow: {0}")]
    StepFailure(String),
    #[error("witness point lies on the region boundary")]
    AmbiguousSide,
    #[error("degenerate vertex {0}: zero-length segment")]
    DegenerateVertex(usize),
    #[error("normal field is nonzero at the node vertex {0}")]
    NodeInSupport(usize),
    #[error("node angle too close to 0 or pi for this configuration (alpha = {0})")]
    AngleDegenerate(f64),
    #[error("curve has {0} self-intersections, at most one is supported")]
    MultipleNodes(usize),
    #[error("operation requires a {0} surface")]
    WrongFamily(&'static str),
    #[error("segment of length {length} exceeds the cap {cap}")]
    SegmentTooLong { length: f64, cap: f64 },
    #[error("geodesic two-point problem failed: {0}")]
    GeodesicSubproblemFailure(String),
    #[error("time step {dt} above stability bound {bound}")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("curve collapsed: enclosed area {0} below floor")]
    CollapseDetected(f64),
    #[error("flow did not collapse within {0} steps")]
    NoCollapse(usize),
    #[error("radius {r} exceeds surgery scale {r_c}")]
    ScaleTooLarge { r: f64, r_c: f64 },
    #[error("solver did not converge: residual {residual} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("curve lost embeddedness: {0}")]
    EmbeddednessLost(String),
    #[error("iteration budget of {0} rounds exhausted")]
    IterationBudget(usize),
    #[error("ball intersection points cannot be ordered: {0}")]
    OrderingAmbiguous(String),
    #[error("surgery output loops overlap")]
    OverlapUnresolved,
    #[error("second variation {0} is not negative")]
    NoNegativeDirection(f64),
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("root not bracketed on [{lo}, {hi}]")]
    RootBracketFailure { lo: f64, hi: f64 },
    #[error("functional increased along contraction at step {step}: {before} -> {after}")]
    MonotonicityViolation { step: usize, before: f64, after: f64 },
    #[error("no embedded circle of curvature {c} on this torus: needs c > {threshold}")]
    NotEmbeddable { c: f64, threshold: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfChart(..) => "OutOfChart",
            Error::StepFailure(_) => "StepFailure",
            Error::AmbiguousSide => "AmbiguousSide",
            Error::DegenerateVertex(_) => "DegenerateVertex",
            Error::NodeInSupport(_) => "NodeInSupport",
            Error::AngleDegenerate(_) => "AngleDegenerate",
            Error::MultipleNodes(_) => "MultipleNodes",
            Error::WrongFamily(_) => "WrongFamily",
            Error::SegmentTooLong { .. } => "SegmentTooLong",
            Error::GeodesicSubproblemFailure(_) => "GeodesicSubproblemFailure",
            Error::StabilityViolation { .. } => "StabilityViolation",
            Error::CollapseDetected(_) => "CollapseDetected",
            Error::NoCollapse(_) => "NoCollapse",
            Error::ScaleTooLarge { .. } => "ScaleTooLarge",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::EmbeddednessLost(_) => "EmbeddednessLost",
            Error::IterationBudget(_) => "IterationBudget",
            Error::OrderingAmbiguous(_) => "OrderingAmbiguous",
            Error::OverlapUnresolved => "OverlapUnresolved",
            Error::NoNegativeDirection(_) => "NoNegativeDirection",
            Error::DomainError(_) => "DomainError",
            Error::RootBracketFailure { .. } => "RootBracketFailure",
            Error::MonotonicityViolation { .. } => "MonotonicityViolation",
            Error::NotEmbeddable { .. } => "NotEmbeddable",
            Error::Invalid(_) => "Invalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
