use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("poles inside the closed unit disc: {}", fmt_points(.0))]
    PoleInDisc(Vec<Complex64>),
    #[error("pole on the unit circle: {}", fmt_points(.0))]
    PoleOnCircle(Vec<Complex64>),
    #[error("evaluation point {0} is a pole")]
    PoleAt(Complex64),
    #[error("function is identically zero")]
    IdenticallyZero,
    #[error("phi must be a nonzero function")]
    PhiZero,
    #[error("bezout identity is ill-conditioned (residual {residual:e})")]
    IllConditionedBezout { residual: f64 },
    #[error("no zero of phi registered at {0}")]
    UnknownNode(Complex64),
    #[error("Toeplitz block at node {node} is singular (pivot {pivot:e})")]
    SingularBlock { node: Complex64, pivot: f64 },
    #[error("no sign choice makes e_a a unit at node {node} (residual {residual:e})")]
    UnitCalibration { node: Complex64, residual: f64 },
    #[error("element is not circle invertible")]
    NotCircleInvertible,
    #[error("verdict depends on zeros within the boundary band")]
    BoundaryAmbiguous,
    #[error("truncation unsound: tail estimate {tail:e} exceeds {limit:e}")]
    TruncationUnsound { tail: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("tolerance `{name}` must be positive and finite, got {value}")]
    InvalidTolerance { name: &'static str, value: f64 },
    #[error("unknown tolerance `{0}`")]
    UnknownTolerance(String),
    #[error("linear system is singular")]
    Singular,
    #[error("similarity witness failed to verify (residual {residual:e})")]
    WitnessFailed { residual: f64 },
    #[error("Jordan chain conditions fail at step {0}")]
    ChainBreaks(usize),
    #[error("kernel dimension is indeterminate: no clear gap around the singular value threshold")]
    Indeterminate,
}

fn fmt_points(points: &[Complex64]) -> String {
    points
        .iter()
        .map(|p| format!("{}{:+}i", p.re, p.im))
        .collect::<Vec<_>>()
        .join(", ")
}
