use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    MapInconsistent(String),
    EulerMismatch(String),
    HypothesisViolated(String),
    ZeroCoefficient(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MapInconsistent(m) => write!(f, "MapInconsistent: {m}"),
            Violation::EulerMismatch(m) => write!(f, "EulerMismatch: {m}"),
            Violation::HypothesisViolated(m) => write!(f, "HypothesisViolated: {m}"),
            Violation::ZeroCoefficient(m) => write!(f, "ZeroCoefficient: {m}"),
        }
    }
}

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid surface:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<Violation>),
    #[error("oriented edge is a counter-clockwise boundary edge")]
    CcwBoundaryEdge,
    #[error("arc {0} is close to the boundary")]
    CloseToBoundary(String),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("not a triangulation: {0}")]
    NotATriangulation(String),
    #[error("multiplicity of {0} is not invertible in the ground field")]
    MultiplicityNotInvertible(String),
    #[error("rewrite budget exhausted while normalizing a product")]
    DepthCapExceeded,
    #[error("truncation unstable: dimension {0} at length {1} but {2} at length {3}")]
    UnstableTruncation(usize, usize, usize, usize),
    #[error("surface contains a special monogon; the truncation oracle does not apply")]
    SpecialMonogonPresent,
    #[error("the radius arc to the special puncture is present")]
    RadiusArcPresent,
    #[error("surface is not sparse: {0}")]
    NotSparse(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("exceptional triangulation: no tame weight function exists")]
    ExceptionalTriangulation,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
