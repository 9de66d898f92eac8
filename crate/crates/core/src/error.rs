use thiserror::Error;

/// Errors produced by the trace-set machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix determinant is {0}, expected 1")]
    NotUnimodular(String),
    #[error("isometric circle undefined: lower-left entry is zero")]
    DegenerateIsometricCircle,
    #[error("axis is a vertical line: lower-left entry is zero")]
    DegenerateAxis,
    #[error("transformation is not hyperbolic (trace {0})")]
    NotHyperbolic(String),
    #[error("second rows are not proportional with the given factor")]
    StructureMismatch,
    #[error("trace {0} is below 2")]
    TraceBelowTwo(String),
    #[error("length must be non-negative")]
    NegativeLength,
    #[error("third boundary must be a cusp (trace 2), got {0}")]
    UnsupportedThirdBoundary(String),
    #[error("input is upper triangular; it must be parabolic in a discrete group with [[1,1],[0,1]]")]
    UpperTriangularInput,
    #[error("inadmissible Y-piece: {0}")]
    InadmissibleYPiece(String),
    #[error("rule parameter must be a positive integer")]
    ZeroParameter,
    #[error("no right-angled hexagon with these sides (cosh argument {0} < 1)")]
    NoSuchHexagon(String),
    #[error("symbolic traces are not supported here")]
    SymbolicInput,
    #[error("operation requires exact rational traces")]
    InexactInput,
    #[error("cannot mix a non-integral rational with a symbolic polynomial trace")]
    MixedSymbolic,
    #[error("regime violation: {0}")]
    RegimeViolation(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("bad regime: {0}")]
    BadRegime(String),
    #[error("coprimality assumption failed at step {step}: gcd = {gcd}")]
    CoprimalityFailure { step: usize, gcd: String },
    #[error("enumeration of {words} words exceeds node budget {budget}")]
    DepthTooLarge { words: u128, budget: u128 },
    #[error("witness invariant violated: {0}")]
    InvalidWitness(String),
    #[error("integers of about {bits} bits exceed the limit of {limit} bits")]
    SizeLimit { bits: u64, limit: u64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
