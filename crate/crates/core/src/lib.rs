pub mod census;
pub mod cluster;
pub mod error;
pub mod growth;
pub mod hpfloat;
pub mod moebius;
pub mod number;
pub mod rules;
pub mod ypiece;

pub use error::{Error, Result};
pub use hpfloat::HpFloat;
pub use number::{Poly, Rational, TraceValue};
