//! Fixed-precision binary floats for the geometric (non-exact) side:
//! lengths, hyperbolic functions, analytic bounds.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use crate::number::Rational;

pub const DEFAULT_PRECISION_BITS: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache allocation"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// A binary float carrying its working precision in bits.
#[derive(Clone, Debug)]
pub struct HpFloat {
    value: BigFloat,
    bits: usize,
}

impl HpFloat {
    fn wrap(value: BigFloat, bits: usize) -> Self {
        HpFloat { value, bits }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn from_u64(n: u64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_u64(n, bits), bits)
    }

    pub fn from_i64(n: i64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_i64(n, bits), bits)
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_f64(x, bits), bits)
    }

    fn parse_integer(digits: &str, bits: usize) -> BigFloat {
        with_consts(|cc| BigFloat::parse(digits, Radix::Dec, bits, RM, cc))
    }

    /// Correctly rounded up to the final division.
    pub fn from_rational(q: &Rational, bits: usize) -> Self {
        let guard = bits + 64;
        let n = Self::parse_integer(&q.numer().to_string(), guard);
        let d = Self::parse_integer(&q.denom().to_string(), guard);
        Self::wrap(n.div(&d, bits, RM), bits)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::wrap(self.value.add(&o.value, self.bits, RM), self.bits)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::wrap(self.value.sub(&o.value, self.bits, RM), self.bits)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::wrap(self.value.mul(&o.value, self.bits, RM), self.bits)
    }

    pub fn div(&self, o: &Self) -> Self {
        Self::wrap(self.value.div(&o.value, self.bits, RM), self.bits)
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.value.abs(), self.bits)
    }

    pub fn neg(&self) -> Self {
        Self::wrap(self.value.neg(), self.bits)
    }

    pub fn cosh(&self) -> Self {
        let v = with_consts(|cc| self.value.cosh(self.bits, RM, cc));
        Self::wrap(v, self.bits)
    }

    pub fn sinh(&self) -> Self {
        let v = with_consts(|cc| self.value.sinh(self.bits, RM, cc));
        Self::wrap(v, self.bits)
    }

    /// Inverse hyperbolic cosine; NaN below 1.
    pub fn acosh(&self) -> Self {
        let v = with_consts(|cc| self.value.acosh(self.bits, RM, cc));
        Self::wrap(v, self.bits)
    }

    pub fn ln(&self) -> Self {
        let v = with_consts(|cc| self.value.ln(self.bits, RM, cc));
        Self::wrap(v, self.bits)
    }

    pub fn is_nan(&self) -> bool {
        self.value.is_nan()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// `2^-k` at this precision.
    pub fn pow2_neg(k: usize, bits: usize) -> Self {
        let two = BigFloat::from_u64(2, bits);
        Self::wrap(BigFloat::from_u64(1, bits).div(&two.powi(k, bits, RM), bits, RM), bits)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_string().parse().unwrap_or(f64::NAN)
    }
}

impl PartialEq for HpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for HpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl fmt::Display for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = with_consts(|cc| self.value.format(Radix::Dec, RM, cc))
            .unwrap_or_else(|_| "NaN".to_string());
        write!(f, "{s}")
    }
}
