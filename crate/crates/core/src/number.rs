//! Exact scalars: big rationals, integer polynomials in one indeterminate,
//! and the tagged [`TraceValue`] that flows through the rule engine.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hpfloat::HpFloat;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, an integer, or a finite decimal such as `2.375` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.bytes().chain(frac.bytes()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    let q = Rational::new(n, d);
    Ok(if negative { -q } else { q })
}

/// `p/q` with the denominator omitted for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exponent of the prime `p` in `n` (n ≠ 0).
pub fn valuation(n: &BigInt, p: &BigInt) -> u64 {
    debug_assert!(!n.is_zero());
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Smallest prime factor of `n > 1`.
pub fn smallest_prime_factor(n: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    if n.is_even() {
        return two;
    }
    let mut d = BigInt::from(3);
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            return d;
        }
        d += 2;
    }
    n.clone()
}

/// Polynomial with integer coefficients in the indeterminate `z`, lowest degree first.
/// The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly(Vec<BigInt>);

impl Poly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn constant(c: BigInt) -> Self {
        Poly::new(vec![c])
    }

    /// The indeterminate `z`.
    pub fn z() -> Self {
        Poly::from_i64(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn constant_term(&self) -> BigInt {
        self.0.first().cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let zero = BigInt::zero();
        Poly::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&zero) + other.0.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        Poly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn eval(&self, z: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * z + Rational::from_integer(c.clone()))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (deg, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            match (deg, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{mag}*z")?,
                (_, true) => write!(f, "z^{deg}")?,
                (_, false) => write!(f, "{mag}*z^{deg}")?,
            }
        }
        Ok(())
    }
}

/// A trace: exact rational, integer polynomial in `z`, or high-precision float.
#[derive(Clone, Debug)]
pub enum TraceValue {
    Rational(Rational),
    Symbolic(Poly),
    Float(HpFloat),
}

impl TraceValue {
    pub fn int(n: i64) -> Self {
        TraceValue::Rational(int(n))
    }

    pub fn two() -> Self {
        TraceValue::int(2)
    }

    /// `z - 2`, the symbolic trace of a boundary whose trace plus two is the indeterminate.
    pub fn z_minus_two() -> Self {
        TraceValue::Symbolic(Poly::from_i64(&[-2, 1]))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            TraceValue::Rational(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, TraceValue::Symbolic(_))
    }

    fn promote(&self) -> Result<Poly> {
        match self {
            TraceValue::Symbolic(p) => Ok(p.clone()),
            TraceValue::Rational(q) if is_integer(q) => Ok(Poly::constant(q.numer().clone())),
            TraceValue::Rational(_) => Err(Error::MixedSymbolic),
            TraceValue::Float(_) => Err(Error::SymbolicInput),
        }
    }

    fn binary(
        &self,
        other: &TraceValue,
        exact: impl Fn(&Rational, &Rational) -> Rational,
        symbolic: impl Fn(&Poly, &Poly) -> Poly,
        float: impl Fn(&HpFloat, &HpFloat) -> HpFloat,
    ) -> Result<TraceValue> {
        use TraceValue::*;
        match (self, other) {
            (Rational(a), Rational(b)) => Ok(Rational(exact(a, b))),
            (Symbolic(_), _) | (_, Symbolic(_)) => {
                Ok(Symbolic(symbolic(&self.promote()?, &other.promote()?)))
            }
            (Float(a), Float(b)) => Ok(Float(float(a, b))),
            (Float(a), Rational(b)) => Ok(Float(float(a, &HpFloat::from_rational(b, a.bits())))),
            (Rational(a), Float(b)) => Ok(Float(float(&HpFloat::from_rational(a, b.bits()), b))),
        }
    }

    pub fn add(&self, other: &TraceValue) -> Result<TraceValue> {
        self.binary(other, |a, b| a + b, Poly::add, HpFloat::add)
    }

    pub fn sub(&self, other: &TraceValue) -> Result<TraceValue> {
        self.binary(other, |a, b| a - b, Poly::sub, HpFloat::sub)
    }

    pub fn mul(&self, other: &TraceValue) -> Result<TraceValue> {
        self.binary(other, |a, b| a * b, Poly::mul, HpFloat::mul)
    }

    pub fn scale(&self, k: u64) -> TraceValue {
        self.scale_big(&BigInt::from(k))
    }

    pub fn scale_big(&self, k: &BigInt) -> TraceValue {
        match self {
            TraceValue::Rational(q) => TraceValue::Rational(q * Rational::from_integer(k.clone())),
            TraceValue::Symbolic(p) => TraceValue::Symbolic(p.scale(k)),
            TraceValue::Float(x) => {
                let bits = x.bits();
                TraceValue::Float(x.mul(&HpFloat::from_rational(&Rational::from_integer(k.clone()), bits)))
            }
        }
    }

    pub fn add_int(&self, k: i64) -> TraceValue {
        self.add(&TraceValue::int(k))
            .expect("integers combine with every trace variant")
    }

    /// Ordering against a rational; `None` for symbolic values.
    pub fn cmp_rational(&self, q: &Rational) -> Option<Ordering> {
        match self {
            TraceValue::Rational(a) => Some(a.cmp(q)),
            TraceValue::Float(x) => x.partial_cmp(&HpFloat::from_rational(q, x.bits())),
            TraceValue::Symbolic(_) => None,
        }
    }

    /// True when the value is numeric and lies in `[lo, hi)`; symbolic values are never in range.
    pub fn in_half_open(&self, lo: &Rational, hi: &Rational) -> bool {
        matches!(self.cmp_rational(lo), Some(Ordering::Greater | Ordering::Equal))
            && matches!(self.cmp_rational(hi), Some(Ordering::Less))
    }

    pub fn to_f64(&self) -> Option<f64> {
        match self {
            TraceValue::Rational(q) => Some(rational_to_f64(q)),
            TraceValue::Float(x) => Some(x.to_f64()),
            TraceValue::Symbolic(_) => None,
        }
    }
}

impl PartialEq for TraceValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TraceValue::Rational(a), TraceValue::Rational(b)) => a == b,
            (TraceValue::Symbolic(a), TraceValue::Symbolic(b)) => a == b,
            (TraceValue::Float(a), TraceValue::Float(b)) => a == b,
            _ => false,
        }
    }
}

impl From<Rational> for TraceValue {
    fn from(q: Rational) -> Self {
        TraceValue::Rational(q)
    }
}

impl From<Poly> for TraceValue {
    fn from(p: Poly) -> Self {
        TraceValue::Symbolic(p)
    }
}

impl fmt::Display for TraceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceValue::Rational(q) => write!(f, "{}", format_rational(q)),
            TraceValue::Symbolic(p) => write!(f, "{p}"),
            TraceValue::Float(x) => write!(f, "{x}"),
        }
    }
}
