//! Exact 2×2 matrix algebra for PSL(2,ℝ) elements with rational entries:
//! traces, classification, isometric circles and axes.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hpfloat::HpFloat;
use crate::number::{format_rational, int, Rational, TraceValue};

/// A signed SL(2,ℚ) matrix `[[a, b], [c, d]]` with `ad - bc = 1`.
///
/// Signed trace sums are not invariant under `T ↦ -T`, so the raw
/// representative is kept.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sl2 {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Sl2 {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self> {
        let det = &a * &d - &b * &c;
        if !det.is_one() {
            return Err(Error::NotUnimodular(format_rational(&det)));
        }
        Ok(Sl2 { a, b, c, d })
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Sl2::new(int(a), int(b), int(c), int(d))
    }

    pub fn identity() -> Self {
        Sl2 {
            a: int(1),
            b: int(0),
            c: int(0),
            d: int(1),
        }
    }

    pub fn mul(&self, o: &Sl2) -> Sl2 {
        Sl2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    /// Adjugate, which is the inverse for determinant one.
    pub fn inverse(&self) -> Sl2 {
        Sl2 {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    pub fn signed_trace(&self) -> Rational {
        &self.a + &self.d
    }

    fn negate(&self) -> Sl2 {
        Sl2 {
            a: -&self.a,
            b: -&self.b,
            c: -&self.c,
            d: -&self.d,
        }
    }
}

/// Point `re + i·im` of the extended complex plane (finite part only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CPoint {
    pub re: Rational,
    pub im: Rational,
}

/// Normalized PSL(2,ℚ) representative: `c > 0`, or `c = 0` and `d > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Moebius(Sl2);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Identity,
    Parabolic,
    Elliptic,
    Hyperbolic,
}

/// Euclidean circle centered on the real axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circle {
    pub center_x: Rational,
    pub radius_sq: Rational,
}

impl Circle {
    pub fn contains(&self, p: &CPoint) -> bool {
        let dx = &p.re - &self.center_x;
        &dx * &dx + &p.im * &p.im == self.radius_sq
    }
}

impl Moebius {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self> {
        Ok(Moebius::from_sl2(Sl2::new(a, b, c, d)?))
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Ok(Moebius::from_sl2(Sl2::from_ints(a, b, c, d)?))
    }

    pub fn from_sl2(m: Sl2) -> Self {
        let flip = m.c.is_negative() || (m.c.is_zero() && m.d.is_negative());
        Moebius(if flip { m.negate() } else { m })
    }

    pub fn identity() -> Self {
        Moebius(Sl2::identity())
    }

    /// `z ↦ z + k`.
    pub fn translation(k: Rational) -> Self {
        Moebius(Sl2 {
            a: int(1),
            b: k,
            c: int(0),
            d: int(1),
        })
    }

    pub fn matrix(&self) -> &Sl2 {
        &self.0
    }

    pub fn a(&self) -> &Rational {
        &self.0.a
    }
    pub fn b(&self) -> &Rational {
        &self.0.b
    }
    pub fn c(&self) -> &Rational {
        &self.0.c
    }
    pub fn d(&self) -> &Rational {
        &self.0.d
    }

    pub fn trace_rational(&self) -> Rational {
        self.0.signed_trace().abs()
    }

    /// `|a + d|`.
    pub fn trace(&self) -> TraceValue {
        TraceValue::Rational(self.trace_rational())
    }

    pub fn is_identity(&self) -> bool {
        self.0 == Sl2::identity()
    }

    pub fn classify(&self) -> Classification {
        if self.is_identity() {
            return Classification::Identity;
        }
        let t = self.trace_rational();
        let two = int(2);
        match t.cmp(&two) {
            std::cmp::Ordering::Greater => Classification::Hyperbolic,
            std::cmp::Ordering::Equal => Classification::Parabolic,
            std::cmp::Ordering::Less => Classification::Elliptic,
        }
    }

    pub fn compose(&self, o: &Moebius) -> Moebius {
        Moebius::from_sl2(self.0.mul(&o.0))
    }

    pub fn invert(&self) -> Moebius {
        Moebius::from_sl2(self.0.inverse())
    }

    /// `R T R⁻¹`.
    pub fn conjugate(&self, r: &Moebius) -> Moebius {
        r.compose(self).compose(&r.invert())
    }

    /// Image of a point; `None` when it is sent to infinity.
    pub fn apply(&self, p: &CPoint) -> Option<CPoint> {
        let m = &self.0;
        // (a p + b) / (c p + d) with complex p.
        let nr = &m.a * &p.re + &m.b;
        let ni = &m.a * &p.im;
        let dr = &m.c * &p.re + &m.d;
        let di = &m.c * &p.im;
        let den = &dr * &dr + &di * &di;
        if den.is_zero() {
            return None;
        }
        Some(CPoint {
            re: (&nr * &dr + &ni * &di) / &den,
            im: (&ni * &dr - &nr * &di) / &den,
        })
    }

    /// `I(T) = {|cz + d| = 1}`: center `-d/c`, squared radius `1/c²`.
    pub fn isometric_circle(&self) -> Result<Circle> {
        let c = self.c();
        if c.is_zero() {
            return Err(Error::DegenerateIsometricCircle);
        }
        Ok(Circle {
            center_x: -self.d() / c,
            radius_sq: (c * c).recip(),
        })
    }

    /// Three rational points on `I(T)`: both real endpoints and the point at
    /// angle `atan(4/3)` above the center.
    pub fn isometric_circle_points(&self) -> Result<[CPoint; 3]> {
        let circle = self.isometric_circle()?;
        let r = self.c().abs().recip();
        let real = |x: Rational| CPoint { re: x, im: int(0) };
        Ok([
            real(&circle.center_x - &r),
            real(&circle.center_x + &r),
            CPoint {
                re: &circle.center_x + &r * Rational::new(3.into(), 5.into()),
                im: &r * Rational::new(4.into(), 5.into()),
            },
        ])
    }

    /// Axis `C(T)` of a hyperbolic element as a Euclidean circle:
    /// center `(a - d)/(2c)`, squared radius `((a + d)² - 4)/(4c²)`.
    pub fn axis_circle(&self) -> Result<Circle> {
        if self.classify() != Classification::Hyperbolic {
            return Err(Error::NotHyperbolic(format_rational(&self.trace_rational())));
        }
        let c = self.c();
        if c.is_zero() {
            return Err(Error::DegenerateAxis);
        }
        let s = self.0.signed_trace();
        let four = int(4);
        Ok(Circle {
            center_x: (self.a() - self.d()) / (int(2) * c),
            radius_sq: (&s * &s - &four) / (four * c * c),
        })
    }

    /// `|MN|² = r₁² + r₂²` for the centers and radii of `I(T)` and `C(T)`.
    pub fn axis_orthogonal_to_isometric_circle(&self) -> Result<bool> {
        let axis = self.axis_circle()?;
        let iso = self.isometric_circle()?;
        let dist = &axis.center_x - &iso.center_x;
        Ok(&dist * &dist == iso.radius_sq + axis.radius_sq)
    }
}

impl fmt::Display for Sl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            format_rational(&self.a),
            format_rational(&self.b),
            format_rational(&self.c),
            format_rational(&self.d)
        )
    }
}

impl fmt::Display for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Sufficient condition for disjoint axes of `T1 = [[a1,b1],[c,d]]` and
/// `T2 = [[a2,b2],[λc,λd]]`: `(a1 + d)(a2 + λd) < 0`.
///
/// Entries are the signed representatives as supplied, not normalized.
pub fn axes_disjoint(t1: &Sl2, t2: &Sl2, lambda: &Rational) -> Result<bool> {
    if !lambda.is_positive() || t1.c.is_zero() {
        return Err(Error::StructureMismatch);
    }
    if t2.c != &t1.c * lambda || t2.d != &t1.d * lambda {
        return Err(Error::StructureMismatch);
    }
    for t in [t1, t2] {
        let m = Moebius::from_sl2(t.clone());
        if m.classify() != Classification::Hyperbolic {
            return Err(Error::NotHyperbolic(format_rational(&m.trace_rational())));
        }
    }
    let product = (&t1.a + &t1.d) * (&t2.a + lambda * &t1.d);
    Ok(product.is_negative())
}

/// Geodesic length `L = 2·arccosh(t/2)` for a trace `t ≥ 2`.
pub fn trace_to_length(t: &TraceValue, bits: usize) -> Result<HpFloat> {
    let x = match t {
        TraceValue::Rational(q) => {
            if *q < int(2) {
                return Err(Error::TraceBelowTwo(format_rational(q)));
            }
            HpFloat::from_rational(q, bits)
        }
        TraceValue::Float(x) => {
            if *x < HpFloat::from_u64(2, x.bits()) {
                return Err(Error::TraceBelowTwo(x.to_string()));
            }
            x.clone()
        }
        TraceValue::Symbolic(_) => return Err(Error::SymbolicInput),
    };
    let bits = x.bits();
    let half = x.div(&HpFloat::from_u64(2, bits));
    Ok(half.acosh().mul(&HpFloat::from_u64(2, bits)))
}

/// Trace `t = 2·cosh(L/2)` of a closed geodesic of length `L ≥ 0`.
pub fn length_to_trace(length: &HpFloat) -> Result<HpFloat> {
    let bits = length.bits();
    if *length < HpFloat::from_u64(0, bits) {
        return Err(Error::NegativeLength);
    }
    let two = HpFloat::from_u64(2, bits);
    Ok(length.div(&two).cosh().mul(&two))
}
