//! Explicit generator pairs whose quotient contains a Y-piece with one cusp.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::moebius::{Moebius, Sl2};
use crate::number::{format_rational, int, Rational, TraceValue};

/// Boundary traces of `Y(x, y, z)`. Trace 2 encodes a cusp; with `x_elliptic`
/// the first boundary is an elliptic fixed point with trace in `[0, 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct YPieceSpec {
    pub tx: TraceValue,
    pub ty: TraceValue,
    pub tz: TraceValue,
    pub x_elliptic: bool,
}

fn at_least_two(t: &TraceValue) -> bool {
    !matches!(t.cmp_rational(&int(2)), Some(std::cmp::Ordering::Less))
}

impl YPieceSpec {
    pub fn new(tx: TraceValue, ty: TraceValue, tz: TraceValue, x_elliptic: bool) -> Result<Self> {
        let bad = |what: String| Err(Error::InadmissibleYPiece(what));
        if x_elliptic {
            let in_range = matches!(
                (tx.cmp_rational(&int(0)), tx.cmp_rational(&int(2))),
                (Some(o1), Some(std::cmp::Ordering::Less)) if o1.is_ge()
            );
            if !in_range {
                return bad(format!("elliptic boundary trace {tx} outside [0, 2)"));
            }
        } else if !at_least_two(&tx) {
            return bad(format!("boundary trace {tx} below 2 without the elliptic flag"));
        }
        for t in [&ty, &tz] {
            if !at_least_two(t) {
                return bad(format!("boundary trace {t} below 2"));
            }
        }
        Ok(YPieceSpec {
            tx,
            ty,
            tz,
            x_elliptic,
        })
    }

    /// `Y(x, y, 0)`.
    pub fn cusped(tx: TraceValue, ty: TraceValue) -> Result<Self> {
        Self::new(tx, ty, TraceValue::two(), false)
    }

    pub fn cusped_elliptic(tx: TraceValue, ty: TraceValue) -> Result<Self> {
        Self::new(tx, ty, TraceValue::two(), true)
    }
}

/// Generators `T_u = [[a1,b1],[c,d]]`, `T_v = [[a2,b2],[c,d]]` with
/// `a1 + d = ε·tr(u)` and `a2 + d = -ε·tr(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorPair {
    pub tu: Sl2,
    pub tv: Sl2,
    pub epsilon: i8,
    /// `T_u T_v⁻¹ = [[1, ε(tr u + tr v)/c], [0, 1]]`.
    pub parabolic_product: Moebius,
}

impl GeneratorPair {
    /// Checks the shared-row structure and derives `ε` and the parabolic product.
    pub fn from_signed(tu: Sl2, tv: Sl2) -> Result<Self> {
        if tu.c != tv.c || tu.d != tv.d || tu.c.is_zero() {
            return Err(Error::StructureMismatch);
        }
        let s1 = tu.signed_trace();
        let s2 = tv.signed_trace();
        if (&s1 * &s2).is_positive() {
            return Err(Error::InadmissibleYPiece(format!(
                "signed traces {} and {} have the same sign",
                format_rational(&s1),
                format_rational(&s2)
            )));
        }
        let epsilon = if s1.is_positive() || (s1.is_zero() && !s2.is_positive()) {
            1
        } else {
            -1
        };
        let product = tu.mul(&tv.inverse());
        let parabolic_product = Moebius::from_sl2(product);
        let pair = GeneratorPair {
            tu,
            tv,
            epsilon,
            parabolic_product,
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn tu_moebius(&self) -> Moebius {
        Moebius::from_sl2(self.tu.clone())
    }

    pub fn tv_moebius(&self) -> Moebius {
        Moebius::from_sl2(self.tv.clone())
    }

    pub fn tx(&self) -> Rational {
        self.tu.signed_trace().abs()
    }

    pub fn ty(&self) -> Rational {
        self.tv.signed_trace().abs()
    }

    /// Re-checks every structural invariant in exact arithmetic.
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::InadmissibleYPiece(what.to_string()));
        if self.tu.c != self.tv.c || self.tu.d != self.tv.d {
            return fail("generators do not share their second row");
        }
        let eps = int(self.epsilon.into());
        if self.tu.signed_trace() != &eps * self.tx() || self.tv.signed_trace() != -&eps * self.ty()
        {
            return fail("signed traces disagree with epsilon");
        }
        let p = self.parabolic_product.matrix();
        if !(p.a.is_one() && p.d.is_one() && p.c.is_zero()) {
            return fail("T_u T_v^-1 is not an upper unipotent matrix");
        }
        let expected = &eps * (self.tx() + self.ty()) / &self.tu.c;
        if p.b != expected {
            return fail("parabolic translation length differs from eps(tx+ty)/c");
        }
        let (a1, b1) = (&self.tu.a, &self.tu.b);
        let (a2, b2) = (&self.tv.a, &self.tv.b);
        if (b1 * a2 - a1 * b2) * &self.tu.c != &eps * (self.tx() + self.ty()) {
            return fail("(b1 a2 - a1 b2) c differs from eps(tx+ty)");
        }
        Ok(())
    }
}

fn require_rational(t: &TraceValue) -> Result<Rational> {
    match t {
        TraceValue::Rational(q) => Ok(q.clone()),
        TraceValue::Symbolic(_) => Err(Error::SymbolicInput),
        TraceValue::Float(_) => Err(Error::InexactInput),
    }
}

/// Canonical pair for `Y(u, v, 0)`: `T_u = [[tx, -1], [1, 0]]`, `T_v = [[-ty, -1], [1, 0]]`.
pub fn build_generators(spec: &YPieceSpec) -> Result<GeneratorPair> {
    if spec.tz != TraceValue::two() {
        return Err(Error::UnsupportedThirdBoundary(spec.tz.to_string()));
    }
    let spec = YPieceSpec::new(spec.tx.clone(), spec.ty.clone(), spec.tz.clone(), spec.x_elliptic)?;
    let tx = require_rational(&spec.tx)?;
    let ty = require_rational(&spec.ty)?;
    let tu = Sl2::new(tx, int(-1), int(1), int(0))?;
    let tv = Sl2::new(-ty, int(-1), int(1), int(0))?;
    GeneratorPair::from_signed(tu, tv)
}

fn floor_div(n: &Rational, d: &Rational) -> BigInt {
    (n / d).floor().to_integer()
}

fn ceil_div(n: &Rational, d: &Rational) -> BigInt {
    (n / d).ceil().to_integer()
}

/// Completes `T_u` (with `c ≠ 0`) by `T_v = T^k T_u`, `T = [[1,1],[0,1]]`, for the
/// integer `k` of least absolute value with `(a1+d)(a1+kc+d) ≤ 0` and
/// `|a1+kc+d| ≥ 2`; ties go to the negative `k`.
pub fn complete_to_ypiece(tu: &Moebius) -> Result<(GeneratorPair, BigInt)> {
    let c = tu.c();
    if c.is_zero() {
        return Err(Error::UpperTriangularInput);
    }
    // Normalized, so c > 0.
    let s = tu.a() + tu.d();
    let k = if s.is_positive() {
        floor_div(&(int(-2) - &s), c)
    } else if s.is_negative() {
        ceil_div(&(int(2) - &s), c)
    } else {
        -ceil_div(&int(2), c)
    };
    let kq = Rational::from_integer(k.clone());
    let m = tu.matrix();
    let tv = Sl2::new(&m.a + &kq * c, &m.b + &kq * &m.d, m.c.clone(), m.d.clone())?;
    Ok((GeneratorPair::from_signed(m.clone(), tv)?, k))
}

/// Recovers `(tx, ty, 2)` from a pair.
pub fn spec_of_pair(pair: &GeneratorPair) -> YPieceSpec {
    let tx = pair.tx();
    YPieceSpec {
        x_elliptic: tx < int(2),
        tx: TraceValue::Rational(tx),
        ty: TraceValue::Rational(pair.ty()),
        tz: TraceValue::two(),
    }
}
