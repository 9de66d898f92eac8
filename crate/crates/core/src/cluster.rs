//! Explicit clusters of trace values `m (a/b)^(2^k) - 2` in a unit interval,
//! certifying that a rational non-integer `tr x` breaks bounded clustering.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::{format_rational, int, parse_rational, smallest_prime_factor, valuation, Rational, TraceValue};
use crate::rules::{rule_collapse, rule_nu_n_big};

/// Default ceiling on the size of any integer in a witness.
pub const DEFAULT_MAX_BITS: u64 = 10_000_000;

/// Positive `u, v` with `|ua - vb| = 1`, `v < a` and `p ∤ v`, for coprime
/// `a, b > 1` and a prime `p | b`.
pub fn bezout_variant(a: &BigInt, b: &BigInt, p: &BigInt) -> Result<(BigInt, BigInt)> {
    let one = BigInt::one();
    if *a <= one || *b <= one {
        return Err(Error::BadInput("a and b must exceed 1".into()));
    }
    if !a.gcd(b).is_one() {
        return Err(Error::BadInput(format!("gcd({a}, {b}) is not 1")));
    }
    if *p <= one || !(b % p).is_zero() || smallest_prime_factor(p) != *p {
        return Err(Error::BadInput(format!("{p} is not a prime divisor of {b}")));
    }
    // x a + y b = 1, so u a - r b = 1 with r = -y mod a.
    let y = a.extended_gcd(b).y;
    let r = (-y).mod_floor(a);
    let u = (&one + &r * b) / a;
    if (&r % p).is_zero() {
        // (b - u) a - (a - r) b = -1, and p ∤ a - r because p ∤ a.
        return Ok((b - u, a - r));
    }
    Ok((u, r))
}

/// `f(0) = 0` and each later `f(k)` minimal with `b^(2^f(k)) > 2 ∏_{i<k} a^(2^f(i))`.
pub fn choose_schedule(a: &BigInt, b: &BigInt, n: usize) -> Result<Vec<u32>> {
    if *b <= BigInt::one() || a <= b {
        return Err(Error::BadInput(format!("need a > b > 1, got a = {a}, b = {b}")));
    }
    let mut f = vec![0u32];
    let mut product = a.clone();
    for _ in 1..=n {
        let target = &product * 2;
        let (mut power, mut e) = (b.clone(), 0u32);
        while power <= target {
            power = &power * &power;
            e += 1;
        }
        product *= a.pow(1u32 << e);
        f.push(e);
    }
    Ok(f)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterWitness {
    pub a: BigInt,
    pub b: BigInt,
    pub p: BigInt,
    pub d_exp: u64,
    pub n: usize,
    pub f: Vec<u32>,
    /// `u_1..u_n`.
    pub u: Vec<BigInt>,
    /// `v_1..v_n`.
    pub v: Vec<BigInt>,
    /// `m_0..m_n`.
    pub m: Vec<BigInt>,
    /// `m_i (a/b)^(2^f(i)) - 2`.
    pub values: Vec<Rational>,
    /// Set when `2 < a/b ≤ 4`, i.e. `tr x = a/b - 2` is not hyperbolic.
    pub below_hyperbolic_range: bool,
}

fn g_of(f: u32) -> u32 {
    1u32 << f
}

fn check_regime(a: &BigInt, b: &BigInt) -> Result<()> {
    if b.is_one() {
        return Err(Error::BadRegime(format!("b = 1: trace {a} - 2 is an integer")));
    }
    if !b.is_positive() || *a <= b * 2 {
        return Err(Error::BadRegime(format!("need a > 2b > 2, got a = {a}, b = {b}")));
    }
    if !a.gcd(b).is_one() {
        return Err(Error::BadInput(format!("gcd({a}, {b}) is not 1")));
    }
    Ok(())
}

/// Builds a cluster of `n + 1` distinct values in one unit interval for `z = a/b`.
pub fn build_witness(a: &BigInt, b: &BigInt, n: usize) -> Result<ClusterWitness> {
    build_witness_limited(a, b, n, DEFAULT_MAX_BITS)
}

pub fn build_witness_limited(a: &BigInt, b: &BigInt, n: usize, max_bits: u64) -> Result<ClusterWitness> {
    check_regime(a, b)?;
    if n == 0 {
        return Err(Error::BadInput("witness size must be at least 1".into()));
    }
    if n > 30 {
        return Err(Error::SizeLimit { bits: u64::MAX, limit: max_bits });
    }
    let p = smallest_prime_factor(b);
    let d_exp = valuation(b, &p);
    let f = choose_schedule(a, b, n)?;
    let g: Vec<u32> = f.iter().map(|&e| g_of(e)).collect();

    let estimate = a.bits() * g.iter().map(|&x| x as u64).sum::<u64>() + b.bits() * g[n] as u64;
    if estimate > max_bits {
        return Err(Error::SizeLimit { bits: estimate, limit: max_bits });
    }

    // v_{i+1} ⋯ v_n, built from i = n down to 1.
    let mut u = vec![BigInt::zero(); n];
    let mut v = vec![BigInt::zero(); n];
    let mut tail = BigInt::one();
    for i in (1..=n).rev() {
        let big_a = a.pow(g[i] - 1);
        let big_b = &tail * b.pow(g[i] - 1);
        let common = big_a.gcd(&big_b);
        if !common.is_one() {
            return Err(Error::CoprimalityFailure { step: i, gcd: common.to_string() });
        }
        let (ui, vi) = bezout_variant(&big_a, &big_b, &p)?;
        tail *= &vi;
        u[i - 1] = ui;
        v[i - 1] = vi;
    }

    let mut m = Vec::with_capacity(n + 1);
    m.push(v.iter().product::<BigInt>());
    let mut head = BigInt::one();
    for i in 1..=n {
        m.push(&head * &u[i - 1]);
        head *= &v[i - 1];
    }
    let z = Rational::new(a.clone(), b.clone());
    let values = m
        .iter()
        .zip(&g)
        .map(|(mi, &gi)| Rational::from_integer(mi.clone()) * num_traits::pow(z.clone(), gi as usize) - int(2))
        .collect();

    let witness = ClusterWitness {
        a: a.clone(),
        b: b.clone(),
        p,
        d_exp,
        n,
        f,
        u,
        v,
        m,
        values,
        below_hyperbolic_range: *a <= b * 4,
    };
    witness.validate()?;
    Ok(witness)
}

/// A witness with `bound + 1` values in one unit interval, so no clustering
/// bound `B = bound` holds.
pub fn refute_bc(a: &BigInt, b: &BigInt, bound: usize) -> Result<ClusterWitness> {
    build_witness(a, b, bound)
}

impl ClusterWitness {
    pub fn g(&self, i: usize) -> u32 {
        g_of(self.f[i])
    }

    /// Bit length of the largest integer stored in the witness.
    pub fn max_bits(&self) -> u64 {
        let ints = self.u.iter().chain(&self.v).chain(&self.m).map(BigInt::bits);
        let fracs = self.values.iter().flat_map(|q| [q.numer().bits(), q.denom().bits()]);
        ints.chain(fracs).max().unwrap_or(0)
    }

    /// Re-checks every invariant in exact arithmetic.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidWitness(msg));
        let n = self.n;
        if self.f.len() != n + 1 || self.u.len() != n || self.v.len() != n || self.m.len() != n + 1 || self.values.len() != n + 1 {
            return fail("list lengths do not match n".into());
        }
        if self.f[0] != 0 || self.f.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!("schedule {:?} is not 0, increasing", self.f));
        }
        if self.b <= BigInt::one() || !self.a.gcd(&self.b).is_one() || !(&self.b % &self.p).is_zero() {
            return fail("a, b, p are inconsistent".into());
        }
        if valuation(&self.b, &self.p) != self.d_exp {
            return fail("d_exp is not the valuation of b at p".into());
        }
        let mut product = BigInt::one();
        for k in 1..=n {
            product *= self.a.pow(self.g(k - 1));
            if self.b.pow(self.g(k)) <= &product * 2 {
                return fail(format!("schedule inequality fails at k = {k}"));
            }
        }
        for i in 1..=n {
            let gi = self.g(i);
            let big_a = self.a.pow(gi - 1);
            let tail: BigInt = self.v[i - 1..].iter().product();
            let lhs = &self.u[i - 1] * &big_a - tail * self.b.pow(gi - 1);
            if !lhs.abs().is_one() {
                return fail(format!("Bezout relation fails at i = {i}"));
            }
            let (ui, vi) = (&self.u[i - 1], &self.v[i - 1]);
            if !ui.is_positive() || !vi.is_positive() || *vi >= big_a {
                return fail(format!("u_{i}, v_{i} out of range"));
            }
            if !vi.gcd(&self.a).is_one() || !vi.gcd(&self.p).is_one() || !ui.gcd(&self.b).is_one() {
                return fail(format!("coprimality of u_{i}, v_{i} fails"));
            }
        }
        let mut head = BigInt::one();
        for i in 1..=n {
            if self.m[i] != &head * &self.u[i - 1] {
                return fail(format!("m_{i} is not v_1⋯v_(i-1) u_{i}"));
            }
            head *= &self.v[i - 1];
        }
        if self.m[0] != head {
            return fail("m_0 is not v_1⋯v_n".into());
        }
        if !self.values_in_generated_set() {
            return fail("values do not match m_i (a/b)^(2^f(i)) - 2".into());
        }
        let half = Rational::new(1.into(), 2.into());
        for i in 1..=n {
            if (&self.values[i] - &self.values[0]).abs() >= half {
                return fail(format!("value {i} is not within 1/2 of value 0"));
            }
        }
        for (i, q) in self.values.iter().enumerate() {
            let expected = self.d_exp * self.g(i) as u64;
            if valuation(q.denom(), &self.p) != expected {
                return fail(format!("denominator of value {i} has the wrong {}-adic valuation", self.p));
            }
        }
        let (lo, hi) = self.span();
        if &hi - &lo > int(1) {
            return fail("values do not fit in a unit interval".into());
        }
        Ok(())
    }

    pub fn span(&self) -> (Rational, Rational) {
        let lo = self.values.iter().min().cloned().unwrap_or_else(Rational::zero);
        let hi = self.values.iter().max().cloned().unwrap_or_else(Rational::zero);
        (lo, hi)
    }

    /// Each value equals `m_i (a/b)^(2^f(i)) - 2` with `m_i > 0`.
    pub fn values_in_generated_set(&self) -> bool {
        if self.m.len() != self.values.len() || self.f.len() != self.values.len() {
            return false;
        }
        let z = Rational::new(self.a.clone(), self.b.clone());
        self.m.iter().zip(&self.values).enumerate().all(|(i, (mi, val))| {
            mi.is_positive()
                && Rational::from_integer(mi.clone()) * num_traits::pow(z.clone(), self.g(i) as usize) - int(2) == *val
        })
    }

    /// Reproduces each value with the rule engine: `f(i)` collapses of
    /// `Y(x, 0, 0)` with `tr x = a/b - 2`, then `NU_N(m_i)`.
    pub fn replay_with_rules(&self) -> Result<bool> {
        let two = TraceValue::two();
        let mut x = TraceValue::Rational(Rational::new(self.a.clone(), self.b.clone()) - int(2));
        let mut level = 0u32;
        for (i, val) in self.values.iter().enumerate() {
            while level < self.f[i] {
                x = rule_collapse(&x, &two)?.tx;
                level += 1;
            }
            let nu = rule_nu_n_big(&x, &two, &self.m[i])?.tx;
            if nu != TraceValue::Rational(val.clone()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_doc(&self) -> WitnessDoc {
        let strs = |xs: &[BigInt]| xs.iter().map(ToString::to_string).collect();
        WitnessDoc {
            a: self.a.to_string(),
            b: self.b.to_string(),
            p: self.p.to_string(),
            d_exp: self.d_exp.to_string(),
            n: self.n.to_string(),
            f: self.f.iter().map(ToString::to_string).collect(),
            u: strs(&self.u),
            v: strs(&self.v),
            m: strs(&self.m),
            values: self.values.iter().map(format_rational).collect(),
            below_hyperbolic_range: self.below_hyperbolic_range,
            max_bits: self.max_bits().to_string(),
        }
    }

    pub fn from_doc(doc: &WitnessDoc) -> Result<Self> {
        let int_of = |s: &str| s.parse::<BigInt>().map_err(|e| Error::Parse(format!("{s}: {e}")));
        let ints = |xs: &[String]| xs.iter().map(|s| int_of(s)).collect::<Result<Vec<_>>>();
        let small = |s: &str| s.parse::<u64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
        Ok(ClusterWitness {
            a: int_of(&doc.a)?,
            b: int_of(&doc.b)?,
            p: int_of(&doc.p)?,
            d_exp: small(&doc.d_exp)?,
            n: small(&doc.n)? as usize,
            f: doc.f.iter().map(|s| small(s).map(|x| x as u32)).collect::<Result<_>>()?,
            u: ints(&doc.u)?,
            v: ints(&doc.v)?,
            m: ints(&doc.m)?,
            values: doc.values.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?,
            below_hyperbolic_range: doc.below_hyperbolic_range,
        })
    }
}

/// Serialized witness: integers as decimal strings, rationals as `p/q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub a: String,
    pub b: String,
    pub p: String,
    pub d_exp: String,
    pub n: String,
    pub f: Vec<String>,
    pub u: Vec<String>,
    pub v: Vec<String>,
    pub m: Vec<String>,
    pub values: Vec<String>,
    pub below_hyperbolic_range: bool,
    pub max_bits: String,
}
