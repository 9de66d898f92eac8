//! Clustering and growth statistics of trace samples, divisor sums, and the
//! `S_n` families for rational `z = a/b`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{pow, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hpfloat::HpFloat;
use crate::number::{int, Poly, Rational, TraceValue};
use crate::rules::{rule_double_y, rule_lambda_mu};

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub range_min: BigInt,
    pub range_max: BigInt,
    /// `bins[n] = #{a : n ≤ a < n + 1}` for every `n` in the window.
    pub bins: BTreeMap<BigInt, u64>,
    /// `cumulative[n] = #{a : a ≤ n}`, counting the whole sample.
    pub cumulative: BTreeMap<BigInt, u64>,
    pub bc_bound_estimate: u64,
    /// Smallest difference between consecutive sample values. Over a finite
    /// sample this only bounds the true gap from above.
    pub gap_estimate: Option<TraceValue>,
    pub linear_fit: LinearFit,
    pub sample_size: usize,
}

/// `count(n) ≤ d + n c` on the window, with `d = count(2)` and `c ≥ 0` minimal.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub c: Rational,
    pub d: Rational,
}

/// Widest window [`cluster_report_window`] will bin.
pub const MAX_WINDOW: u64 = 10_000_000;

fn floor_of(t: &TraceValue) -> Result<BigInt> {
    match t {
        TraceValue::Rational(q) => Ok(q.floor().to_integer()),
        TraceValue::Symbolic(_) => Err(Error::SymbolicInput),
        TraceValue::Float(x) => {
            let guess = x.to_f64().floor();
            if !guess.is_finite() {
                return Err(Error::BadInput(format!("trace {x} is not finite")));
            }
            let mut n = BigInt::from(guess as i128);
            let bits = x.bits();
            let at = |n: &BigInt| HpFloat::from_rational(&Rational::from_integer(n.clone()), bits);
            while at(&n) > *x {
                n -= 1;
            }
            while at(&(&n + 1)) <= *x {
                n += 1;
            }
            Ok(n)
        }
    }
}

fn is_exact_integer(t: &TraceValue, n: &BigInt) -> bool {
    t.cmp_rational(&Rational::from_integer(n.clone())) == Some(std::cmp::Ordering::Equal)
}

fn less(a: &TraceValue, b: &TraceValue) -> Result<bool> {
    match (a, b) {
        (TraceValue::Rational(x), TraceValue::Rational(y)) => Ok(x < y),
        (TraceValue::Symbolic(_), _) | (_, TraceValue::Symbolic(_)) => Err(Error::SymbolicInput),
        _ => Ok(b.sub(a)?.cmp_rational(&Rational::zero()) == Some(std::cmp::Ordering::Greater)),
    }
}

/// Bins a sorted, duplicate-free trace sample over `[0, range_max + 1)`.
pub fn cluster_report(traces: &[TraceValue], range_max: u64) -> Result<GrowthReport> {
    cluster_report_window(traces, &BigInt::zero(), &BigInt::from(range_max))
}

/// Bins a sorted, duplicate-free trace sample over `[lo, hi + 1)`.
pub fn cluster_report_window(traces: &[TraceValue], lo: &BigInt, hi: &BigInt) -> Result<GrowthReport> {
    if hi < lo || hi - lo >= BigInt::from(MAX_WINDOW) {
        return Err(Error::BadInput(format!("window [{lo}, {hi}] is empty or wider than {MAX_WINDOW}")));
    }
    let floors: Vec<BigInt> = traces.iter().map(floor_of).collect::<Result<_>>()?;
    for w in traces.windows(2) {
        if !less(&w[0], &w[1])? {
            return Err(Error::BadInput("traces must be sorted and duplicate-free".into()));
        }
    }

    let width = (hi - lo).to_u64().expect("window checked") + 1;
    let keys: Vec<BigInt> = (0..width).map(|i| lo + i).collect();
    let mut bins: BTreeMap<BigInt, u64> = keys.iter().map(|n| (n.clone(), 0)).collect();
    for f in &floors {
        if let Some(c) = bins.get_mut(f) {
            *c += 1;
        }
    }
    // a ≤ n  ⟺  floor(a) < n, or a = n exactly.
    let count_upto = |n: &BigInt| -> u64 {
        let strict = floors.partition_point(|f| f < n);
        let exact = traces[strict..]
            .iter()
            .zip(&floors[strict..])
            .take_while(|(_, f)| *f == n)
            .filter(|(t, _)| is_exact_integer(t, n))
            .count();
        (strict + exact) as u64
    };
    let mut cumulative = BTreeMap::new();
    let mut running = floors.partition_point(|f| f < lo) as u64;
    for n in &keys {
        let exact = count_upto(n) - running;
        cumulative.insert(n.clone(), running + exact);
        running += bins[n];
    }

    let mut gap: Option<TraceValue> = None;
    for w in traces.windows(2) {
        let diff = w[1].sub(&w[0])?;
        let smaller = match &gap {
            None => true,
            Some(g) => less(&diff, g)?,
        };
        if smaller {
            gap = Some(diff);
        }
    }

    let two = BigInt::from(2);
    let d = Rational::from_integer(count_upto(&two).into());
    let mut c = Rational::zero();
    for (n, &count) in cumulative.range(&two + 1..) {
        let need = (Rational::from_integer(count.into()) - &d) / Rational::from_integer(n.clone());
        if need > c {
            c = need;
        }
    }
    Ok(GrowthReport {
        range_min: lo.clone(),
        range_max: hi.clone(),
        bc_bound_estimate: bins.values().copied().max().unwrap_or(0),
        bins,
        cumulative,
        gap_estimate: gap,
        linear_fit: LinearFit { c, d },
        sample_size: traces.len(),
    })
}

/// Number of positive divisors, by trial division up to `√i`.
pub fn sigma0(i: u64) -> u64 {
    assert!(i >= 1, "sigma0 is defined for positive integers");
    let mut count = 0;
    let mut j = 1;
    while j * j <= i {
        if i % j == 0 {
            count += if j * j == i { 1 } else { 2 };
        }
        j += 1;
    }
    count
}

/// `Σ_{i ≤ N} σ₀(i)` via `2 Σ_{j ≤ √N} ⌊N/j⌋ - ⌊√N⌋²`.
pub fn sigma0_sum(n: u64) -> u64 {
    let r = n.sqrt();
    2 * (1..=r).map(|j| n / j).sum::<u64>() - r * r
}

/// `Σ_{j ≤ N} ⌊N/j⌋`, term by term.
pub fn divisor_floor_sum(n: u64) -> u64 {
    (1..=n).map(|j| n / j).sum()
}

/// `(N ln N - N, N ln N + N)`.
pub fn sigma0_sum_bounds(n: u64, bits: usize) -> (HpFloat, HpFloat) {
    assert!(n >= 1);
    let nf = HpFloat::from_u64(n, bits);
    let nlogn = nf.mul(&nf.ln());
    (nlogn.sub(&nf), nlogn.add(&nf))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrrationalCount {
    pub n: u64,
    /// Pairs `k ≥ m ≥ 1` with `mk ≤ N`.
    pub pairs: u64,
    /// Distinct polynomials `mkz² - 2(k-m)z - 2` among those pairs.
    pub distinct: u64,
    /// `Σ_{i ≤ N} ⌈σ₀(i)/2⌉`.
    pub ceil_half_sum: u64,
    pub sigma0_sum: u64,
}

impl IrrationalCount {
    pub fn count(&self) -> u64 {
        self.distinct
    }

    /// Every pair gives its own polynomial, the pair count matches the divisor
    /// formula, and it reaches half the divisor sum.
    pub fn holds(&self) -> bool {
        self.distinct == self.pairs
            && self.pairs == self.ceil_half_sum
            && 2 * self.distinct >= self.sigma0_sum
    }
}

/// The polynomial `mkz² - 2(k-m)z - 2`, obtained by applying `LAMBDA_MU(k, m)`
/// and then `DOUBLE_Y` to `Y(x, 0, 0)` with `tr x = z - 2`.
pub fn family_polynomial(m: u64, k: u64) -> Poly {
    let lm = rule_lambda_mu(&TraceValue::z_minus_two(), k, m).expect("positive parameters");
    match rule_double_y(&lm.tx, &lm.ty).expect("symbolic traces").tx {
        TraceValue::Symbolic(p) => p,
        other => unreachable!("symbolic input produced {other}"),
    }
}

pub fn irrational_family_count(n: u64) -> IrrationalCount {
    assert!(n >= 1);
    let mut polys = BTreeSet::new();
    let mut pairs = 0;
    for m in 1..=n {
        if m * m > n {
            break;
        }
        for k in m..=n / m {
            pairs += 1;
            polys.insert(family_polynomial(m, k));
        }
    }
    IrrationalCount {
        n,
        pairs,
        distinct: polys.len() as u64,
        ceil_half_sum: (1..=n).map(|i| sigma0(i).div_ceil(2)).sum(),
        sigma0_sum: sigma0_sum(n),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SnElement {
    pub value: Rational,
    pub m: u64,
    pub k: u64,
    /// `value = (a/b²)^(2ⁿ) j - 2`.
    pub j: BigInt,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnFamily {
    pub a: BigInt,
    pub b: BigInt,
    pub n: u32,
    pub cap: Rational,
    /// All `(m, k)` with value in `(0, cap]`, sorted by value, then `m`, then `k`.
    pub elements: Vec<SnElement>,
}

impl SnFamily {
    pub fn distinct_values(&self) -> BTreeSet<Rational> {
        self.elements.iter().map(|e| e.value.clone()).collect()
    }

    /// Re-checks every element against the `B_n` form with its recorded `j`.
    pub fn verify(&self) -> bool {
        let g = 1u32 << self.n;
        let scale = Rational::new(self.a.pow(g), self.b.pow(2 * g));
        let w = Rational::new(self.a.pow(g), self.b.pow(g));
        self.elements.iter().all(|e| {
            let (m, k) = (Rational::from_integer(e.m.into()), Rational::from_integer(e.k.into()));
            let direct = &m * &k * &w * &w - int(2) * (&k - &m) * &w - int(2);
            e.j.is_positive()
                && direct == e.value
                && &scale * Rational::from_integer(e.j.clone()) - int(2) == e.value
        })
    }
}

fn check_ab(a: &BigInt, b: &BigInt) -> Result<()> {
    if *b <= BigInt::one() || a <= b || !a.gcd(b).is_one() {
        return Err(Error::BadInput(format!("need coprime a > b > 1, got a = {a}, b = {b}")));
    }
    Ok(())
}

fn check_counterexample_regime(a: &BigInt, b: &BigInt) -> Result<()> {
    check_ab(a, b)?;
    if *a <= b * b {
        return Err(Error::RegimeViolation(format!("a = {a} does not exceed b² = {}", b * b)));
    }
    Ok(())
}

/// `S_n ∩ (0, cap]` for `z = a/b`, each element with its `B_n` witness `j`.
pub fn sn_family(a: &BigInt, b: &BigInt, n: u32, cap: &Rational) -> Result<SnFamily> {
    check_ab(a, b)?;
    if n > 20 {
        return Err(Error::BadInput(format!("level {n} is out of range")));
    }
    let g = 1u32 << n;
    let (ag, bg) = (a.pow(g), b.pow(g));
    let w = Rational::new(ag.clone(), bg.clone());
    let w2 = &w * &w;
    let two = int(2);
    let value = |m: u64, k: u64| -> Rational {
        let (mq, kq) = (Rational::from_integer(m.into()), Rational::from_integer(k.into()));
        &mq * &kq * &w2 - &two * (&kq - &mq) * &w - &two
    };
    let mut elements = Vec::new();
    let mut push = |m: u64, k: u64, v: Rational| {
        let j = BigInt::from(m) * BigInt::from(k) * &ag - BigInt::from(2) * (BigInt::from(k) - BigInt::from(m)) * &bg;
        elements.push(SnElement { value: v, m, k, j });
    };
    for m in 1u64.. {
        let slope = Rational::from_integer(m.into()) * &w2 - &two * &w;
        if slope.is_positive() {
            // Values grow with k, and the k = 1 value grows with m.
            if value(m, 1) > *cap {
                break;
            }
            for k in 1u64.. {
                let v = value(m, k);
                if v > *cap {
                    break;
                }
                if v.is_positive() {
                    push(m, k, v);
                }
            }
        } else {
            // m w < 2 can only happen for m = 1 and w < 2; values fall with k.
            for k in 1u64.. {
                let v = value(m, k);
                if !v.is_positive() {
                    break;
                }
                if v <= *cap {
                    push(m, k, v);
                }
            }
        }
    }
    elements.sort();
    Ok(SnFamily {
        a: a.clone(),
        b: b.clone(),
        n,
        cap: cap.clone(),
        elements,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnionBound {
    pub levels: u32,
    pub cap: u64,
    /// `#(∪_{n ≤ K} S_n ∩ (0, N])`, exact.
    pub actual: u64,
    /// Pairs `(n, m, k)` enumerated, counting values hit more than once.
    pub entries: u64,
    /// `(N + 2) Σ_{n ≤ K} (b²/a)^(2ⁿ)`.
    pub bound: Rational,
}

impl UnionBound {
    pub fn holds(&self) -> bool {
        Rational::from_integer(self.actual.into()) <= self.bound
    }
}

fn sn_levels(a: &BigInt, b: &BigInt, levels: u32, cap: u64) -> Result<Vec<SnFamily>> {
    let capq = Rational::from_integer(cap.into());
    (0..=levels)
        .into_par_iter()
        .map(|n| sn_family(a, b, n, &capq))
        .collect()
}

pub fn union_sn_count_bound(a: &BigInt, b: &BigInt, levels: u32, cap: u64) -> Result<UnionBound> {
    check_counterexample_regime(a, b)?;
    if cap == 0 {
        return Err(Error::BadInput("value cap must be positive".into()));
    }
    let families = sn_levels(a, b, levels, cap)?;
    let mut values = BTreeSet::new();
    let mut entries = 0;
    for f in &families {
        entries += f.elements.len() as u64;
        values.extend(f.elements.iter().map(|e| e.value.clone()));
    }
    let ratio = Rational::new(b * b, a.clone());
    let series: Rational = (0..=levels).map(|n| pow(ratio.clone(), 1usize << n)).sum();
    Ok(UnionBound {
        levels,
        cap,
        actual: values.len() as u64,
        entries,
        bound: Rational::from_integer((cap + 2).into()) * series,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub value: Rational,
    /// `(n, m, k)` for the first pair reaching the value, in enumeration order.
    pub first: (u32, u64, u64),
    pub second: (u32, u64, u64),
}

/// Distinct index triples `(n, m, k)`, `n ≤ levels`, whose `S_n` values agree
/// and lie in `(0, cap]`.
pub fn sn_collisions(a: &BigInt, b: &BigInt, levels: u32, cap: u64) -> Result<Vec<Collision>> {
    check_ab(a, b)?;
    let families = sn_levels(a, b, levels, cap)?;
    let mut first_seen: BTreeMap<Rational, (u32, u64, u64)> = BTreeMap::new();
    let mut out = Vec::new();
    for f in &families {
        for e in &f.elements {
            let here = (f.n, e.m, e.k);
            match first_seen.get(&e.value) {
                Some(prev) => out.push(Collision {
                    value: e.value.clone(),
                    first: *prev,
                    second: here,
                }),
                None => {
                    first_seen.insert(e.value.clone(), here);
                }
            }
        }
    }
    Ok(out)
}

/// Largest `b^(2ⁿ)` for which the divisor sum is enumerated.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityReport {
    pub n: u32,
    /// `b^g z^(2g) > b^g b^g`, exact.
    pub exact_step: bool,
    /// `b^(2g) > ½ b^g (ln b^g + 1)`, in the log domain.
    pub analytic_step: bool,
    /// `½ b^g (ln b^g + 1) ≥ ½ Σ_{i ≤ b^g} σ₀(i)`; `None` above [`ENUMERATION_LIMIT`].
    pub enumerated_step: Option<bool>,
}

impl InequalityReport {
    pub fn holds(&self) -> bool {
        self.exact_step && self.analytic_step && self.enumerated_step.unwrap_or(true)
    }
}

/// Checks the chain `b^g z^(2g) > b^(2g) > ½ b^g (ln b^g + 1) ≥ ½ Σσ₀` with `g = 2ⁿ`.
pub fn counterexample_inequality(a: &BigInt, b: &BigInt, n: u32, bits: usize) -> Result<InequalityReport> {
    check_counterexample_regime(a, b)?;
    if n > 24 {
        return Err(Error::BadInput(format!("level {n} is out of range")));
    }
    let g = 1u32 << n;
    let bg = b.pow(g);
    let lhs = Rational::from_integer(bg.clone()) * pow(Rational::new(a.clone(), b.clone()), 2 * g as usize);
    let exact_step = lhs > Rational::from_integer(&bg * &bg);

    let one = HpFloat::from_u64(1, bits);
    let two = HpFloat::from_u64(2, bits);
    let log_bg = HpFloat::from_u64(g as u64, bits).mul(&HpFloat::from_rational(&Rational::from_integer(b.clone()), bits).ln());
    let analytic_rhs = log_bg.add(&log_bg.add(&one).div(&two).ln());
    let analytic_step = log_bg.mul(&two) > analytic_rhs;

    let enumerated_step = bg.to_u64().filter(|v| *v <= ENUMERATION_LIMIT).map(|nn| {
        let (_, upper) = sigma0_sum_bounds(nn, bits);
        upper >= HpFloat::from_u64(sigma0_sum(nn), bits)
    });
    Ok(InequalityReport {
        n,
        exact_step,
        analytic_step,
        enumerated_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::rat;
    use proptest::prelude::*;

    fn tv(q: Rational) -> TraceValue {
        TraceValue::Rational(q)
    }

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn report_on_consecutive_integers() {
        let traces: Vec<_> = (2..=5).map(|n| tv(int(n))).collect();
        let r = cluster_report(&traces, 6).unwrap();
        assert!(r.bins.values().all(|&c| c <= 1));
        assert_eq!(r.gap_estimate, Some(TraceValue::int(1)));
        assert_eq!(r.bc_bound_estimate, 1);
        assert_eq!(r.cumulative[&BigInt::from(5)], 4);
        assert_eq!(r.cumulative[&BigInt::from(1)], 0);
        assert_eq!(r.linear_fit.d, int(1));
        assert_eq!(r.linear_fit.c, rat(3, 5));
    }

    #[test]
    fn report_with_half_steps() {
        let traces = vec![tv(int(2)), tv(rat(5, 2)), tv(int(3))];
        let r = cluster_report(&traces, 4).unwrap();
        assert_eq!(r.bins[&BigInt::from(2)], 2);
        assert_eq!(r.gap_estimate, Some(tv(rat(1, 2))));
    }

    #[test]
    fn report_empty_and_float() {
        let r = cluster_report(&[], 3).unwrap();
        assert_eq!(r.bc_bound_estimate, 0);
        assert!(r.cumulative.values().all(|&c| c == 0));
        assert_eq!(r.gap_estimate, None);
        let f = |x: f64| TraceValue::Float(HpFloat::from_f64(x, 128));
        let r = cluster_report(&[f(2.25), f(2.75), f(4.0)], 5).unwrap();
        assert_eq!(r.bins[&BigInt::from(2)], 2);
        assert_eq!(r.cumulative[&BigInt::from(4)], 3);
    }

    #[test]
    fn window_far_from_origin() {
        let base = BigInt::from(10u32).pow(40);
        let q = |num: i64, den: i64| tv(Rational::from_integer(base.clone()) + rat(num, den));
        let traces = vec![tv(int(3)), q(1, 3), q(1, 2), q(7, 4)];
        let r = cluster_report_window(&traces, &base, &(&base + 1)).unwrap();
        assert_eq!(r.bins[&base], 2);
        assert_eq!(r.bins[&(&base + 1)], 1);
        assert_eq!(r.cumulative[&base], 1);
        assert_eq!(r.cumulative[&(&base + 1)], 3);
        assert_eq!(r.bc_bound_estimate, 2);
        assert!(cluster_report_window(&traces, &BigInt::zero(), &base).is_err());
    }

    #[test]
    fn report_rejects_bad_input() {
        assert_eq!(
            cluster_report(&[TraceValue::z_minus_two()], 3),
            Err(Error::SymbolicInput)
        );
        assert!(cluster_report(&[tv(int(3)), tv(int(2))], 3).is_err());
        assert!(cluster_report(&[tv(int(3)), tv(int(3))], 3).is_err());
    }

    #[test]
    fn engine_sample_has_small_clusters() {
        let seed = crate::ypiece::YPieceSpec::cusped(TraceValue::int(3), TraceValue::int(2)).unwrap();
        let set = crate::rules::generate_trace_set(&seed, &int(50), 4).unwrap();
        let traces: Vec<_> = set.values().into_iter().map(tv).collect();
        let r = cluster_report(&traces, 50).unwrap();
        assert_eq!(r.bc_bound_estimate, 1);
        assert!(r.gap_estimate.unwrap().cmp_rational(&int(1)) != Some(std::cmp::Ordering::Less));
    }

    #[test]
    fn sigma0_values() {
        assert_eq!(sigma0(1), 1);
        assert_eq!(sigma0(12), 6);
        assert_eq!(sigma0(36), 9);
        assert_eq!(sigma0_sum(1), 1);
        assert_eq!(sigma0_sum(4), 8);
        assert_eq!(divisor_floor_sum(4), 8);
        assert_eq!(sigma0_sum(100), 482);
    }

    #[test]
    fn divisor_identity_up_to_2000() {
        let mut prefix = 0;
        for n in 1..=2000u64 {
            prefix += sigma0(n);
            assert_eq!(sigma0_sum(n), prefix);
            assert_eq!(divisor_floor_sum(n), prefix);
        }
    }

    #[test]
    fn sigma0_bounds_examples() {
        let (lo, hi) = sigma0_sum_bounds(100, 128);
        assert!((lo.to_f64() - 360.517_018_598_809_1).abs() < 1e-9);
        assert!((hi.to_f64() - 560.517_018_598_809_1).abs() < 1e-9);
        let (lo, hi) = sigma0_sum_bounds(1, 128);
        assert_eq!((lo.to_f64(), hi.to_f64()), (-1.0, 1.0));
        let (lo, hi) = sigma0_sum_bounds(1000, 128);
        let s = HpFloat::from_u64(sigma0_sum(1000), 128);
        assert!(lo <= s && s <= hi);
    }

    #[test]
    fn irrational_counts() {
        assert_eq!(irrational_family_count(1).count(), 1);
        let c4 = irrational_family_count(4);
        assert_eq!(c4.count(), 5);
        assert!(c4.holds());
        let c100 = irrational_family_count(100);
        assert!(c100.holds());
        assert!(c100.count() >= 241);
    }

    #[test]
    fn family_polynomial_shape() {
        assert_eq!(family_polynomial(2, 3), Poly::from_i64(&[-2, -2, 6]));
        assert_eq!(family_polynomial(1, 1), Poly::from_i64(&[-2, 0, 1]));
    }

    #[test]
    fn sn_examples() {
        let f = sn_family(&big(5), &big(2), 0, &int(5)).unwrap();
        let e = f.elements.iter().find(|e| (e.m, e.k) == (1, 1)).unwrap();
        assert_eq!(e.value, rat(17, 4));
        assert_eq!(e.j, big(5));
        assert!(f.verify());

        let f = sn_family(&big(3), &big(2), 0, &int(10)).unwrap();
        assert!(f.elements.iter().all(|e| (e.m, e.k) != (1, 2)));
        let e = f.elements.iter().find(|e| (e.m, e.k) == (2, 2)).unwrap();
        assert_eq!(e.value, int(7));
        assert!(f.verify());

        let f = sn_family(&big(5), &big(2), 1, &int(1)).unwrap();
        assert!(f.elements.is_empty());
    }

    #[test]
    fn sn_family_with_slowly_growing_first_row() {
        // w = 3/2 gives w² - 2w < 0, so the m = 1 row decreases in k.
        let f = sn_family(&big(3), &big(2), 0, &int(100)).unwrap();
        assert!(f.verify());
        assert!(f.elements.iter().all(|e| e.value.is_positive() && e.value <= int(100)));
        assert!(f.elements.iter().any(|e| e.m == 1));
    }

    #[test]
    fn sn_rejects_bad_pairs() {
        assert!(sn_family(&big(4), &big(2), 0, &int(10)).is_err());
        assert!(sn_family(&big(5), &big(1), 0, &int(10)).is_err());
    }

    #[test]
    fn union_bound_matches_oracle_counts() {
        // Counts from an independent enumeration in exact fractions.
        let u = union_sn_count_bound(&big(5), &big(2), 3, 1000).unwrap();
        assert_eq!(u.actual, 858);
        assert!(u.holds());
        let u0 = union_sn_count_bound(&big(5), &big(2), 0, 1000).unwrap();
        assert_eq!(u0.actual, 797);
        assert_eq!(u0.bound, rat(1002 * 4, 5));
        assert!(u0.holds());
        assert_eq!(union_sn_count_bound(&big(5), &big(2), 3, 100).unwrap().actual, 81);
    }

    #[test]
    fn union_bound_regime_gate() {
        assert!(matches!(
            union_sn_count_bound(&big(3), &big(2), 1, 10),
            Err(Error::RegimeViolation(_))
        ));
    }

    #[test]
    fn collisions_exist_for_five_halves() {
        let c = sn_collisions(&big(5), &big(2), 3, 1000).unwrap();
        assert!(c.iter().any(|c| c.value == rat(31, 2)
            && [c.first, c.second].contains(&(0, 1, 10))
            && [c.first, c.second].contains(&(0, 2, 1))));
        let u = union_sn_count_bound(&big(5), &big(2), 3, 1000).unwrap();
        assert_eq!(u.entries - u.actual, c.len() as u64);
    }

    #[test]
    fn inequality_examples() {
        for n in 0..=5 {
            let r = counterexample_inequality(&big(5), &big(2), n, 128).unwrap();
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.enumerated_step.is_some(), n <= 4);
        }
        assert!(matches!(
            counterexample_inequality(&big(3), &big(2), 0, 128),
            Err(Error::RegimeViolation(_))
        ));
    }

    proptest! {
        #[test]
        fn cumulative_matches_bins(nums in proptest::collection::btree_set(0i64..400, 0..40), range in 0u64..60) {
            let traces: Vec<_> = nums.iter().map(|&n| tv(rat(n, 4))).collect();
            let r = cluster_report(&traces, range).unwrap();
            let mut below = 0;
            for n in 0..=range {
                let key = BigInt::from(n);
                let exact = nums.iter().filter(|&&v| v == 4 * n as i64).count() as u64;
                prop_assert_eq!(r.cumulative[&key], below + exact);
                below += r.bins[&key];
            }
            prop_assert!(r.cumulative.values().zip(r.cumulative.values().skip(1)).all(|(a, b)| a <= b));
            if let Some(g) = &r.gap_estimate {
                prop_assert_eq!(g.cmp_rational(&Rational::zero()), Some(std::cmp::Ordering::Greater));
            }
            for (n, &count) in &r.cumulative {
                let line = &r.linear_fit.d + &r.linear_fit.c * Rational::from_integer(n.clone());
                prop_assert!(Rational::from_integer(count.into()) <= line || *n < BigInt::from(2));
            }
        }

        #[test]
        fn union_bound_holds(a in 5i64..40, b in 2i64..6, levels in 0u32..3, cap in 1u64..300) {
            let (a, b) = (big(a), big(b));
            prop_assume!(a > &b * &b && a.gcd(&b).is_one());
            let u = union_sn_count_bound(&a, &b, levels, cap).unwrap();
            prop_assert!(u.holds());
        }
    }
}
