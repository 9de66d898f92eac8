//! Trace-generation rules for Y-pieces with a cusp, their bounded closure,
//! and the hexagon computation behind the first rule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hpfloat::HpFloat;
use crate::number::{int, Rational, TraceValue};
use crate::ypiece::YPieceSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    NuN,
    LambdaMu,
    DoubleY,
    Collapse,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::NuN => "NU_N",
            Rule::LambdaMu => "LAMBDA_MU",
            Rule::DoubleY => "DOUBLE_Y",
            Rule::Collapse => "COLLAPSE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleParams {
    None,
    N(u64),
    KM { k: u64, m: u64 },
}

/// One rule applied to a Y-piece `Y(x, y, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRuleApplication {
    pub rule: Rule,
    pub params: RuleParams,
    pub input_traces: (TraceValue, TraceValue),
    pub output: YPieceSpec,
}

fn numeric_below_two(t: &TraceValue) -> bool {
    matches!(t.cmp_rational(&int(2)), Some(std::cmp::Ordering::Less))
}

fn require_admissible(t: &TraceValue) -> Result<()> {
    if numeric_below_two(t) {
        return Err(Error::InadmissibleYPiece(format!("boundary trace {t} below 2")));
    }
    Ok(())
}

/// `Y(x, y, 0)` contains `Y(ν_n, y, 0)` with `tr ν_n = n(tx + ty) - ty`.
///
/// `tx` may be an elliptic trace in `[0, 2)`.
pub fn rule_nu_n(tx: &TraceValue, ty: &TraceValue, n: u64) -> Result<YPieceSpec> {
    rule_nu_n_big(tx, ty, &BigInt::from(n))
}

pub fn rule_nu_n_big(tx: &TraceValue, ty: &TraceValue, n: &BigInt) -> Result<YPieceSpec> {
    if !n.is_positive() {
        return Err(Error::ZeroParameter);
    }
    require_admissible(ty)?;
    let elliptic = numeric_below_two(tx);
    let nu = tx.add(ty)?.scale_big(n).sub(ty)?;
    YPieceSpec::new(nu, ty.clone(), TraceValue::two(), elliptic && n.is_one())
}

/// `Y(x, 0, 0)` contains `Y(λ_k, μ_m, 0)` with `tr λ_k = k(tx + 2) + 2`, `tr μ_m = m(tx + 2) - 2`.
pub fn rule_lambda_mu(tx: &TraceValue, k: u64, m: u64) -> Result<YPieceSpec> {
    if k == 0 || m == 0 {
        return Err(Error::ZeroParameter);
    }
    require_admissible(tx)?;
    let z = tx.add_int(2);
    YPieceSpec::cusped(z.scale(k).add_int(2), z.scale(m).add_int(-2))
}

/// `Y(x, y, 0)` contains `Y(ν, 2y, 0)` with `tr ν = 2 + tx·ty`; the doubled
/// boundary has trace `ty² - 2`.
pub fn rule_double_y(tx: &TraceValue, ty: &TraceValue) -> Result<YPieceSpec> {
    require_admissible(tx)?;
    require_admissible(ty)?;
    let nu = tx.mul(ty)?.add_int(2);
    let doubled = ty.mul(ty)?.add_int(-2);
    YPieceSpec::cusped(nu, doubled)
}

/// `Y(x, y, 0)` contains `Y(ν, 0, 0)` with `tr ν = (tx + ty)² - 2`.
pub fn rule_collapse(tx: &TraceValue, ty: &TraceValue) -> Result<YPieceSpec> {
    require_admissible(tx)?;
    require_admissible(ty)?;
    let s = tx.add(ty)?;
    YPieceSpec::cusped(s.mul(&s)?.add_int(-2), TraceValue::two())
}

/// Dispatches a rule on `Y(tx, ty, 0)`.
pub fn apply_rule(
    rule: Rule,
    params: &RuleParams,
    tx: &TraceValue,
    ty: &TraceValue,
) -> Result<TraceRuleApplication> {
    let output = match (rule, params) {
        (Rule::NuN, RuleParams::N(n)) => rule_nu_n(tx, ty, *n)?,
        (Rule::LambdaMu, RuleParams::KM { k, m }) => {
            if *ty != TraceValue::two() {
                return Err(Error::InadmissibleYPiece(
                    "LAMBDA_MU applies to Y(x, 0, 0) only".into(),
                ));
            }
            rule_lambda_mu(tx, *k, *m)?
        }
        (Rule::DoubleY, RuleParams::None) => rule_double_y(tx, ty)?,
        (Rule::Collapse, RuleParams::None) => rule_collapse(tx, ty)?,
        _ => return Err(Error::BadInput(format!("parameters {params:?} do not fit {rule:?}"))),
    };
    Ok(TraceRuleApplication {
        rule,
        params: params.clone(),
        input_traces: (tx.clone(), ty.clone()),
        output,
    })
}

/// A rule step in a provenance chain. `swapped` means the rule saw `Y(y, x, 0)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleStep {
    pub rule: Rule,
    pub params: RuleParams,
    pub swapped: bool,
}

impl fmt::Display for RuleStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule.name())?;
        match &self.params {
            RuleParams::None => {}
            RuleParams::N(n) => write!(f, "[n={n}]")?,
            RuleParams::KM { k, m } => write!(f, "[k={k};m={m}]")?,
        }
        if self.swapped {
            write!(f, "@yx")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Boundary {
    X,
    Y,
}

/// A trace in the closure with the first chain (in exploration order) reaching it.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedTrace {
    pub value: Rational,
    pub chain: Vec<RuleStep>,
    pub boundary: Boundary,
}

impl GeneratedTrace {
    pub fn chain_string(&self) -> String {
        let b = match self.boundary {
            Boundary::X => "x",
            Boundary::Y => "y",
        };
        if self.chain.is_empty() {
            return format!("seed#{b}");
        }
        let steps: Vec<String> = self.chain.iter().map(ToString::to_string).collect();
        format!("{}#{b}", steps.join(">"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceSet {
    /// Sorted by value, duplicate-free.
    pub traces: Vec<GeneratedTrace>,
    /// True when one more round of rule applications would add a trace below the cap.
    pub truncated: bool,
}

impl TraceSet {
    pub fn values(&self) -> Vec<Rational> {
        self.traces.iter().map(|t| t.value.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Node {
    tx: Rational,
    ty: Rational,
    elliptic: bool,
}

impl Node {
    fn key(&self) -> Node {
        if self.elliptic || self.tx <= self.ty {
            self.clone()
        } else {
            Node {
                tx: self.ty.clone(),
                ty: self.tx.clone(),
                elliptic: false,
            }
        }
    }

    fn within(&self, cap: &Rational) -> bool {
        self.tx <= *cap && self.ty <= *cap
    }
}

struct Child {
    node: Node,
    step: RuleStep,
}

fn rational_of(t: &TraceValue) -> Rational {
    t.as_rational().cloned().expect("rational inputs yield rational outputs")
}

fn child(spec: YPieceSpec, rule: Rule, params: RuleParams, swapped: bool) -> Child {
    Child {
        node: Node {
            tx: rational_of(&spec.tx),
            ty: rational_of(&spec.ty),
            elliptic: spec.x_elliptic,
        },
        step: RuleStep {
            rule,
            params,
            swapped,
        },
    }
}

/// All rule outputs of `node` that carry at least one boundary trace `≤ cap`.
///
/// Rule outputs never drop below their inputs, so parameters are scanned only
/// while the output can still land under the cap.
fn expand(node: &Node, cap: &Rational) -> Vec<Child> {
    let two = int(2);
    let mut orientations = vec![(node.tx.clone(), node.ty.clone(), false)];
    if !node.elliptic && node.tx != node.ty {
        orientations.push((node.ty.clone(), node.tx.clone(), true));
    }
    let tv = |q: &Rational| TraceValue::Rational(q.clone());
    let mut out = Vec::new();

    for (p, q, swapped) in &orientations {
        for n in 2u64.. {
            let spec = rule_nu_n(&tv(p), &tv(q), n).expect("admissible node");
            if rational_of(&spec.tx) > *cap {
                break;
            }
            out.push(child(spec, Rule::NuN, RuleParams::N(n), *swapped));
        }
    }
    if !node.elliptic {
        for (p, q, swapped) in &orientations {
            if *q != two {
                continue;
            }
            let z = p + &two;
            // Largest k with k z + 2 <= cap; at least one partner so small μ_m are kept.
            let k_cap = ((cap - &two) / &z).floor().to_integer();
            let k_max: u64 = k_cap.try_into().unwrap_or(0).max(1);
            for m in 1u64.. {
                if Rational::from_integer(m.into()) * &z - &two > *cap {
                    break;
                }
                for k in 1..=k_max {
                    let spec = rule_lambda_mu(&tv(p), k, m).expect("admissible node");
                    out.push(child(spec, Rule::LambdaMu, RuleParams::KM { k, m }, *swapped));
                }
            }
        }
        for (p, q, swapped) in &orientations {
            let spec = rule_double_y(&tv(p), &tv(q)).expect("admissible node");
            if rational_of(&spec.tx) <= *cap || rational_of(&spec.ty) <= *cap {
                out.push(child(spec, Rule::DoubleY, RuleParams::None, *swapped));
            }
        }
        let spec = rule_collapse(&tv(&node.tx), &tv(&node.ty)).expect("admissible node");
        if rational_of(&spec.tx) <= *cap {
            out.push(child(spec, Rule::Collapse, RuleParams::None, false));
        }
    }
    out
}

/// Breadth-first closure of the four rules from `seed`, keeping traces in `[2, cap]`.
///
/// At most `rule_budget` rule applications are chained. Output is sorted,
/// deduplicated, and independent of the rayon thread count.
pub fn generate_trace_set(seed: &YPieceSpec, cap: &Rational, rule_budget: usize) -> Result<TraceSet> {
    let two = int(2);
    if *cap < two {
        return Err(Error::BadInput("trace cap must be at least 2".into()));
    }
    if seed.tz != TraceValue::two() {
        return Err(Error::UnsupportedThirdBoundary(seed.tz.to_string()));
    }
    let exact = |t: &TraceValue| match t {
        TraceValue::Rational(q) => Ok(q.clone()),
        TraceValue::Symbolic(_) => Err(Error::SymbolicInput),
        TraceValue::Float(_) => Err(Error::InexactInput),
    };
    let seed_spec =
        YPieceSpec::new(seed.tx.clone(), seed.ty.clone(), seed.tz.clone(), seed.x_elliptic)?;
    let root = Node {
        tx: exact(&seed_spec.tx)?,
        ty: exact(&seed_spec.ty)?,
        elliptic: seed_spec.x_elliptic,
    };

    let mut found: BTreeMap<Rational, GeneratedTrace> = BTreeMap::new();
    let mut record = |value: &Rational, chain: &[RuleStep], boundary: Boundary| -> bool {
        if *value < two || *value > *cap || found.contains_key(value) {
            return false;
        }
        found.insert(
            value.clone(),
            GeneratedTrace {
                value: value.clone(),
                chain: chain.to_vec(),
                boundary,
            },
        );
        true
    };
    record(&root.tx, &[], Boundary::X);
    record(&root.ty, &[], Boundary::Y);

    let mut visited: BTreeSet<Node> = BTreeSet::new();
    let mut frontier: Vec<(Node, Vec<RuleStep>)> = Vec::new();
    if root.within(cap) {
        visited.insert(root.key());
        frontier.push((root, Vec::new()));
    }

    for _ in 0..rule_budget {
        if frontier.is_empty() {
            break;
        }
        let expansions: Vec<Vec<Child>> = frontier.par_iter().map(|(n, _)| expand(n, cap)).collect();
        let mut next = Vec::new();
        for ((_, chain), children) in frontier.iter().zip(expansions) {
            for c in children {
                let mut path = chain.clone();
                path.push(c.step);
                record(&c.node.tx, &path, Boundary::X);
                record(&c.node.ty, &path, Boundary::Y);
                if c.node.within(cap) && visited.insert(c.node.key()) {
                    next.push((c.node, path));
                }
            }
        }
        frontier = next;
    }

    let truncated = frontier.par_iter().any(|(n, _)| {
        expand(n, cap).iter().any(|c| {
            [&c.node.tx, &c.node.ty]
                .into_iter()
                .any(|v| *v >= two && *v <= *cap && !found.contains_key(v))
        })
    });
    Ok(TraceSet {
        traces: found.into_values().collect(),
        truncated,
    })
}

/// `a5` of a convex right-angled hexagon with consecutive sides `a1..a6`:
/// `cosh a5 = cosh a2 sinh a1 sinh a3 - cosh a1 cosh a3`.
pub fn hexagon_side(a1: &HpFloat, a2: &HpFloat, a3: &HpFloat) -> Result<HpFloat> {
    let bits = a1.bits();
    let zero = HpFloat::from_u64(0, bits);
    if [a1, a2, a3].iter().any(|a| **a <= zero) {
        return Err(Error::BadInput("hexagon sides must be positive".into()));
    }
    let arg = a2
        .cosh()
        .mul(&a1.sinh())
        .mul(&a3.sinh())
        .sub(&a1.cosh().mul(&a3.cosh()));
    hexagon_arccosh(&arg, bits)
}

/// arccosh that treats arguments within rounding distance below 1 as exactly 1.
fn hexagon_arccosh(arg: &HpFloat, bits: usize) -> Result<HpFloat> {
    let one = HpFloat::from_u64(1, bits);
    if *arg < one {
        let slack = HpFloat::pow2_neg(bits.saturating_sub(16), bits).mul(&arg.abs().add(&one));
        if one.sub(arg) <= slack {
            return Ok(HpFloat::from_u64(0, bits));
        }
        return Err(Error::NoSuchHexagon(arg.to_string()));
    }
    Ok(arg.acosh())
}

#[derive(Clone, Debug)]
pub struct NuLimitRow {
    pub eps: HpFloat,
    /// `2 cosh(ν_n / 2)` on `Y(x, y, 2ε)`.
    pub value: HpFloat,
    pub error: HpFloat,
}

#[derive(Clone, Debug)]
pub struct NuLimitReport {
    /// `n(tx + ty) - ty`.
    pub target: HpFloat,
    pub rows: Vec<NuLimitRow>,
    /// Errors never grow as `ε` shrinks (errors at the rounding floor count as zero).
    pub monotone: bool,
    /// Least-squares slope of `log err` against `log ε`; `None` when fewer than
    /// two errors sit above the rounding floor.
    pub slope: Option<f64>,
}

impl NuLimitReport {
    pub fn max_error(&self) -> Option<&HpFloat> {
        self.rows
            .iter()
            .map(|r| &r.error)
            .max_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
    }
}

fn to_float(t: &TraceValue, bits: usize) -> Result<HpFloat> {
    match t {
        TraceValue::Rational(q) => Ok(HpFloat::from_rational(q, bits)),
        TraceValue::Float(x) => Ok(x.clone()),
        TraceValue::Symbolic(_) => Err(Error::SymbolicInput),
    }
}

/// Evaluates `2 cosh(ν_n / 2)` on `Y(x, y, 2ε)` for each `ε` and compares with
/// the limit `n(tx + ty) - ty`.
///
/// With `ty > 2` the value comes from two hexagons sharing the side `γ`:
/// `(y/2, γ, ε, ·, x/2, ·)` fixes `γ`, then `(y/2, γ, nε)` yields `ν_n/2`. A
/// cusp (`ty = 2`) makes the first side vanish, and the closed form with the
/// `sinh(y/2)` factors cancelled is used instead.
pub fn verify_nu_limit(
    tx: &TraceValue,
    ty: &TraceValue,
    n: u64,
    eps_list: &[HpFloat],
    bits: usize,
) -> Result<NuLimitReport> {
    if n == 0 {
        return Err(Error::ZeroParameter);
    }
    require_admissible(tx)?;
    require_admissible(ty)?;
    let one = HpFloat::from_u64(1, bits);
    let two = HpFloat::from_u64(2, bits);
    let ftx = to_float(tx, bits)?;
    let fty = to_float(ty, bits)?;
    let nf = HpFloat::from_u64(n, bits);
    let target = nf.mul(&ftx.add(&fty)).sub(&fty);
    let cosh_x2 = ftx.div(&two);
    let cosh_y2 = fty.div(&two);
    let y_is_cusp = fty == two;
    let half_y = cosh_y2.acosh();

    let mut rows = Vec::with_capacity(eps_list.len());
    for eps in eps_list {
        if *eps <= HpFloat::from_u64(0, bits) {
            return Err(Error::BadInput("epsilon must be positive".into()));
        }
        let n_eps = nf.mul(eps);
        let cosh_half_nu = if y_is_cusp {
            let ratio = n_eps.sinh().div(&eps.sinh());
            cosh_x2
                .add(&cosh_y2.mul(&eps.cosh()))
                .mul(&ratio)
                .sub(&cosh_y2.mul(&n_eps.cosh()))
        } else {
            let cosh_gamma = cosh_x2
                .add(&cosh_y2.mul(&eps.cosh()))
                .div(&half_y.sinh().mul(&eps.sinh()));
            let gamma = cosh_gamma.acosh();
            hexagon_side(&half_y, &gamma, &n_eps)?.cosh()
        };
        let value = cosh_half_nu.mul(&two);
        let error = value.sub(&target).abs();
        rows.push(NuLimitRow {
            eps: eps.clone(),
            value,
            error,
        });
    }

    let floor = HpFloat::pow2_neg(bits.saturating_sub(40), bits).mul(&target.add(&one));
    let effective: Vec<HpFloat> = rows
        .iter()
        .map(|r| if r.error <= floor { HpFloat::from_u64(0, bits) } else { r.error.clone() })
        .collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| rows[j].eps.partial_cmp(&rows[i].eps).unwrap_or(std::cmp::Ordering::Equal));
    let monotone = order.windows(2).all(|w| effective[w[1]] <= effective[w[0]]);

    let points: Vec<(f64, f64)> = rows
        .iter()
        .zip(&effective)
        .filter(|(_, e)| !e.is_zero())
        .map(|(r, e)| (r.eps.to_f64().ln(), e.to_f64().ln()))
        .collect();
    let slope = least_squares_slope(&points);
    Ok(NuLimitReport {
        target,
        rows,
        monotone,
        slope,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx.is_zero() {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
