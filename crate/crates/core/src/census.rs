//! Ground-truth trace sets: every reduced word in two generators up to a
//! given length, with exact traces.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{Moebius, Sl2};
use crate::number::{is_integer, Rational, TraceValue};

/// Default cap on the number of words visited by [`enumerate_traces`].
pub const DEFAULT_NODE_BUDGET: u128 = 10_000_000;

/// Letters in enumeration order `U < U⁻¹ < V < V⁻¹`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    U,
    UInv,
    V,
    VInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::U, Letter::UInv, Letter::V, Letter::VInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::U => Letter::UInv,
            Letter::UInv => Letter::U,
            Letter::V => Letter::VInv,
            Letter::VInv => Letter::V,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Letter::U => 'U',
            Letter::UInv => 'u',
            Letter::V => 'V',
            Letter::VInv => 'v',
        }
    }

    pub fn from_symbol(c: char) -> Option<Letter> {
        Letter::ALL.into_iter().find(|l| l.symbol() == c)
    }
}

/// A word in `U, V` and their inverses; lower case marks an inverse.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordSpec {
    pub letters: Vec<Letter>,
    pub reduced: bool,
}

impl WordSpec {
    pub fn new(letters: Vec<Letter>) -> Self {
        let reduced = letters.windows(2).all(|w| w[0].inverse() != w[1]);
        WordSpec { letters, reduced }
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Letter::from_symbol(c).ok_or_else(|| Error::Parse(format!("bad letter {c:?} in word {s:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(WordSpec::new)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn evaluate(&self, tu: &Moebius, tv: &Moebius) -> Moebius {
        let gens = Generators::new(tu, tv);
        Moebius::from_sl2(self.letters.iter().fold(Sl2::identity(), |acc, l| acc.mul(gens.get(*l))))
    }
}

impl fmt::Display for WordSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.letters.iter().try_for_each(|l| write!(f, "{}", l.symbol()))
    }
}

struct Generators([Sl2; 4]);

impl Generators {
    fn new(tu: &Moebius, tv: &Moebius) -> Self {
        let (u, v) = (tu.matrix().clone(), tv.matrix().clone());
        Generators([u.clone(), u.inverse(), v.clone(), v.inverse()])
    }

    fn get(&self, l: Letter) -> &Sl2 {
        &self.0[l as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusEntry {
    pub multiplicity: u64,
    pub min_word_length: usize,
    /// Shortest word attaining the trace, lexicographically first among those.
    pub witness: WordSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceCensus {
    pub max_word_length: usize,
    pub entries: BTreeMap<Rational, CensusEntry>,
    /// Reduced words visited at each length `1..=max_word_length`.
    pub words_per_length: Vec<u64>,
}

impl TraceCensus {
    pub fn traces(&self) -> Vec<Rational> {
        self.entries.keys().cloned().collect()
    }

    pub fn multiplicity(&self) -> BTreeMap<Rational, u64> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.multiplicity)).collect()
    }

    pub fn contains(&self, t: &Rational) -> bool {
        self.entries.contains_key(t)
    }
}

/// Number of reduced words of length `1..=max_len`: `2(3^L - 1)`.
pub fn reduced_word_total(max_len: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 4;
    for _ in 0..max_len {
        total = total.saturating_add(level);
        level = level.saturating_mul(3);
    }
    total
}

fn merge_entry(into: &mut BTreeMap<Rational, CensusEntry>, trace: Rational, entry: CensusEntry) {
    match into.get_mut(&trace) {
        None => {
            into.insert(trace, entry);
        }
        Some(e) => {
            e.multiplicity += entry.multiplicity;
            if (entry.min_word_length, &entry.witness) < (e.min_word_length, &e.witness) {
                e.min_word_length = entry.min_word_length;
                e.witness = entry.witness;
            }
        }
    }
}

fn enumerate_shard(gens: &Generators, first: Letter, max_len: usize) -> (BTreeMap<Rational, CensusEntry>, Vec<u64>) {
    let mut found = BTreeMap::new();
    let mut counts = vec![0u64; max_len];
    let mut stack = vec![(gens.get(first).clone(), vec![first])];
    while let Some((matrix, word)) = stack.pop() {
        counts[word.len() - 1] += 1;
        let trace = matrix.signed_trace().abs();
        merge_entry(
            &mut found,
            trace,
            CensusEntry {
                multiplicity: 1,
                min_word_length: word.len(),
                witness: WordSpec::new(word.clone()),
            },
        );
        if word.len() == max_len {
            continue;
        }
        let last = *word.last().expect("words are non-empty");
        // Reverse push so the stack pops in letter order.
        for l in Letter::ALL.into_iter().rev() {
            if l == last.inverse() {
                continue;
            }
            let mut next = word.clone();
            next.push(l);
            stack.push((matrix.mul(gens.get(l)), next));
        }
    }
    (found, counts)
}

/// Visits every reduced word of length `1..=max_len` once and records exact traces.
pub fn enumerate_traces(tu: &Moebius, tv: &Moebius, max_len: usize, node_budget: u128) -> Result<TraceCensus> {
    if max_len == 0 {
        return Err(Error::BadInput("maximum word length must be at least 1".into()));
    }
    let words = reduced_word_total(max_len);
    if words > node_budget {
        return Err(Error::DepthTooLarge { words, budget: node_budget });
    }
    let gens = Generators::new(tu, tv);
    let shards: Vec<_> = Letter::ALL
        .par_iter()
        .map(|&first| enumerate_shard(&gens, first, max_len))
        .collect();
    let mut entries = BTreeMap::new();
    let mut words_per_length = vec![0u64; max_len];
    for (found, counts) in shards {
        for (t, e) in found {
            merge_entry(&mut entries, t, e);
        }
        for (acc, c) in words_per_length.iter_mut().zip(counts) {
            *acc += c;
        }
    }
    Ok(TraceCensus {
        max_word_length: max_len,
        entries,
        words_per_length,
    })
}

/// `S = [[0,-1],[1,0]]` and `T = [[1,1],[0,1]]`.
pub fn modular_generators() -> (Moebius, Moebius) {
    (
        Moebius::from_ints(0, -1, 1, 0).expect("unimodular"),
        Moebius::from_ints(1, 1, 0, 1).expect("unimodular"),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub enum Containment {
    Found { word: WordSpec },
    /// Absent up to the census depth; not a statement about the full group.
    NotFoundAtDepth { depth: usize },
    NotCheckable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentRow {
    pub predicted: TraceValue,
    pub status: Containment,
}

pub fn contains_predicted_traces(census: &TraceCensus, predicted: &[TraceValue]) -> Vec<ContainmentRow> {
    predicted
        .iter()
        .map(|p| {
            let status = match p.as_rational() {
                None => Containment::NotCheckable,
                Some(q) => match census.entries.get(q) {
                    Some(e) => Containment::Found { word: e.witness.clone() },
                    None => Containment::NotFoundAtDepth { depth: census.max_word_length },
                },
            };
            ContainmentRow {
                predicted: p.clone(),
                status,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Trace,
    SquaredTrace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub trace: Rational,
    pub kind: ViolationKind,
    pub witness: Option<WordSpec>,
}

/// Integrality of a sample. A clean report is consistent with arithmeticity; it proves nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralityReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
    pub not_checkable: Vec<TraceValue>,
}

impl IntegralityReport {
    pub fn all_integer(&self) -> bool {
        self.violations.is_empty() && self.not_checkable.is_empty()
    }
}

fn integrality_of(items: Vec<(TraceValue, Option<WordSpec>)>) -> IntegralityReport {
    let mut report = IntegralityReport {
        checked: 0,
        violations: Vec::new(),
        not_checkable: Vec::new(),
    };
    for (t, witness) in items {
        let Some(q) = t.as_rational() else {
            report.not_checkable.push(t);
            continue;
        };
        report.checked += 1;
        if !is_integer(q) {
            report.violations.push(Violation {
                trace: q.clone(),
                kind: ViolationKind::Trace,
                witness: witness.clone(),
            });
        }
        if !is_integer(&(q * q)) {
            report.violations.push(Violation {
                trace: q.clone(),
                kind: ViolationKind::SquaredTrace,
                witness,
            });
        }
    }
    report
}

/// Checks `tr w ∈ ℤ` and `tr(w)² ∈ ℤ` over the census.
pub fn integrality_census(census: &TraceCensus) -> IntegralityReport {
    integrality_of(
        census
            .entries
            .iter()
            .map(|(t, e)| (TraceValue::Rational(t.clone()), Some(e.witness.clone())))
            .collect(),
    )
}

/// Same checks for a bare list of values; symbolic values are reported as not checkable.
pub fn integrality_of_values(values: &[TraceValue]) -> IntegralityReport {
    integrality_of(values.iter().map(|t| (t.clone(), None)).collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct CensusRow {
    trace_numerator: String,
    trace_denominator: String,
    multiplicity: u64,
    min_word_length: usize,
    witness_word: String,
}

pub fn write_census_csv<W: Write>(census: &TraceCensus, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (t, e) in &census.entries {
        w.serialize(CensusRow {
            trace_numerator: t.numer().to_string(),
            trace_denominator: t.denom().to_string(),
            multiplicity: e.multiplicity,
            min_word_length: e.min_word_length,
            witness_word: e.witness.to_string(),
        })
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a census CSV; `max_word_length` is the largest witness length present.
pub fn read_census_csv<R: Read>(input: R) -> Result<TraceCensus> {
    let mut r = csv::Reader::from_reader(input);
    let mut entries = BTreeMap::new();
    let mut depth = 0;
    for row in r.deserialize() {
        let row: CensusRow = row.map_err(|e| Error::Parse(e.to_string()))?;
        let num: BigInt = row.trace_numerator.parse().map_err(|_| Error::Parse(row.trace_numerator.clone()))?;
        let den: BigInt = row.trace_denominator.parse().map_err(|_| Error::Parse(row.trace_denominator.clone()))?;
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        depth = depth.max(row.min_word_length);
        entries.insert(
            Rational::new(num, den),
            CensusEntry {
                multiplicity: row.multiplicity,
                min_word_length: row.min_word_length,
                witness: WordSpec::parse(&row.witness_word)?,
            },
        );
    }
    Ok(TraceCensus {
        max_word_length: depth,
        entries,
        words_per_length: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{int, rat};
    use crate::rules::rule_nu_n;
    use crate::ypiece::{build_generators, YPieceSpec};
    use proptest::prelude::*;

    fn pair(tx: i64, ty: i64) -> (Moebius, Moebius) {
        let p = build_generators(&YPieceSpec::cusped(TraceValue::int(tx), TraceValue::int(ty)).unwrap()).unwrap();
        (p.tu_moebius(), p.tv_moebius())
    }

    #[test]
    fn modular_group_small_traces() {
        let (s, t) = modular_generators();
        let c = enumerate_traces(&s, &t, 4, DEFAULT_NODE_BUDGET).unwrap();
        for v in 0..=3 {
            assert!(c.contains(&int(v)), "missing {v}");
        }
        assert_eq!(c.entries[&int(1)].witness.to_string(), "UV");
        assert!(integrality_census(&c).all_integer());
    }

    #[test]
    fn depth_one_has_generator_traces() {
        let (u, v) = pair(3, 4);
        let c = enumerate_traces(&u, &v, 1, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(c.traces(), vec![int(3), int(4)]);
        assert_eq!(c.entries[&int(3)].multiplicity, 2);
    }

    #[test]
    fn parabolic_product_at_length_two() {
        let (u, v) = pair(3, 3);
        let c = enumerate_traces(&u, &v, 2, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(c.entries[&int(2)].min_word_length, 2);
        assert_eq!(c.entries[&int(2)].witness.to_string(), "Uv");
    }

    #[test]
    fn word_counts_and_budget() {
        let (u, v) = pair(3, 2);
        let c = enumerate_traces(&u, &v, 5, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(c.words_per_length, vec![4, 12, 36, 108, 324]);
        assert_eq!(reduced_word_total(5), 484);
        assert_eq!(
            enumerate_traces(&u, &v, 5, 483),
            Err(Error::DepthTooLarge { words: 484, budget: 483 })
        );
        assert!(enumerate_traces(&u, &v, 0, 10).is_err());
    }

    #[test]
    fn nu_predictions_found() {
        let (u, v) = pair(3, 2);
        let c = enumerate_traces(&u, &v, 3, DEFAULT_NODE_BUDGET).unwrap();
        let nu = |n| rule_nu_n(&TraceValue::int(3), &TraceValue::int(2), n).unwrap().tx;
        let rows = contains_predicted_traces(&c, &[nu(1), nu(2), TraceValue::int(10_000), TraceValue::z_minus_two()]);
        assert!(matches!(&rows[0].status, Containment::Found { word } if word.len() == 1));
        assert!(matches!(&rows[1].status, Containment::Found { word } if word.len() <= 3));
        assert_eq!(rows[2].status, Containment::NotFoundAtDepth { depth: 3 });
        assert_eq!(rows[3].status, Containment::NotCheckable);
    }

    #[test]
    fn census_inclusion_across_depths() {
        let (u, v) = pair(4, 3);
        let mut prev = enumerate_traces(&u, &v, 1, DEFAULT_NODE_BUDGET).unwrap();
        for depth in 2..=6 {
            let next = enumerate_traces(&u, &v, depth, DEFAULT_NODE_BUDGET).unwrap();
            assert!(prev.entries.keys().all(|t| next.contains(t)));
            assert!(next.entries.keys().all(|t| !t.is_negative() && is_integer(t)));
            prev = next;
        }
    }

    #[test]
    fn rational_trace_violation() {
        let p = build_generators(&YPieceSpec::cusped(TraceValue::Rational(rat(5, 2)), TraceValue::int(2)).unwrap()).unwrap();
        let c = enumerate_traces(&p.tu_moebius(), &p.tv_moebius(), 1, DEFAULT_NODE_BUDGET).unwrap();
        let report = integrality_census(&c);
        assert!(!report.all_integer());
        let v = &report.violations[0];
        assert_eq!(v.trace, rat(5, 2));
        assert_eq!(v.witness.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn symbolic_values_not_checkable() {
        let r = integrality_of_values(&[TraceValue::int(3), TraceValue::z_minus_two()]);
        assert_eq!(r.checked, 1);
        assert_eq!(r.not_checkable.len(), 1);
        assert!(!r.all_integer());
    }

    #[test]
    fn csv_round_trip() {
        let (s, t) = modular_generators();
        let c = enumerate_traces(&s, &t, 4, DEFAULT_NODE_BUDGET).unwrap();
        let mut buf = Vec::new();
        write_census_csv(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("trace_numerator,trace_denominator,multiplicity,min_word_length,witness_word\n"));
        let back = read_census_csv(buf.as_slice()).unwrap();
        assert_eq!(back.entries, c.entries);
    }

    #[test]
    fn word_parse_and_evaluate() {
        let w = WordSpec::parse("UvU").unwrap();
        assert!(w.reduced);
        assert!(!WordSpec::parse("Uu").unwrap().reduced);
        assert!(WordSpec::parse("Ux").is_err());
        let (s, t) = modular_generators();
        assert_eq!(WordSpec::parse("UV").unwrap().evaluate(&s, &t).trace_rational(), int(1));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let (u, v) = pair(3, 3);
        let a = enumerate_traces(&u, &v, 6, DEFAULT_NODE_BUDGET).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| enumerate_traces(&u, &v, 6, DEFAULT_NODE_BUDGET).unwrap());
        assert_eq!(a, b);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn census_conjugation_invariant(a in small_rational(), b in small_rational(), c in small_rational()) {
            prop_assume!(!a.is_zero());
            // R = [[a, b], [c, (1 + bc)/a]] has determinant 1.
            let d = (int(1) + &b * &c) / &a;
            let r = Moebius::new(a, b, c, d).unwrap();
            let (u, v) = pair(3, 4);
            let base = enumerate_traces(&u, &v, 4, DEFAULT_NODE_BUDGET).unwrap();
            let conj = enumerate_traces(&u.conjugate(&r), &v.conjugate(&r), 4, DEFAULT_NODE_BUDGET).unwrap();
            prop_assert_eq!(base.multiplicity(), conj.multiplicity());
        }
    }
}
