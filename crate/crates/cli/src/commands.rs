use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use tracelab_core::census::{
    enumerate_traces, integrality_census, modular_generators, read_census_csv,
    write_census_csv, ViolationKind,
};
use tracelab_core::cluster::{build_witness_limited, ClusterWitness, WitnessDoc};
use tracelab_core::growth::{
    cluster_report_window, counterexample_inequality, sn_collisions, sn_family, union_sn_count_bound,
};
use tracelab_core::moebius::{Moebius, Sl2};
use tracelab_core::number::{format_rational, parse_rational, Rational};
use tracelab_core::rules::generate_trace_set;
use tracelab_core::ypiece::{build_generators, YPieceSpec};
use tracelab_core::TraceValue;

use crate::error::{CliError, CliResult};
use crate::manifest::{digest_file, sha256_hex, OutputDigest};
use crate::svg::Figure;
use crate::{
    BuildYpieceArgs, CheckArithmeticArgs, ClusterStatsArgs, Command, ConstructClusterArgs, CounterexampleArgs,
    EnumerateArgs, GenTracesArgs, SeedArgs,
};

/// Widest window cluster-stats will print bin by bin.
const MAX_PRINTED_WINDOW: u64 = 100_000;

pub fn dispatch(command: &Command, bits: usize) -> CliResult<Vec<OutputDigest>> {
    match command {
        Command::BuildYpiece(a) => build_ypiece(a),
        Command::GenTraces(a) => gen_traces(a),
        Command::ClusterStats(a) => cluster_stats(a),
        Command::Counterexample(a) => counterexample(a, bits),
        Command::ConstructCluster(a) => construct_cluster(a),
        Command::Enumerate(a) => enumerate(a),
        Command::CheckArithmetic(a) => check_arithmetic(a),
    }
}

fn emit(path: &Option<PathBuf>, bytes: &[u8]) -> CliResult<OutputDigest> {
    match path {
        Some(p) => write_file(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(OutputDigest {
                path: "-".into(),
                sha256: sha256_hex(bytes),
            })
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<OutputDigest> {
    std::fs::write(path, bytes)?;
    digest_file(path)
}

fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn rational_arg(name: &str, s: &str) -> CliResult<Rational> {
    parse_rational(s).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
}

fn integer_arg(name: &str, s: &str) -> CliResult<BigInt> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--{name}: {s:?} is not an integer")))
}

fn seed_spec(seed: &SeedArgs) -> CliResult<YPieceSpec> {
    let tx = rational_arg("tx", &seed.tx)?;
    let ty = rational_arg("ty", &seed.ty)?;
    Ok(YPieceSpec::new(tx.into(), ty.into(), TraceValue::two(), seed.elliptic)?)
}

#[derive(Serialize)]
struct MatrixDoc {
    a: String,
    b: String,
    c: String,
    d: String,
}

impl From<&Sl2> for MatrixDoc {
    fn from(m: &Sl2) -> Self {
        MatrixDoc {
            a: format_rational(&m.a),
            b: format_rational(&m.b),
            c: format_rational(&m.c),
            d: format_rational(&m.d),
        }
    }
}

#[derive(Serialize)]
struct PairDoc {
    tx: String,
    ty: String,
    x_elliptic: bool,
    epsilon: i8,
    tu: MatrixDoc,
    tv: MatrixDoc,
    product: MatrixDoc,
    product_trace: String,
    tu_class: tracelab_core::moebius::Classification,
    tv_class: tracelab_core::moebius::Classification,
}

fn build_ypiece(args: &BuildYpieceArgs) -> CliResult<Vec<OutputDigest>> {
    let spec = seed_spec(&args.seed)?;
    let pair = build_generators(&spec)?;
    let (u, v) = (pair.tu_moebius(), pair.tv_moebius());
    let product = &pair.parabolic_product;
    let body = if args.json {
        json_bytes(&PairDoc {
            tx: format_rational(&pair.tx()),
            ty: format_rational(&pair.ty()),
            x_elliptic: spec.x_elliptic,
            epsilon: pair.epsilon,
            tu: (&pair.tu).into(),
            tv: (&pair.tv).into(),
            product: product.matrix().into(),
            product_trace: format_rational(&product.trace_rational()),
            tu_class: u.classify(),
            tv_class: v.classify(),
        })?
    } else {
        format!(
            "T_u = {}  ({:?}, trace {})\nT_v = {}  ({:?}, trace {})\nT_u T_v^-1 = {}  (trace {})\n",
            pair.tu,
            u.classify(),
            format_rational(&u.trace_rational()),
            pair.tv,
            v.classify(),
            format_rational(&v.trace_rational()),
            product,
            format_rational(&product.trace_rational()),
        )
        .into_bytes()
    };
    let mut digests = vec![emit(&args.output, &body)?];
    if let Some(path) = &args.svg {
        let mut fig = Figure::new();
        for (label, m, color) in [("I(T_u)", &u, "steelblue"), ("I(T_v)", &v, "seagreen")] {
            fig.add(label, &m.isometric_circle()?, color);
            fig.add(&format!("{label}^-1"), &m.invert().isometric_circle()?, color);
        }
        for (label, m) in [("C(T_u)", &u), ("C(T_v)", &v)] {
            if let Ok(axis) = m.axis_circle() {
                fig.add(label, &axis, "red");
            }
        }
        digests.push(write_file(path, fig.render().as_bytes())?);
    }
    Ok(digests)
}

fn chain_csv(rows: impl IntoIterator<Item = (Rational, String)>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["value_num", "value_den", "rule_chain"])?;
    for (q, chain) in rows {
        w.write_record([q.numer().to_string(), q.denom().to_string(), chain])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn gen_traces(args: &GenTracesArgs) -> CliResult<Vec<OutputDigest>> {
    let spec = seed_spec(&args.seed)?;
    let cap = rational_arg("cap", &args.cap)?;
    let set = generate_trace_set(&spec, &cap, args.budget)?;
    let body = chain_csv(set.traces.iter().map(|t| (t.value.clone(), t.chain_string())))?;
    Ok(vec![emit(&args.output, &body)?])
}

#[derive(Deserialize)]
struct ValueRow {
    value_num: String,
    value_den: String,
}

fn read_values(path: &Path) -> CliResult<BTreeSet<Rational>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = BTreeSet::new();
    for row in r.deserialize() {
        let row: ValueRow = row?;
        let num: BigInt = integer_arg("input", &row.value_num)?;
        let den: BigInt = integer_arg("input", &row.value_den)?;
        if den.is_zero() {
            return Err(CliError::Usage("zero denominator in input".into()));
        }
        out.insert(Rational::new(num, den));
    }
    Ok(out)
}

#[derive(Serialize)]
struct CountAt {
    n: String,
    count: u64,
}

#[derive(Serialize)]
struct LinearFitDoc {
    c: String,
    d: String,
}

#[derive(Serialize)]
struct GrowthDoc {
    range: [String; 2],
    sample_size: usize,
    bins: Vec<CountAt>,
    cumulative: Vec<CountAt>,
    bc_bound_estimate: u64,
    gap_estimate: Option<String>,
    gap_is_upper_bound: bool,
    linear_fit: LinearFitDoc,
}

fn parse_range(s: &str) -> CliResult<(BigInt, BigInt)> {
    match s.split_once(':') {
        Some((lo, hi)) => Ok((integer_arg("range", lo)?, integer_arg("range", hi)?)),
        None => Ok((BigInt::zero(), integer_arg("range", s)?)),
    }
}

fn cluster_stats(args: &ClusterStatsArgs) -> CliResult<Vec<OutputDigest>> {
    let values: BTreeSet<Rational> = match (&args.input, &args.tx) {
        (Some(path), _) => read_values(path)?,
        (None, Some(tx)) => {
            let seed = SeedArgs {
                tx: tx.clone(),
                ty: args.ty.clone().unwrap_or_else(|| "2".into()),
                elliptic: false,
            };
            let cap = rational_arg("cap", &args.cap)?;
            generate_trace_set(&seed_spec(&seed)?, &cap, args.budget)?.values().into_iter().collect()
        }
        (None, None) => return Err(CliError::Usage("give --input or --tx".into())),
    };
    let (lo, hi) = match &args.range {
        Some(s) => parse_range(s)?,
        None => {
            let floor = |q: Option<&Rational>| q.map(|q| q.floor().to_integer()).unwrap_or_else(BigInt::zero);
            let hi = floor(values.last());
            let lo = if hi < BigInt::from(MAX_PRINTED_WINDOW) {
                BigInt::zero()
            } else {
                floor(values.first())
            };
            (lo, hi)
        }
    };
    if hi < lo || &hi - &lo >= BigInt::from(MAX_PRINTED_WINDOW) {
        return Err(CliError::Usage(format!(
            "window [{lo}, {hi}] is empty or wider than {MAX_PRINTED_WINDOW}; pass --range LO:HI"
        )));
    }
    let traces: Vec<TraceValue> = values.into_iter().map(TraceValue::from).collect();
    let report = cluster_report_window(&traces, &lo, &hi)?;
    let counts = |m: &std::collections::BTreeMap<BigInt, u64>| {
        m.iter()
            .map(|(n, c)| CountAt {
                n: n.to_string(),
                count: *c,
            })
            .collect()
    };
    let doc = GrowthDoc {
        range: [lo.to_string(), hi.to_string()],
        sample_size: report.sample_size,
        bins: counts(&report.bins),
        cumulative: counts(&report.cumulative),
        bc_bound_estimate: report.bc_bound_estimate,
        gap_estimate: report.gap_estimate.as_ref().map(ToString::to_string),
        gap_is_upper_bound: true,
        linear_fit: LinearFitDoc {
            c: format_rational(&report.linear_fit.c),
            d: format_rational(&report.linear_fit.d),
        },
    };
    Ok(vec![emit(&args.output, &json_bytes(&doc)?)?])
}

#[derive(Serialize)]
struct UnionDoc {
    actual: u64,
    entries: u64,
    bound: String,
    bound_approx: f64,
    holds: bool,
}

#[derive(Serialize)]
struct LevelDoc {
    n: u32,
    elements: usize,
    distinct_values: usize,
    all_in_bn: bool,
}

#[derive(Serialize)]
struct InequalityDoc {
    n: u32,
    exact_step: bool,
    analytic_step: bool,
    enumerated_step: Option<bool>,
}

#[derive(Serialize)]
struct CollisionDoc {
    value: String,
    first: (u32, u64, u64),
    second: (u32, u64, u64),
}

#[derive(Serialize)]
struct CollisionsDoc {
    count: usize,
    examples: Vec<CollisionDoc>,
}

#[derive(Serialize)]
struct CounterexampleDoc {
    a: String,
    b: String,
    levels: u32,
    cap: u64,
    union: UnionDoc,
    per_level: Vec<LevelDoc>,
    inequality: Vec<InequalityDoc>,
    collisions: CollisionsDoc,
    all_checks_pass: bool,
}

const MAX_LEVELS: u32 = 20;

fn counterexample(args: &CounterexampleArgs, bits: usize) -> CliResult<Vec<OutputDigest>> {
    let a = integer_arg("a", &args.a)?;
    let b = integer_arg("b", &args.b)?;
    if args.levels > MAX_LEVELS {
        return Err(CliError::Usage(format!("--levels must be at most {MAX_LEVELS}")));
    }
    let union = union_sn_count_bound(&a, &b, args.levels, args.cap)?;
    let cap = Rational::from_integer(args.cap.into());
    let mut per_level = Vec::new();
    for n in 0..=args.levels {
        let fam = sn_family(&a, &b, n, &cap)?;
        per_level.push(LevelDoc {
            n,
            elements: fam.elements.len(),
            distinct_values: fam.distinct_values().len(),
            all_in_bn: fam.verify(),
        });
    }
    let inequality: Vec<InequalityDoc> = (0..=args.levels)
        .map(|n| {
            counterexample_inequality(&a, &b, n, bits).map(|r| InequalityDoc {
                n,
                exact_step: r.exact_step,
                analytic_step: r.analytic_step,
                enumerated_step: r.enumerated_step,
            })
        })
        .collect::<Result<_, _>>()?;
    let collisions = sn_collisions(&a, &b, args.levels, args.cap)?;
    let all_checks_pass = union.holds()
        && per_level.iter().all(|l| l.all_in_bn)
        && inequality
            .iter()
            .all(|i| i.exact_step && i.analytic_step && i.enumerated_step.unwrap_or(true));
    let doc = CounterexampleDoc {
        a: a.to_string(),
        b: b.to_string(),
        levels: args.levels,
        cap: args.cap,
        union: UnionDoc {
            actual: union.actual,
            entries: union.entries,
            bound: format_rational(&union.bound),
            bound_approx: tracelab_core::number::rational_to_f64(&union.bound),
            holds: union.holds(),
        },
        per_level,
        inequality,
        collisions: CollisionsDoc {
            count: collisions.len(),
            examples: collisions
                .iter()
                .take(5)
                .map(|c| CollisionDoc {
                    value: format_rational(&c.value),
                    first: c.first,
                    second: c.second,
                })
                .collect(),
        },
        all_checks_pass,
    };
    Ok(vec![emit(&args.output, &json_bytes(&doc)?)?])
}

#[derive(Serialize)]
struct WitnessChecks {
    invariants: bool,
    values_in_generated_set: bool,
    rule_replay: bool,
    span: String,
    max_bits: u64,
}

#[derive(Serialize)]
struct ClusterDoc {
    witness: WitnessDoc,
    checks: WitnessChecks,
}

fn witness_chain(w: &ClusterWitness, i: usize) -> String {
    let mut steps = vec!["COLLAPSE".to_string(); w.f[i] as usize];
    steps.push(format!("NU_N[n={}]", w.m[i]));
    format!("{}#x", steps.join(">"))
}

fn construct_cluster(args: &ConstructClusterArgs) -> CliResult<Vec<OutputDigest>> {
    let a = integer_arg("a", &args.a)?;
    let b = integer_arg("b", &args.b)?;
    let n = args
        .n
        .or(args.refute_bc)
        .ok_or_else(|| CliError::Usage("give --n or --refute-bc".into()))?;
    let w = build_witness_limited(&a, &b, n, args.max_bits)?;
    let (lo, hi) = w.span();
    let doc = ClusterDoc {
        witness: w.to_doc(),
        checks: WitnessChecks {
            invariants: w.validate().is_ok(),
            values_in_generated_set: w.values_in_generated_set(),
            rule_replay: w.replay_with_rules()?,
            span: format_rational(&(hi - lo)),
            max_bits: w.max_bits(),
        },
    };
    let mut digests = vec![emit(&args.output, &json_bytes(&doc)?)?];
    if let Some(path) = &args.values_csv {
        let mut rows: Vec<(Rational, String)> =
            w.values.iter().enumerate().map(|(i, v)| (v.clone(), witness_chain(&w, i))).collect();
        rows.sort();
        digests.push(write_file(path, &chain_csv(rows)?)?);
    }
    Ok(digests)
}

#[derive(Deserialize)]
struct GenFile {
    u: [String; 4],
    v: [String; 4],
}

fn moebius_of(entries: &[String; 4], name: &str) -> CliResult<Moebius> {
    let q = entries
        .iter()
        .map(|s| rational_arg(name, s))
        .collect::<CliResult<Vec<_>>>()?;
    let [a, b, c, d]: [Rational; 4] = q.try_into().expect("four entries");
    Ok(Moebius::new(a, b, c, d)?)
}

fn enumerate(args: &EnumerateArgs) -> CliResult<Vec<OutputDigest>> {
    let (u, v) = if args.modular {
        modular_generators()
    } else if let Some(path) = &args.gen_file {
        let text = std::fs::read_to_string(path)?;
        let g: GenFile = serde_json::from_str(&text)?;
        (moebius_of(&g.u, "gen-file")?, moebius_of(&g.v, "gen-file")?)
    } else if let (Some(tx), Some(ty)) = (&args.tx, &args.ty) {
        let seed = SeedArgs {
            tx: tx.clone(),
            ty: ty.clone(),
            elliptic: false,
        };
        let pair = build_generators(&seed_spec(&seed)?)?;
        (pair.tu_moebius(), pair.tv_moebius())
    } else {
        return Err(CliError::Usage("give --modular, --gen-file or --tx/--ty".into()));
    };
    let census = enumerate_traces(&u, &v, args.max_len as usize, args.budget)?;
    let mut body = Vec::new();
    write_census_csv(&census, &mut body)?;
    Ok(vec![emit(&args.output, &body)?])
}

#[derive(Serialize)]
struct ViolationDoc {
    trace: String,
    kind: &'static str,
    witness: Option<String>,
}

#[derive(Serialize)]
struct IntegrityDoc {
    all_integer: bool,
    checked: usize,
    max_word_length: usize,
    violations: Vec<ViolationDoc>,
    sample_only: bool,
}

fn check_arithmetic(args: &CheckArithmeticArgs) -> CliResult<Vec<OutputDigest>> {
    let file = std::fs::File::open(&args.census)?;
    let census = read_census_csv(file)?;
    let report = integrality_census(&census);
    let doc = IntegrityDoc {
        all_integer: report.all_integer(),
        checked: report.checked,
        max_word_length: census.max_word_length,
        violations: report
            .violations
            .iter()
            .map(|v| ViolationDoc {
                trace: format_rational(&v.trace),
                kind: match v.kind {
                    ViolationKind::Trace => "trace",
                    ViolationKind::SquaredTrace => "squared_trace",
                },
                witness: v.witness.as_ref().map(ToString::to_string),
            })
            .collect(),
        sample_only: true,
    };
    Ok(vec![emit(&args.output, &json_bytes(&doc)?)?])
}
