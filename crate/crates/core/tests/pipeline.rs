use num_bigint::BigInt;
use tracelab_core::census::{enumerate_traces, integrality_census, modular_generators, read_census_csv, write_census_csv};
use tracelab_core::cluster::{build_witness, ClusterWitness, WitnessDoc};
use tracelab_core::growth::cluster_report;
use tracelab_core::number::{int, rat};
use tracelab_core::rules::generate_trace_set;
use tracelab_core::ypiece::{build_generators, YPieceSpec};
use tracelab_core::TraceValue;

#[test]
fn census_survives_csv_round_trip() {
    let seed = YPieceSpec::cusped(TraceValue::int(3), TraceValue::int(2)).unwrap();
    let pair = build_generators(&seed).unwrap();
    let census = enumerate_traces(&pair.tu_moebius(), &pair.tv_moebius(), 5, 1_000_000).unwrap();
    assert!(census.contains(&int(3)));
    assert!(census.contains(&int(2)));

    let mut buf = Vec::new();
    write_census_csv(&census, &mut buf).unwrap();
    let back = read_census_csv(buf.as_slice()).unwrap();
    assert_eq!(back.traces(), census.traces());
    assert_eq!(back.multiplicity(), census.multiplicity());
}

#[test]
fn generated_traces_feed_growth_report() {
    let seed = YPieceSpec::cusped(TraceValue::int(3), TraceValue::int(2)).unwrap();
    let set = generate_trace_set(&seed, &int(50), 4).unwrap();
    let values: Vec<TraceValue> = set.values().into_iter().map(TraceValue::from).collect();
    let report = cluster_report(&values, 50).unwrap();

    let counts: Vec<u64> = report.cumulative.values().copied().collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*counts.last().unwrap(), values.len() as u64);
    assert_eq!(report.bins.values().sum::<u64>(), values.len() as u64);
}

#[test]
fn witness_round_trips_through_json() {
    let w = build_witness(&BigInt::from(9), &BigInt::from(2), 2).unwrap();
    w.validate().unwrap();
    assert!(w.values_in_generated_set());
    assert!(w.replay_with_rules().unwrap());

    let json = serde_json::to_string(&w.to_doc()).unwrap();
    let doc: WitnessDoc = serde_json::from_str(&json).unwrap();
    let back = ClusterWitness::from_doc(&doc).unwrap();
    assert_eq!(back.to_doc(), w.to_doc());
    back.validate().unwrap();
}

#[test]
fn modular_group_is_integral_and_rational_seed_is_not() {
    let (u, v) = modular_generators();
    let census = enumerate_traces(&u, &v, 5, 1_000_000).unwrap();
    assert!(integrality_census(&census).all_integer());

    let seed = YPieceSpec::cusped(TraceValue::Rational(rat(5, 2)), TraceValue::int(2)).unwrap();
    let pair = build_generators(&seed).unwrap();
    let census = enumerate_traces(&pair.tu_moebius(), &pair.tv_moebius(), 3, 1_000_000).unwrap();
    assert!(!integrality_census(&census).all_integer());
}
