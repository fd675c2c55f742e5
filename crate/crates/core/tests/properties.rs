//! Property tests for the engine's structural invariants: prefix-freeness
//! and losslessness of the codec, exactness of the inactive-detector
//! account, soundness of redundancy elimination, and determinism.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use emergence_core::{
    codec, decode_selection, evaluate_trace, full_selection, reduce_trace, relative_complexity,
    selection::decoded_matches, AccountingMode, CodecParams, DetectorId, Hierarchy, Lattice,
    ReadingRow, ReduceOptions, Rule, SensorId, SensorKind, Slot, Value,
};

fn params() -> CodecParams {
    CodecParams::default()
}

proptest! {
    #[test]
    fn gamma_stream_is_prefix_free(values in proptest::collection::vec(1u64..1_000_000, 1..40)) {
        let mut bits = Vec::new();
        for &v in &values {
            codec::encode_gamma(v, &mut bits).unwrap();
        }
        let mut pos = 0;
        let mut decoded = Vec::new();
        while pos < bits.len() {
            decoded.push(codec::decode_gamma(&bits, &mut pos).unwrap());
        }
        prop_assert_eq!(decoded, values);
    }

    #[test]
    fn lattice_rle_round_trips(
        rows in 1usize..10,
        cols in 1usize..10,
        seed in any::<u64>(),
    ) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let cells: Vec<bool> = (0..rows * cols).map(|_| rng.gen()).collect();
        let lat = Lattice::from_cells(rows, cols, cells);
        let bits = codec::lattice_to_bits(&lat).unwrap();
        prop_assert_eq!(bits.len() as u64, codec::encode_lattice_rle(&lat).unwrap());
        let back = codec::lattice_from_bits(&bits, rows, cols).unwrap();
        prop_assert_eq!(back, lat);
    }

    #[test]
    fn lattice_bits_hit_the_literal_bound_only_on_unit_runs(
        rows in 1usize..8,
        cols in 1usize..8,
        seed in any::<u64>(),
    ) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let cells: Vec<bool> = (0..rows * cols).map(|_| rng.gen()).collect();
        let lat = Lattice::from_cells(rows, cols, cells);
        let bits = codec::encode_lattice_rle(&lat).unwrap();
        let cells_n = (rows * cols) as u64;
        let runs = lat.runs();
        // gamma(n) <= 2n - 1, so the stream never exceeds this slack bound
        prop_assert!(bits <= 1 + 2 * cells_n - runs.len() as u64);
        // all-unit runs attain the all-literal bound exactly
        if runs.iter().all(|&r| r == 1) {
            prop_assert_eq!(bits, 1 + cells_n);
        }
    }
}

// ---------------------------------------------------------------------------
// Randomized hierarchies and streams

/// A randomized symbol hierarchy: a few sensors, symbol detectors, and
/// windowed sequence detectors (possibly tolerant).
fn random_symbol_setup(seed: u64) -> (Hierarchy, Vec<ReadingRow>) {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut h = Hierarchy::new();
    let n_sensors = rng.gen_range(1..=2usize);
    let alphabet = vec!['a', 'b', 'c'];
    let sensors: Vec<SensorId> = (0..n_sensors)
        .map(|i| {
            h.register_sensor(&format!("s{i}"), SensorKind::Symbolic { alphabet: alphabet.clone() })
                .unwrap()
        })
        .collect();

    let mut level1 = Vec::new();
    for (i, &s) in sensors.iter().enumerate() {
        for &sym in &['a', 'b'] {
            let id = h
                .register_detector(&format!("d{i}{sym}"), 1, Rule::SymbolEquals { sensor: s, symbol: sym })
                .unwrap();
            level1.push(id);
        }
    }
    for k in 0..rng.gen_range(0..=2usize) {
        let n_slots = rng.gen_range(1..=3usize);
        let slots: Vec<Slot> = (0..n_slots)
            .map(|_| Slot {
                input: level1[rng.gen_range(0..level1.len())],
                offset_back: rng.gen_range(0..=2u32),
            })
            .collect();
        let max_mismatches = rng.gen_range(0..n_slots as u32 + 1);
        h.register_detector(&format!("w{k}"), 2, Rule::Sequence { slots, max_mismatches })
            .unwrap();
    }

    let frames = rng.gen_range(1..=10usize);
    let rows: Vec<ReadingRow> = (0..frames)
        .map(|_| {
            sensors
                .iter()
                .map(|&s| (s, Value::Symbol(alphabet[rng.gen_range(0..alphabet.len())])))
                .collect()
        })
        .collect();
    (h, rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Exactness: a detector that never fires contributes exactly zero bits.
    #[test]
    fn inactive_detector_registration_is_free(seed in any::<u64>()) {
        let (h, rows) = random_symbol_setup(seed);
        let trace = evaluate_trace(&h, &rows).unwrap();
        let before = relative_complexity(&h, &params(), &trace, AccountingMode::StateOnly).unwrap();

        let mut h2 = h.clone();
        let s = h2.sensors()[0].id;
        // 'z' is outside the alphabet of every stream we generate
        h2.register_detector("never", 1, Rule::SymbolEquals { sensor: s, symbol: 'z' })
            .unwrap();
        let trace2 = evaluate_trace(&h2, &rows).unwrap();
        prop_assert!(trace2.first_activation(DetectorId(h.detectors().len() as u32 + 1)).is_none());
        let after = relative_complexity(&h2, &params(), &trace2, AccountingMode::StateOnly).unwrap();
        prop_assert_eq!(before.per_frame, after.per_frame);
        prop_assert_eq!(before.total_bits, after.total_bits);
    }

    /// Losslessness: the greedy reduction decodes back to the record.
    #[test]
    fn greedy_reduction_is_lossless(seed in any::<u64>()) {
        let (h, rows) = random_symbol_setup(seed);
        let trace = evaluate_trace(&h, &rows).unwrap();
        let sel = reduce_trace(&h, &params(), &trace, ReduceOptions::default());
        let dec = decode_selection(&h, &sel, trace.len()).unwrap();
        prop_assert!(decoded_matches(&params(), &trace, trace.len(), &dec));
    }

    /// Reduction never lengthens any frame relative to coding every active
    /// detector explicitly.
    #[test]
    fn reduction_never_increases_cost(seed in any::<u64>()) {
        let (h, rows) = random_symbol_setup(seed);
        let trace = evaluate_trace(&h, &rows).unwrap();
        let reduced = reduce_trace(&h, &params(), &trace, ReduceOptions::default());
        let baseline = full_selection(&h, &params(), &trace, ReduceOptions::default());
        let r = reduced.per_frame_bits(&h, &params()).unwrap();
        let b = baseline.per_frame_bits(&h, &params()).unwrap();
        for f in 0..trace.len() {
            prop_assert!(r[f] <= b[f], "frame {}: reduced {} > baseline {}", f, r[f], b[f]);
        }
    }

    /// Additivity: the trace total is the sum of per-frame lengths.
    #[test]
    fn description_length_is_additive(seed in any::<u64>()) {
        let (h, rows) = random_symbol_setup(seed);
        let trace = evaluate_trace(&h, &rows).unwrap();
        let report = relative_complexity(&h, &params(), &trace, AccountingMode::StateOnly).unwrap();
        prop_assert_eq!(report.total_bits, report.per_frame.iter().sum::<u64>());
    }

    /// Determinism: identical inputs give identical traces and identical bits.
    #[test]
    fn evaluation_and_coding_are_deterministic(seed in any::<u64>()) {
        let (h, rows) = random_symbol_setup(seed);
        let t1 = evaluate_trace(&h, &rows).unwrap();
        let t2 = evaluate_trace(&h, &rows).unwrap();
        prop_assert_eq!(&t1, &t2);
        let r1 = relative_complexity(&h, &params(), &t1, AccountingMode::StateOnly).unwrap();
        let r2 = relative_complexity(&h, &params(), &t2, AccountingMode::StateOnly).unwrap();
        prop_assert_eq!(r1.per_frame, r2.per_frame);
    }

    /// Random wirings that skip a level are always rejected.
    #[test]
    fn skip_level_wirings_are_rejected(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut h = Hierarchy::new();
        let s = h
            .register_sensor("s", SensorKind::Symbolic { alphabet: vec!['a'] })
            .unwrap();
        let d1 = h
            .register_detector("l1", 1, Rule::SymbolEquals { sensor: s, symbol: 'a' })
            .unwrap();
        let d2 = h
            .register_detector("l2", 2, Rule::AllOf { inputs: vec![d1] })
            .unwrap();
        // any declared level other than input level + 1 must fail
        let target = [d1, d2][rng.gen_range(0..2)];
        let input_level = h.detector(target).unwrap().level;
        let bad_level = loop {
            let l = rng.gen_range(2..=5u32);
            if l != input_level + 1 {
                break l;
            }
        };
        let result = h.register_detector("bad", bad_level, Rule::AllOf { inputs: vec![target] });
        prop_assert!(result.is_err());
    }

    /// Registering extra detectors never changes how the original
    /// repertoire evaluates.
    #[test]
    fn registration_stability(seed in any::<u64>()) {
        let (h, rows) = random_symbol_setup(seed);
        let trace = evaluate_trace(&h, &rows).unwrap();
        let original: Vec<DetectorId> = h.detectors().iter().map(|d| d.id).collect();

        let mut h2 = h.clone();
        let s = h2.sensors()[0].id;
        h2.register_detector("extra1", 1, Rule::SymbolEquals { sensor: s, symbol: 'c' })
            .unwrap();
        h2.register_detector("extra2", 1, Rule::SymbolEquals { sensor: s, symbol: 'a' })
            .unwrap();
        let trace2 = evaluate_trace(&h2, &rows).unwrap();
        for f in 0..trace.len() {
            for &id in &original {
                prop_assert_eq!(trace.is_active(f, id), trace2.is_active(f, id));
            }
        }
    }
}
