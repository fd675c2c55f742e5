//! The run loop: generate data, evaluate the hierarchy, monitor complexity,
//! classify events, and emit the report and trace.

use emergence_core::{
    codec, complexity_trace, evaluate_trace, kd_profile, kd_shift, minimal_description_oracle,
    monitor_trace, recognizers, reduce_redundant, relative_complexity, selection::synthetic_trace,
    AccountingMode, ChangeEntry, CodecParams, DetectorId, EmergenceEvent, ErmParams, ErmPhase,
    Hierarchy, Lattice, Phase, QuantizedConic, ReadingRow, Rule, SensorId, SensorKind, Slot,
    SystemTrace, Value,
};
use emergence_core::recognizers::conic::ConicModel;

use crate::config::{
    AutomatonSpec, DetectorSpec, KdLatticeConfig, MachineKind, PatchTableConfig,
    PointPatternConfig, ScenarioConfig, ScenarioKind, TrajectoryConfig, WordStreamConfig,
};
use crate::error::CliError;
use crate::generators::{gen_patches, gen_points, gen_symbol_stream, gen_trajectory};
use crate::io::{read_lattice, read_patches_csv, read_points_csv};
use crate::report::{
    phase_spans, summarize, DimensionReport, KdReport, PatternReport, PhaseSpan, RunReport,
    Summary, TraceRow,
};

/// Everything a run produces, before any file is written.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: RunReport,
    pub rows: Vec<TraceRow>,
}

/// Floor on model tolerances, absorbing parameter quantization error for
/// unit-scale coordinates.
const MIN_MODEL_TOL: f64 = 0.02;

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunArtifacts, CliError> {
    crate::config::validate(cfg)?;
    let params = CodecParams { precision_bits: cfg.codec.precision_bits };
    match &cfg.scenario {
        ScenarioKind::WordStream(ws) => run_word_stream(cfg, ws, &params),
        ScenarioKind::Trajectory(t) => run_trajectory(cfg, t, &params),
        ScenarioKind::KdLattice(k) => run_kd(cfg, k),
        ScenarioKind::PatchTable(p) => run_patches(cfg, p),
        ScenarioKind::PointPattern(p) => run_points(cfg, p),
    }
}

fn finish(
    cfg: &ScenarioConfig,
    rows: Vec<TraceRow>,
    events: Vec<EmergenceEvent>,
    phases: Vec<PhaseSpan>,
    total_bits: u64,
    kd: Option<KdReport>,
    dimension: Option<DimensionReport>,
    pattern: Option<PatternReport>,
) -> RunArtifacts {
    let mut summary = summarize(&rows, events.len());
    summary.total_bits = total_bits;
    let report = RunReport {
        name: cfg.name.clone(),
        timestamp: crate::report::unix_timestamp(),
        scenario: cfg.clone(),
        summary,
        events,
        phases,
        kd,
        dimension,
        pattern,
    };
    RunArtifacts { report, rows }
}

// ---------------------------------------------------------------------------
// Word streams

fn build_word_hierarchy(
    ws: &WordStreamConfig,
    alphabet: Vec<char>,
) -> Result<(Hierarchy, SensorId), CliError> {
    let mut h = Hierarchy::new();
    let sensor = h
        .register_sensor("stream", SensorKind::Symbolic { alphabet })
        .map_err(CliError::runtime)?;
    for spec in &ws.detectors {
        match spec {
            DetectorSpec::Symbol(s) => {
                h.register_detector(&s.name, 1, Rule::SymbolEquals { sensor, symbol: s.symbol })
                    .map_err(CliError::runtime)?;
            }
            DetectorSpec::Word(w) => {
                let token: Vec<char> = w.token.chars().collect();
                let mut slots = Vec::with_capacity(token.len());
                for (i, c) in token.iter().enumerate() {
                    let input = h
                        .detectors()
                        .iter()
                        .find(|d| matches!(d.rule, Rule::SymbolEquals { symbol, .. } if symbol == *c))
                        .map(|d| d.id)
                        .ok_or_else(|| {
                            CliError::Config(format!("word {:?}: no symbol detector for {c:?}", w.name))
                        })?;
                    slots.push(Slot { input, offset_back: (token.len() - 1 - i) as u32 });
                }
                h.register_detector(
                    &w.name,
                    2,
                    Rule::Sequence { slots, max_mismatches: w.max_mismatches },
                )
                .map_err(CliError::runtime)?;
            }
            DetectorSpec::Automaton(a) => {
                h.register_detector(&a.name, 1, automaton_rule(a, sensor))
                    .map_err(CliError::runtime)?;
            }
        }
    }
    Ok((h, sensor))
}

fn automaton_rule(spec: &AutomatonSpec, sensor: SensorId) -> Rule {
    let machine = match spec.machine {
        MachineKind::AbStar => recognizers::Automaton::FiniteState(recognizers::Dfa::ab_star()),
        MachineKind::AnBn => recognizers::Automaton::Pushdown(recognizers::Pda::a_n_b_n()),
    };
    Rule::Automaton { sensor, machine, window: spec.window }
}

fn run_word_stream(
    cfg: &ScenarioConfig,
    ws: &WordStreamConfig,
    params: &CodecParams,
) -> Result<RunArtifacts, CliError> {
    let stream = gen_symbol_stream(ws, cfg.seed)?;
    let alphabet = crate::config::word_stream_alphabet(ws);
    let (h, sensor) = build_word_hierarchy(ws, alphabet)?;
    let rows: Vec<ReadingRow> = stream.iter().map(|&c| vec![(sensor, Value::Symbol(c))]).collect();
    let trace = evaluate_trace(&h, &rows).map_err(CliError::runtime)?;

    let w = cfg.monitor.window.min(trace.len()).max(1);
    let series = complexity_trace(&h, params, &trace, w).map_err(CliError::runtime)?;
    let events = monitor_trace(&h, params, &trace, w, &[]).map_err(CliError::runtime)?;
    let total = relative_complexity(&h, params, &trace, cfg.accounting)
        .map_err(CliError::runtime)?
        .total_bits;

    let trace_rows = assemble_rows(&trace, &series, &events, None);
    let phases = phase_spans(&vec!["-".to_string(); trace.len()]);
    Ok(finish(cfg, trace_rows, events, phases, total, None, None, None))
}

fn assemble_rows(
    trace: &SystemTrace,
    series: &[u64],
    events: &[EmergenceEvent],
    phases: Option<&[String]>,
) -> Vec<TraceRow> {
    (0..trace.len())
        .map(|f| TraceRow {
            frame: f,
            bits: series[f],
            active_count: trace.state(f).map(|s| s.active.len()).unwrap_or(0),
            phase: phases.map(|p| p[f].clone()).unwrap_or_else(|| "-".to_string()),
            event_flag: u8::from(events.iter().any(|e| e.frame == f)),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Trajectories and the model lifecycle

fn run_trajectory(
    cfg: &ScenarioConfig,
    t: &TrajectoryConfig,
    params: &CodecParams,
) -> Result<RunArtifacts, CliError> {
    if t.frames < t.fit_window {
        return Err(CliError::Config(format!(
            "{}: frames must be >= fit_window",
            cfg.name
        )));
    }
    let points = gen_trajectory(&t.pre, &t.post, t.frames, t.switch_frame, t.noise_sigma, cfg.seed);

    // Initial model: fit the declared family to the opening window.
    let m1 = recognizers::fit_conic(&points[..t.fit_window]).map_err(CliError::runtime)?;
    let tol1 = tolerance_for(&m1, &points[..t.fit_window], cfg.monitor.tol_sigma_factor);

    // Pass 1: replay the lifecycle on raw residuals. Errors are fed as
    // ratios to their model's tolerance, so one threshold of 1 serves both
    // the installed model and the candidate.
    let erm = ErmParams {
        tol: 1.0,
        failure_run: cfg.monitor.failure_run,
        validation_run: cfg.monitor.validation_run,
    };
    let mut state = ErmPhase::start(None);
    let mut phase_log: Vec<Phase> = Vec::with_capacity(points.len());
    let mut t2_entry: Option<usize> = None;
    let mut remodel_frame: Option<usize> = None;
    let mut candidate: Option<(ConicModel<f64>, f64)> = None;
    let mut t2_points: Vec<(f64, f64)> = Vec::new();

    for (f, &p) in points.iter().enumerate() {
        let (err, cand) = match state.phase {
            Phase::T2 => {
                t2_points.push(p);
                if candidate.is_none() && t2_points.len() >= t.fit_window {
                    if let Ok(m2) = recognizers::fit_conic(&t2_points) {
                        let tol2 = tolerance_for(&m2, &t2_points, cfg.monitor.tol_sigma_factor);
                        candidate = Some((m2, tol2));
                    }
                }
                let cand = candidate
                    .as_ref()
                    .map(|(m2, tol2)| (DetectorId(2), m2.residual(p) / tol2));
                (None, cand)
            }
            _ => (Some(m1.residual(p) / tol1), None),
        };
        let before = state.phase;
        state = emergence_core::erm_step(state, err, cand, &erm);
        if before != Phase::T2 && state.phase == Phase::T2 {
            t2_entry = Some(f);
        }
        if before == Phase::T2 && state.phase == Phase::T3 {
            remodel_frame = Some(f);
        }
        phase_log.push(state.phase);
    }

    // Pass 2: the hierarchy as it stood at the end of the run.
    let mut h = Hierarchy::new();
    let sx = h.register_sensor("x", SensorKind::Real).map_err(CliError::runtime)?;
    let sy = h.register_sensor("y", SensorKind::Real).map_err(CliError::runtime)?;
    h.register_detector(
        "M1",
        1,
        Rule::ModelFit { sensors: vec![sx, sy], model: quantized_conic(&m1, tol1, params) },
    )
    .map_err(CliError::runtime)?;

    let mut changes: Vec<ChangeEntry> = Vec::new();
    let mut observable = None;
    if t.add_observable {
        if let Some(f2) = t2_entry {
            let r = h
                .register_sensor_from("range", SensorKind::Real, f2)
                .map_err(CliError::runtime)?;
            changes.push(ChangeEntry::SensorAdded { id: r, frame: f2 });
            observable = Some(r);
        }
    }
    if let (Some(fr), Some((m2, tol2))) = (remodel_frame, &candidate) {
        let mut sensors = vec![sx, sy];
        if let Some(r) = observable {
            sensors.push(r);
        }
        let id = h
            .register_detector(
                "M2",
                1,
                Rule::ModelFit { sensors, model: quantized_conic(m2, *tol2, params) },
            )
            .map_err(CliError::runtime)?;
        changes.push(ChangeEntry::DetectorAdded { id, frame: fr });
    }

    let rows: Vec<ReadingRow> = points
        .iter()
        .map(|&(x, y)| {
            let mut row = vec![(sx, Value::Real(x)), (sy, Value::Real(y))];
            if let Some(r) = observable {
                row.push((r, Value::Real((x * x + y * y).sqrt())));
            }
            row
        })
        .collect();
    let trace = evaluate_trace(&h, &rows).map_err(CliError::runtime)?;

    let w = cfg.monitor.window.min(trace.len()).max(1);
    let series = complexity_trace(&h, params, &trace, w).map_err(CliError::runtime)?;
    let events = monitor_trace(&h, params, &trace, w, &changes).map_err(CliError::runtime)?;
    let total = relative_complexity(&h, params, &trace, cfg.accounting)
        .map_err(CliError::runtime)?
        .total_bits;

    let phase_names: Vec<String> = phase_log.iter().map(|p| p.to_string()).collect();
    let trace_rows = assemble_rows(&trace, &series, &events, Some(&phase_names));
    let spans = phase_spans(&phase_names);
    Ok(finish(cfg, trace_rows, events, spans, total, None, None, None))
}

/// Tolerance as a multiple of the RMS residual over the fit window, floored
/// against quantization error.
fn tolerance_for(model: &ConicModel<f64>, points: &[(f64, f64)], factor: f64) -> f64 {
    let mean_sq = points
        .iter()
        .map(|&p| model.residual(p).powi(2))
        .sum::<f64>()
        / points.len() as f64;
    (factor * mean_sq.sqrt()).max(MIN_MODEL_TOL)
}

fn quantized_conic(model: &ConicModel<f64>, tol: f64, params: &CodecParams) -> QuantizedConic {
    let mut q_tol = params.quantize(tol);
    if q_tol.raw < 1 {
        q_tol.raw = 1;
    }
    QuantizedConic { coeffs: model.coeffs.map(|c| params.quantize(c)), tol: q_tol }
}

// ---------------------------------------------------------------------------
// Kd lattices

fn run_kd(cfg: &ScenarioConfig, k: &KdLatticeConfig) -> Result<RunArtifacts, CliError> {
    let lattice = match (&k.lattice_file, &k.pattern) {
        (Some(path), None) => read_lattice(path)?,
        (None, Some(p)) => build_lattice(p),
        _ => unreachable!("validated"),
    };
    let profile = kd_profile(&lattice, &k.diameters).map_err(CliError::runtime)?;
    let shift = if profile.entries.len() >= 2 {
        Some(kd_shift(&profile).map_err(CliError::runtime)?)
    } else {
        None
    };
    let rows: Vec<TraceRow> = profile
        .entries
        .iter()
        .map(|&(d, bits)| TraceRow {
            frame: d,
            bits,
            active_count: 0,
            phase: "-".to_string(),
            event_flag: u8::from(shift == Some(d)),
        })
        .collect();
    let total = rows.iter().map(|r| r.bits).sum();
    let kd = KdReport { profile: profile.entries.clone(), shift_diameter: shift };
    Ok(finish(cfg, rows, vec![], vec![], total, Some(kd), None, None))
}

fn build_lattice(pattern: &crate::config::LatticePattern) -> Lattice {
    match pattern {
        crate::config::LatticePattern::Checkerboard { rows, cols } => {
            Lattice::checkerboard(*rows, *cols)
        }
        crate::config::LatticePattern::Filled { rows, cols, value } => {
            Lattice::filled(*rows, *cols, *value)
        }
    }
}

// ---------------------------------------------------------------------------
// Patch tables and point patterns

fn run_patches(cfg: &ScenarioConfig, p: &PatchTableConfig) -> Result<RunArtifacts, CliError> {
    let patches = match (&p.csv, &p.generate) {
        (Some(path), None) => read_patches_csv(path)?,
        (None, Some(g)) => gen_patches(g, cfg.seed),
        _ => unreachable!("validated"),
    };
    let single = recognizers::fractal_dimension(&patches).map_err(CliError::runtime)?;
    let shift = recognizers::dimension_shift(&patches).map_err(CliError::runtime)?;
    let dimension = DimensionReport {
        single_dimension: single.dimension,
        single_sse: single.sse,
        breakpoint_area: shift.breakpoint_area,
        dimension_low: shift.low.dimension,
        dimension_high: shift.high.dimension,
        split_sse: shift.split_sse,
        sse_gain: shift.sse_gain(),
    };
    Ok(finish(cfg, vec![], vec![], vec![], 0, None, Some(dimension), None))
}

fn run_points(cfg: &ScenarioConfig, p: &PointPatternConfig) -> Result<RunArtifacts, CliError> {
    let points = match (&p.csv, &p.generate) {
        (Some(path), None) => read_points_csv(path)?,
        (None, Some(g)) => gen_points(g, p.window, cfg.seed),
        _ => unreachable!("validated"),
    };
    let stats = recognizers::pattern_stats(
        &points,
        recognizers::Window { width: p.window[0], height: p.window[1] },
        p.quadrat_size,
        recognizers::PatternThresholds {
            regularity_factor: p.regularity_factor,
            vmr_threshold: p.vmr_threshold,
        },
    )
    .map_err(CliError::runtime)?;
    let pattern = PatternReport {
        mean_nn_distance: stats.mean_nn_distance,
        csr_nn_distance: stats.csr_nn_distance,
        nn_ratio: stats.nn_ratio,
        quadrat_vmr: stats.quadrat_vmr,
        regular: stats.regular,
        aggregated: stats.aggregated,
    };
    Ok(finish(cfg, vec![], vec![], vec![], 0, None, None, Some(pattern)))
}

// ---------------------------------------------------------------------------
// The oracle audit

#[derive(Debug, Clone, PartialEq)]
pub struct OracleAudit {
    pub frames_audited: usize,
    pub frames_equal: usize,
    pub greedy_bits: u64,
    pub oracle_bits: u64,
    pub skipped_too_large: usize,
}

/// Compare the greedy per-state reduction against the exhaustive oracle on
/// every frame of the scenario's trace (isolated-state semantics for both).
pub fn oracle_audit(cfg: &ScenarioConfig) -> Result<OracleAudit, CliError> {
    crate::config::validate(cfg)?;
    let params = CodecParams { precision_bits: cfg.codec.precision_bits };
    let (h, trace) = match &cfg.scenario {
        ScenarioKind::WordStream(ws) => {
            let stream = gen_symbol_stream(ws, cfg.seed)?;
            let alphabet = crate::config::word_stream_alphabet(ws);
            let (h, sensor) = build_word_hierarchy(ws, alphabet)?;
            let rows: Vec<ReadingRow> =
                stream.iter().map(|&c| vec![(sensor, Value::Symbol(c))]).collect();
            let trace = evaluate_trace(&h, &rows).map_err(CliError::runtime)?;
            (h, trace)
        }
        _ => {
            return Err(CliError::Config(
                "the oracle audit applies to word_stream scenarios".into(),
            ))
        }
    };

    let mut audit = OracleAudit {
        frames_audited: 0,
        frames_equal: 0,
        greedy_bits: 0,
        oracle_bits: 0,
        skipped_too_large: 0,
    };
    for f in 0..trace.len() {
        let state = trace.state(f).unwrap();
        let isolated = synthetic_trace(&h, std::slice::from_ref(state));
        let greedy_atoms = reduce_redundant(&h, &params, &isolated, 0);
        let greedy_bits = codec::frame_bits(&h, &params, &greedy_atoms).map_err(CliError::runtime)?;
        match minimal_description_oracle(&h, &params, state) {
            Ok((_, oracle_bits)) => {
                audit.frames_audited += 1;
                audit.greedy_bits += greedy_bits;
                audit.oracle_bits += oracle_bits;
                if greedy_bits == oracle_bits {
                    audit.frames_equal += 1;
                }
                if greedy_bits < oracle_bits {
                    return Err(CliError::Runtime(format!(
                        "frame {f}: greedy {greedy_bits} beat the oracle {oracle_bits}"
                    )));
                }
            }
            Err(emergence_core::ComplexityError::TooLarge(..)) => audit.skipped_too_large += 1,
            Err(e) => return Err(CliError::runtime(e)),
        }
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{OutputOptions, SymbolSpec, WordSpec};

    pub(crate) fn word_stream_cfg() -> ScenarioConfig {
        ScenarioConfig {
            name: "words".into(),
            seed: 7,
            scenario: ScenarioKind::WordStream(WordStreamConfig {
                tokens: vec!["ab".into()],
                repeats: 4,
                noise_rate: 0.0,
                alphabet: None,
                detectors: vec![
                    DetectorSpec::Symbol(SymbolSpec { name: "Da".into(), symbol: 'a' }),
                    DetectorSpec::Symbol(SymbolSpec { name: "Db".into(), symbol: 'b' }),
                    DetectorSpec::Word(WordSpec { name: "Dab".into(), token: "ab".into(), max_mismatches: 0 }),
                ],
            }),
            codec: Default::default(),
            monitor: crate::config::MonitorOptions { window: 8, ..Default::default() },
            accounting: AccountingMode::StateOnly,
            output: OutputOptions::default(),
        }
    }

    #[test]
    fn word_stream_run_reports_one_event_with_pinned_bits() {
        let artifacts = run_scenario(&word_stream_cfg()).unwrap();
        let events = &artifacts.report.events;
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].detector_name, "Dab");
        assert_eq!(events[0].bits_before, 40);
        assert_eq!(events[0].bits_after, 28);
        assert_eq!(events[0].kind, emergence_core::EventKind::Ehs);
        assert_eq!(artifacts.rows.len(), 8);
        assert_eq!(artifacts.rows[1].event_flag, 1);
    }

    #[test]
    fn oracle_audit_agrees_on_the_word_stream() {
        let audit = oracle_audit(&word_stream_cfg()).unwrap();
        assert_eq!(audit.frames_audited, 8);
        assert!(audit.greedy_bits >= audit.oracle_bits);
    }
}
