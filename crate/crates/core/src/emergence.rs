//! Emergence monitoring.
//!
//! A detector's activation normally lengthens the description; emergence is
//! the opposite: the windowed description length strictly drops because the
//! newly active detector makes lower-level activity redundant. The check
//! compares the same window of frames described with and without the
//! detector in the repertoire. A side audit verifies exactness at the
//! baseline: while the detector is inactive, carrying it changes nothing.
//!
//! The model lifecycle is a three-period machine: predictions hold (T1),
//! the model raises its flag and description falls back to raw observables
//! (T2), and a new model restores a concise description (T3). Whether the
//! restoration counts as syntactic or semantic depends on whether a new
//! observable entered the record first.

use serde::{Deserialize, Serialize};

use crate::codec::CodecParams;
use crate::complexity::{relative_complexity_with, AccountingMode};
use crate::error::EmergenceError;
use crate::hierarchy::{DetectorId, Hierarchy, SensorId};
use crate::selection::ReduceOptions;
use crate::trace::SystemTrace;

/// Why the description got shorter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    /// A higher-level structure surfaced through a pre-existing detector.
    Ehs,
    /// A new model over unchanged observables restored concision.
    ErmSyntactic,
    /// A new observable plus a new model restored concision.
    ErmSemantic,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventKind::Ehs => write!(f, "EHS"),
            EventKind::ErmSyntactic => write!(f, "ERM-syntactic"),
            EventKind::ErmSemantic => write!(f, "ERM-semantic"),
        }
    }
}

/// A strict drop in windowed relative complexity caused by an activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergenceEvent {
    /// Frame at which the detector became active.
    pub frame: usize,
    pub detector: DetectorId,
    pub detector_name: String,
    /// Window bits without the detector in the describing repertoire.
    pub bits_before: u64,
    /// Window bits with it; strictly smaller.
    pub bits_after: u64,
    /// The compared frame window (inclusive).
    pub window_start: usize,
    pub window_end: usize,
    pub kind: EventKind,
}

/// Repertoire and observable changes during a monitoring run, used to
/// classify events. Replayable: classification is a pure function of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChangeEntry {
    DetectorAdded { id: DetectorId, frame: usize },
    SensorAdded { id: SensorId, frame: usize },
}

/// EHS if the detector predates the run; otherwise ERM, semantic when some
/// observable was introduced before the activation.
pub fn classify_event(event: &EmergenceEvent, changes: &[ChangeEntry]) -> EventKind {
    let added_during_run = changes
        .iter()
        .any(|c| matches!(c, ChangeEntry::DetectorAdded { id, .. } if *id == event.detector));
    if !added_during_run {
        return EventKind::Ehs;
    }
    let new_observable = changes
        .iter()
        .any(|c| matches!(c, ChangeEntry::SensorAdded { frame, .. } if *frame <= event.frame));
    if new_observable {
        EventKind::ErmSemantic
    } else {
        EventKind::ErmSyntactic
    }
}

/// Compare the record around an activation of `k` described with and
/// without `k`. Emits an event iff the bits strictly decrease.
///
/// `t` is the baseline frame (`k` inactive on the window ending there) and
/// `t + dt` the activation frame. The compared window is the `w` frames
/// ending at `min(len-1, t+dt+w-1)`, clamped to the trace.
pub fn check_emergence(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    k: DetectorId,
    t: usize,
    dt: usize,
    w: usize,
) -> Result<Option<EmergenceEvent>, EmergenceError> {
    if h.has_dependents(k) {
        return Err(EmergenceError::DependentsExist(k.0));
    }
    let len = trace.len();
    if w == 0 || w > len {
        return Err(EmergenceError::WindowTooLong { window: w.max(1), frames: len });
    }
    let f = t + dt;
    if dt == 0 || f >= len {
        return Err(EmergenceError::BaselineViolation(format!(
            "activation frame {f} outside trace of {len} frames"
        )));
    }
    if !trace.is_active(f, k) {
        return Err(EmergenceError::BaselineViolation(format!(
            "detector {k} inactive at frame {f}"
        )));
    }
    let baseline_start = (t + 1).saturating_sub(w);
    for frame in baseline_start..=t {
        if trace.is_active(frame, k) {
            return Err(EmergenceError::BaselineViolation(format!(
                "detector {k} already active at frame {frame}"
            )));
        }
    }

    // Exactness audit at the baseline: on the causal prefix ending at t,
    // where k is inactive throughout, carrying k in the account changes
    // nothing. This holds bit for bit because atoms are coded by
    // registration index, never by repertoire size.
    let audit_with = window_bits(h, params, trace, baseline_start, t, Some(t + 1), None);
    let audit_without = window_bits(h, params, trace, baseline_start, t, Some(t + 1), Some(k));
    assert_eq!(
        audit_with, audit_without,
        "baseline exactness violated for inactive detector {k}"
    );

    let end = (f + w - 1).min(len - 1);
    let start = (end + 1).saturating_sub(w);
    let bits_after = window_bits(h, params, trace, start, end, None, None);
    let bits_before = window_bits(h, params, trace, start, end, None, Some(k));

    if bits_after < bits_before {
        Ok(Some(EmergenceEvent {
            frame: f,
            detector: k,
            detector_name: h.detector(k).map(|d| d.name.clone()).unwrap_or_default(),
            bits_before,
            bits_after,
            window_start: start,
            window_end: end,
            kind: EventKind::Ehs,
        }))
    } else {
        Ok(None)
    }
}

fn window_bits(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    start: usize,
    end: usize,
    scope: Option<usize>,
    exclude: Option<DetectorId>,
) -> u64 {
    let report = relative_complexity_with(
        h,
        params,
        trace,
        AccountingMode::StateOnly,
        ReduceOptions { scope, exclude },
    )
    .expect("state-only accounting cannot fail on an evaluated trace");
    report.per_frame[start..=end.min(report.per_frame.len() - 1)]
        .iter()
        .sum()
}

/// Sliding-window relative complexity: at each frame, the bits of the up to
/// `w` most recent frames under the globally reduced description.
pub fn complexity_trace(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    w: usize,
) -> Result<Vec<u64>, EmergenceError> {
    if w == 0 || w > trace.len() {
        return Err(EmergenceError::WindowTooLong { window: w.max(1), frames: trace.len() });
    }
    let report = relative_complexity_with(
        h,
        params,
        trace,
        AccountingMode::StateOnly,
        ReduceOptions::default(),
    )
    .expect("state-only accounting cannot fail on an evaluated trace");
    let per_frame = &report.per_frame;
    let mut out = Vec::with_capacity(per_frame.len());
    let mut acc: u64 = 0;
    for f in 0..per_frame.len() {
        acc += per_frame[f];
        if f >= w {
            acc -= per_frame[f - w];
        }
        out.push(acc);
    }
    Ok(out)
}

/// Run the emergence check at the first activation of every detector that
/// nothing reads from, classify against the change log, and collect events
/// in frame order.
pub fn monitor_trace(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    w: usize,
    changes: &[ChangeEntry],
) -> Result<Vec<EmergenceEvent>, EmergenceError> {
    let mut events = Vec::new();
    if trace.is_empty() {
        return Ok(events);
    }
    let w = w.min(trace.len());
    for d in h.detectors() {
        if h.has_dependents(d.id) {
            continue;
        }
        let Some(f) = trace.first_activation(d.id) else {
            continue;
        };
        if f == 0 {
            continue; // active from the start: no baseline to compare against
        }
        if let Some(mut event) = check_emergence(h, params, trace, d.id, f - 1, 1, w)? {
            event.kind = classify_event(&event, changes);
            events.push(event);
        }
    }
    events.sort_by_key(|e| (e.frame, e.detector));
    Ok(events)
}

// ---------------------------------------------------------------------------
// The model lifecycle (T1 predict, T2 bifurcate, T3 re-model)

/// Lifecycle period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    T1,
    T2,
    T3,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::T1 => write!(f, "T1"),
            Phase::T2 => write!(f, "T2"),
            Phase::T3 => write!(f, "T3"),
        }
    }
}

/// Monitor state for one modeled system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmPhase {
    pub phase: Phase,
    /// The detector standing in for the current model, if any.
    pub model: Option<DetectorId>,
    pub consecutive_failures: u32,
    pub consecutive_valid: u32,
}

impl ErmPhase {
    pub fn start(model: Option<DetectorId>) -> Self {
        Self { phase: Phase::T1, model, consecutive_failures: 0, consecutive_valid: 0 }
    }
}

/// Thresholds for the lifecycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErmParams {
    /// Prediction tolerance.
    pub tol: f64,
    /// Consecutive failures before the bifurcation flag is raised (r).
    pub failure_run: u32,
    /// Consecutive in-tolerance frames a candidate needs to validate (v).
    pub validation_run: u32,
}

/// One step of the lifecycle.
///
/// In T1 an error within tolerance holds; `failure_run` consecutive misses
/// raise the flag and enter T2, where the description falls back to literal
/// observables. In T2 a candidate model validating for `validation_run`
/// consecutive frames enters T3, which resets to T1 with the candidate
/// installed on the next step.
pub fn erm_step(
    mut state: ErmPhase,
    error: Option<f64>,
    candidate: Option<(DetectorId, f64)>,
    params: &ErmParams,
) -> ErmPhase {
    match state.phase {
        Phase::T1 | Phase::T3 => {
            if state.phase == Phase::T3 {
                state.phase = Phase::T1;
            }
            match error {
                Some(e) if e <= params.tol => {
                    state.consecutive_failures = 0;
                }
                _ => {
                    state.consecutive_failures += 1;
                    if state.consecutive_failures >= params.failure_run {
                        state.phase = Phase::T2;
                        state.consecutive_valid = 0;
                    }
                }
            }
        }
        Phase::T2 => match candidate {
            Some((id, e)) if e <= params.tol => {
                state.consecutive_valid += 1;
                if state.consecutive_valid >= params.validation_run {
                    state.phase = Phase::T3;
                    state.model = Some(id);
                    state.consecutive_failures = 0;
                }
            }
            _ => {
                state.consecutive_valid = 0;
            }
        },
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::SensorKind;
    use crate::rule::{Rule, Slot};
    use crate::trace::{evaluate_trace, ReadingRow, Value};

    fn params() -> CodecParams {
        CodecParams::default()
    }

    fn word_hierarchy() -> (Hierarchy, SensorId) {
        let mut h = Hierarchy::new();
        let s = h
            .register_sensor("stream", SensorKind::Symbolic { alphabet: vec!['a', 'b'] })
            .unwrap();
        let da = h
            .register_detector("Da", 1, Rule::SymbolEquals { sensor: s, symbol: 'a' })
            .unwrap();
        let db = h
            .register_detector("Db", 1, Rule::SymbolEquals { sensor: s, symbol: 'b' })
            .unwrap();
        h.register_detector(
            "Dab",
            2,
            Rule::Sequence {
                slots: vec![
                    Slot { input: da, offset_back: 1 },
                    Slot { input: db, offset_back: 0 },
                ],
                max_mismatches: 0,
            },
        )
        .unwrap();
        (h, s)
    }

    fn rows(s: SensorId, text: &str) -> Vec<ReadingRow> {
        text.chars().map(|c| vec![(s, Value::Symbol(c))]).collect()
    }

    #[test]
    fn word_stream_event_drops_forty_to_twenty_eight() {
        let (h, s) = word_hierarchy();
        let trace = evaluate_trace(&h, &rows(s, "abababab")).unwrap();
        let event = check_emergence(&h, &params(), &trace, DetectorId(3), 0, 1, 8)
            .unwrap()
            .expect("the word detector's activation is an emergence event");
        assert_eq!(event.bits_before, 40);
        assert_eq!(event.bits_after, 28);
        assert_eq!((event.window_start, event.window_end), (0, 7));
    }

    #[test]
    fn covering_nothing_is_not_emergence() {
        // A tolerant detector firing over one cheap constituent adds its own
        // atom plus a correction: the description gets longer, not shorter.
        let mut h = Hierarchy::new();
        let s = h
            .register_sensor("stream", SensorKind::Symbolic { alphabet: vec!['a', 'b', 'c'] })
            .unwrap();
        let da = h
            .register_detector("Da", 1, Rule::SymbolEquals { sensor: s, symbol: 'a' })
            .unwrap();
        let db = h
            .register_detector("Db", 1, Rule::SymbolEquals { sensor: s, symbol: 'b' })
            .unwrap();
        h.register_detector(
            "loose",
            2,
            Rule::Sequence {
                slots: vec![
                    Slot { input: da, offset_back: 1 },
                    Slot { input: db, offset_back: 1 },
                ],
                max_mismatches: 1,
            },
        )
        .unwrap();
        // "accc": loose fires only at frame 1 (Da hit, Db missed); the
        // correction it drags in costs more than the one bit Da's atom saved.
        let trace = evaluate_trace(&h, &rows(s, "accc")).unwrap();
        assert_eq!(trace.first_activation(DetectorId(3)), Some(1));
        let event = check_emergence(&h, &params(), &trace, DetectorId(3), 0, 1, 4).unwrap();
        assert!(event.is_none(), "complexity rises; no event");
    }

    #[test]
    fn baseline_violations_surface() {
        let (h, s) = word_hierarchy();
        let trace = evaluate_trace(&h, &rows(s, "abababab")).unwrap();
        // Da active at the baseline frame itself
        assert!(matches!(
            check_emergence(&h, &params(), &trace, DetectorId(3), 1, 2, 2),
            Err(EmergenceError::BaselineViolation(_))
        ));
        // inactive at t+dt
        let quiet = evaluate_trace(&h, &rows(s, "aaaa")).unwrap();
        assert!(matches!(
            check_emergence(&h, &params(), &quiet, DetectorId(3), 0, 1, 2),
            Err(EmergenceError::BaselineViolation(_))
        ));
    }

    #[test]
    fn monitor_finds_exactly_one_event_on_the_word_stream() {
        let (h, s) = word_hierarchy();
        let trace = evaluate_trace(&h, &rows(s, "abababab")).unwrap();
        let events = monitor_trace(&h, &params(), &trace, 8, &[]).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].detector, DetectorId(3));
        assert_eq!(events[0].kind, EventKind::Ehs);
    }

    #[test]
    fn classification_follows_the_change_log() {
        let event = EmergenceEvent {
            frame: 70,
            detector: DetectorId(2),
            detector_name: "M2".into(),
            bits_before: 100,
            bits_after: 10,
            window_start: 60,
            window_end: 75,
            kind: EventKind::Ehs,
        };
        assert_eq!(classify_event(&event, &[]), EventKind::Ehs);
        let added = ChangeEntry::DetectorAdded { id: DetectorId(2), frame: 65 };
        assert_eq!(classify_event(&event, &[added.clone()]), EventKind::ErmSyntactic);
        let with_sensor = [
            added,
            ChangeEntry::SensorAdded { id: SensorId(3), frame: 55 },
        ];
        assert_eq!(classify_event(&event, &with_sensor), EventKind::ErmSemantic);
    }

    #[test]
    fn erm_steps_match_thresholds() {
        let p = ErmParams { tol: 0.1, failure_run: 3, validation_run: 5 };
        let s0 = ErmPhase::start(Some(DetectorId(1)));

        let s = erm_step(s0.clone(), Some(0.0), None, &p);
        assert_eq!(s.phase, Phase::T1);
        assert_eq!(s.consecutive_failures, 0);

        let mut s = s0;
        for _ in 0..3 {
            s = erm_step(s, Some(1.0), None, &p);
        }
        assert_eq!(s.phase, Phase::T2, "three consecutive misses bifurcate");

        let candidate = DetectorId(2);
        for _ in 0..5 {
            s = erm_step(s, None, Some((candidate, 0.0)), &p);
        }
        assert_eq!(s.phase, Phase::T3, "five valid frames re-model");
        assert_eq!(s.model, Some(candidate));
        s = erm_step(s, Some(0.0), None, &p);
        assert_eq!(s.phase, Phase::T1, "T3 resets to T1");
    }

    #[test]
    fn complexity_trace_flat_on_constant_regime_and_window_checked() {
        let (h, s) = word_hierarchy();
        let trace = evaluate_trace(&h, &rows(s, "abababababab")).unwrap();
        let series = complexity_trace(&h, &params(), &trace, 4).unwrap();
        // after warmup, every 4-frame window costs the same
        let tail = &series[4..];
        assert!(tail.windows(2).all(|w| w[0] == w[1]), "flat series: {series:?}");

        assert!(matches!(
            complexity_trace(&h, &params(), &trace, 13),
            Err(EmergenceError::WindowTooLong { .. })
        ));
    }
}
