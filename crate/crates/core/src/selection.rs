//! Redundancy elimination, description decoding, and the exhaustive
//! minimal-description oracle.
//!
//! When a detector is active, the active lower-level detectors wired to it
//! are implied by its recognition template and can be omitted from the
//! description; mismatched constituents of tolerant detectors remain as
//! residual corrections. The greedy reduction applies this canonically:
//! every active detector not covered by an ancestor keeps its atom, every
//! covered constituent is dropped, and every mismatched template slot of an
//! active detector is patched by a mandatory correction. The oracle searches
//! all admissible lossless selections (including deriving a detector by
//! re-evaluating its rule from coded constituents) and returns a minimum.

use std::collections::{BTreeMap, BTreeSet};

use crate::codec::{self, AtomKind, CodecParams, Quantized, SymbolPayload};
use crate::error::{CodecError, ComplexityError};
use crate::hierarchy::{DetectorId, Hierarchy, SensorId};
use crate::rule::Rule;
use crate::trace::{ActivationState, SystemTrace, Value};

/// An active detector instance: (frame, id).
pub type Instance = (usize, DetectorId);

/// Per-frame atom lists covering frames `0..frames.len()` of a trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Selection {
    pub frames: Vec<Vec<AtomKind>>,
}

impl Selection {
    /// Total bits: per frame, the count code plus the atoms' lengths.
    pub fn total_bits(&self, h: &Hierarchy, params: &CodecParams) -> Result<u64, CodecError> {
        let mut total = 0;
        for atoms in &self.frames {
            total += codec::frame_bits(h, params, atoms)?;
        }
        Ok(total)
    }

    pub fn per_frame_bits(&self, h: &Hierarchy, params: &CodecParams) -> Result<Vec<u64>, CodecError> {
        self.frames
            .iter()
            .map(|atoms| codec::frame_bits(h, params, atoms))
            .collect()
    }

    /// Distinct detectors appearing as activation atoms.
    pub fn used_detectors(&self) -> BTreeSet<DetectorId> {
        self.frames
            .iter()
            .flatten()
            .filter_map(|a| match a {
                AtomKind::Activation { id } => Some(*id),
                _ => None,
            })
            .collect()
    }
}

/// Options for building a selection over a trace.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReduceOptions {
    /// Describe only frames `0..scope` (default: the whole trace). Coverage
    /// never flows in from frames outside the scope, which gives the causal
    /// view needed for baseline comparisons.
    pub scope: Option<usize>,
    /// Describe the record as seen through the repertoire minus this
    /// detector: its activations are invisible and cover nothing. Only
    /// meaningful for detectors without dependents.
    pub exclude: Option<DetectorId>,
}

/// Greedy canonical reduction over a trace.
pub fn reduce_trace(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    opts: ReduceOptions,
) -> Selection {
    let scope = opts.scope.unwrap_or(trace.len()).min(trace.len());
    let known = known_instances(trace, scope, opts.exclude);
    let covered = coverage_of(h, trace, &known);
    let atoms: BTreeSet<Instance> = known.difference(&covered).copied().collect();
    assemble(h, params, trace, scope, &known, &atoms, opts.exclude)
}

/// The unreduced baseline: every active detector keeps its atom. Corrections
/// and literals are identical to the reduced form, so reduction can only
/// remove atoms.
pub fn full_selection(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    opts: ReduceOptions,
) -> Selection {
    let scope = opts.scope.unwrap_or(trace.len()).min(trace.len());
    let known = known_instances(trace, scope, opts.exclude);
    assemble(h, params, trace, scope, &known, &known, opts.exclude)
}

/// Greedy per-frame selection: the reduced description of one frame in its
/// trace context.
pub fn reduce_redundant(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    frame: usize,
) -> Vec<AtomKind> {
    let mut sel = reduce_trace(h, params, trace, ReduceOptions::default());
    if frame < sel.frames.len() {
        sel.frames.swap_remove(frame)
    } else {
        Vec::new()
    }
}

fn known_instances(
    trace: &SystemTrace,
    scope: usize,
    exclude: Option<DetectorId>,
) -> BTreeSet<Instance> {
    let mut known = BTreeSet::new();
    for state in &trace.states()[..scope] {
        for &id in &state.active {
            if Some(id) != exclude {
                known.insert((state.frame, id));
            }
        }
    }
    known
}

/// Instances implied by the templates of known-active detectors: for each
/// known instance, every matched slot's input is covered.
fn coverage_of(
    h: &Hierarchy,
    trace: &SystemTrace,
    known: &BTreeSet<Instance>,
) -> BTreeSet<Instance> {
    let mut covered = BTreeSet::new();
    for &(t, id) in known {
        let d = h.detector(id).expect("known instances are registered");
        for slot in d.rule.template() {
            if let Some(tf) = t.checked_sub(slot.offset_back as usize) {
                if trace.is_active(tf, slot.input) {
                    covered.insert((tf, slot.input));
                }
            }
        }
    }
    covered
}

/// Build the atom lists: activation atoms for `atoms`, mandatory corrections
/// for every mismatched template slot of a known instance, and literals for
/// residual readings not superseded by a correction payload.
fn assemble(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    scope: usize,
    known: &BTreeSet<Instance>,
    atoms: &BTreeSet<Instance>,
    exclude: Option<DetectorId>,
) -> Selection {
    // (frame, owner, slot 1-based) -> payload
    let mut corrections: BTreeMap<(usize, DetectorId, u32), Option<SymbolPayload>> = BTreeMap::new();
    let mut superseded: BTreeSet<(usize, SensorId)> = BTreeSet::new();

    for &(t, id) in known {
        let d = h.detector(id).expect("known instances are registered");
        for (i, slot) in d.rule.template().iter().enumerate() {
            let position = i as u32 + 1;
            let slot_frame = t.checked_sub(slot.offset_back as usize);
            let matched = slot_frame
                .map(|tf| trace.is_active(tf, slot.input))
                .unwrap_or(false);
            if matched {
                continue;
            }
            let payload = slot_frame.and_then(|tf| {
                let input = h.detector(slot.input)?;
                let (sensor, _) = input.rule.implied_symbol()?;
                match trace.reading(tf, sensor) {
                    Some(Value::Symbol(c)) => {
                        superseded.insert((tf, sensor));
                        Some(SymbolPayload { sensor, symbol: *c })
                    }
                    _ => None,
                }
            });
            corrections.insert((t, id, position), payload);
        }
    }

    let mut frames: Vec<Vec<AtomKind>> = Vec::with_capacity(scope);
    for f in 0..scope {
        let mut list: Vec<AtomKind> = Vec::new();
        let state = trace.state(f).expect("frame in scope");
        for &id in &state.active {
            if atoms.contains(&(f, id)) {
                list.push(AtomKind::Activation { id });
            }
        }
        for ((_, owner, slot), payload) in corrections.range((f, DetectorId(0), 0)..=(f, DetectorId(u32::MAX), u32::MAX)) {
            list.push(AtomKind::Correction { owner: *owner, slot: *slot, payload: *payload });
        }
        for (sensor, value) in residual_for_frame(h, trace, f, exclude) {
            if superseded.contains(&(f, sensor)) {
                continue;
            }
            match value {
                Value::Symbol(symbol) => list.push(AtomKind::LiteralSymbol { sensor, symbol }),
                Value::Real(v) => list.push(AtomKind::LiteralReal { sensor, value: params.quantize(v) }),
            }
        }
        frames.push(list);
    }
    Selection { frames }
}

/// Residual readings of a frame under a possibly restricted repertoire:
/// readings explained by an excluded detector become residual again.
fn residual_for_frame(
    h: &Hierarchy,
    trace: &SystemTrace,
    frame: usize,
    exclude: Option<DetectorId>,
) -> Vec<(SensorId, Value)> {
    let state = trace.state(frame).expect("frame exists");
    let Some(excluded) = exclude else {
        return state.residual.clone();
    };
    let mut explained: BTreeSet<SensorId> = BTreeSet::new();
    for &id in &state.active {
        if id == excluded {
            continue;
        }
        let d = h.detector(id).unwrap();
        if d.level == 1 {
            explained.extend(d.rule.explained_sensors());
        }
    }
    let mut out = Vec::new();
    for sensor in h.sensors() {
        if !sensor.is_live(frame) || explained.contains(&sensor.id) {
            continue;
        }
        if let Some(v) = trace.reading(frame, sensor.id) {
            out.push((sensor.id, *v));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Decoding

/// A reconstructed reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecodedValue {
    Symbol(char),
    Real(Quantized),
    /// Accounted for by an active model detector; the analog value is not
    /// reconstructed, only described.
    Described,
}

/// The reconstruction of a trace from a selection.
#[derive(Debug, Clone, Default)]
pub struct Decoded {
    pub active: Vec<BTreeSet<DetectorId>>,
    pub readings: Vec<BTreeMap<SensorId, DecodedValue>>,
    /// Reconstructed readings not explained by any reconstructed active
    /// level-1 detector: the residual record.
    pub residual: Vec<BTreeMap<SensorId, DecodedValue>>,
}

/// Decode a selection: explicit atoms, then the implication closure of known
/// activations (with corrections overriding mismatched slots), then
/// re-evaluation of every remaining detector bottom-up from reconstructed
/// data. Fails if a template slot walks out of range uncorrected.
pub fn decode_selection(
    h: &Hierarchy,
    sel: &Selection,
    n_frames: usize,
) -> Result<Decoded, CodecError> {
    let mut dec = Decoded {
        active: vec![BTreeSet::new(); n_frames],
        readings: vec![BTreeMap::new(); n_frames],
        residual: vec![BTreeMap::new(); n_frames],
    };
    let mut corrections: BTreeMap<(usize, DetectorId, u32), Option<SymbolPayload>> = BTreeMap::new();

    let mut worklist: Vec<Instance> = Vec::new();
    for (f, atoms) in sel.frames.iter().enumerate() {
        for atom in atoms {
            match atom {
                AtomKind::Activation { id } => {
                    if h.detector(*id).is_none() {
                        return Err(CodecError::UnknownId(id.0));
                    }
                    if dec.active[f].insert(*id) {
                        worklist.push((f, *id));
                    }
                }
                AtomKind::Correction { owner, slot, payload } => {
                    corrections.insert((f, *owner, *slot), *payload);
                    if let Some(p) = payload {
                        // the payload's content belongs to the slot's frame
                        let off = slot_offset(h, *owner, *slot)?;
                        if let Some(tf) = f.checked_sub(off as usize) {
                            dec.readings[tf].insert(p.sensor, DecodedValue::Symbol(p.symbol));
                        }
                    }
                }
                AtomKind::LiteralSymbol { sensor, symbol } => {
                    dec.readings[f].insert(*sensor, DecodedValue::Symbol(*symbol));
                }
                AtomKind::LiteralReal { sensor, value } => {
                    dec.readings[f].insert(*sensor, DecodedValue::Real(*value));
                }
                AtomKind::ModelParam { .. } => {}
            }
        }
    }

    // Implication closure of known activations.
    while let Some((t, id)) = worklist.pop() {
        let d = h.detector(id).ok_or(CodecError::UnknownId(id.0))?;
        if let Some((sensor, symbol)) = d.rule.implied_symbol() {
            dec.readings[t].entry(sensor).or_insert(DecodedValue::Symbol(symbol));
        }
        if let Rule::ModelFit { sensors, .. } = &d.rule {
            for s in sensors {
                dec.readings[t].entry(*s).or_insert(DecodedValue::Described);
            }
        }
        for (i, slot) in d.rule.template().iter().enumerate() {
            let position = i as u32 + 1;
            if corrections.contains_key(&(t, id, position)) {
                continue; // slot explicitly did not happen
            }
            let Some(tf) = t.checked_sub(slot.offset_back as usize) else {
                return Err(CodecError::LossySelection(t));
            };
            if dec.active[tf].insert(slot.input) {
                worklist.push((tf, slot.input));
            }
        }
    }

    // Bottom-up re-evaluation of everything not implied.
    let order = h.evaluation_order();
    for f in 0..n_frames {
        for &id in &order {
            if dec.active[f].contains(&id) {
                continue;
            }
            let d = h.detector(id).unwrap();
            if reevaluate(&dec, f, &d.rule) {
                dec.active[f].insert(id);
            }
        }
    }

    // The residual record: reconstructed readings no reconstructed active
    // level-1 detector explains (mirrors frame evaluation).
    for f in 0..n_frames {
        let mut explained: BTreeSet<SensorId> = BTreeSet::new();
        for &id in &dec.active[f] {
            let d = h.detector(id).unwrap();
            if d.level == 1 {
                explained.extend(d.rule.explained_sensors());
            }
        }
        for (&sensor, &value) in &dec.readings[f] {
            if !explained.contains(&sensor) && value != DecodedValue::Described {
                dec.residual[f].insert(sensor, value);
            }
        }
    }

    Ok(dec)
}

fn slot_offset(h: &Hierarchy, owner: DetectorId, slot: u32) -> Result<u32, CodecError> {
    let d = h.detector(owner).ok_or(CodecError::UnknownId(owner.0))?;
    let template = d.rule.template();
    template
        .get(slot as usize - 1)
        .map(|s| s.offset_back)
        .ok_or(CodecError::UnknownId(owner.0))
}

/// Closed-world rule evaluation over reconstructed data: anything not
/// derivable counts as inactive; the final comparison catches any loss.
fn reevaluate(dec: &Decoded, frame: usize, rule: &Rule) -> bool {
    let reading = |sensor: SensorId, off: u32| -> Option<DecodedValue> {
        let f = frame.checked_sub(off as usize)?;
        dec.readings.get(f).and_then(|m| m.get(&sensor)).copied()
    };
    let active = |id: DetectorId, off: u32| -> bool {
        frame
            .checked_sub(off as usize)
            .map(|f| dec.active[f].contains(&id))
            .unwrap_or(false)
    };
    match rule {
        Rule::SymbolEquals { sensor, symbol } => {
            matches!(reading(*sensor, 0), Some(DecodedValue::Symbol(c)) if c == *symbol)
        }
        Rule::Threshold { sensor, at_least, value } => match reading(*sensor, 0) {
            Some(DecodedValue::Real(q)) => {
                if *at_least {
                    q.value() >= value.value()
                } else {
                    q.value() <= value.value()
                }
            }
            _ => false,
        },
        Rule::AllOf { inputs } => inputs.iter().all(|&i| active(i, 0)),
        Rule::Sequence { slots, max_mismatches } => {
            let mismatches = slots
                .iter()
                .filter(|s| !active(s.input, s.offset_back))
                .count();
            mismatches as u32 <= *max_mismatches
        }
        Rule::Automaton { sensor, machine, window } => {
            let mut word = Vec::with_capacity(*window as usize);
            for off in (0..*window).rev() {
                match reading(*sensor, off) {
                    Some(DecodedValue::Symbol(c)) => word.push(c),
                    _ => return false,
                }
            }
            crate::recognizers::automaton::automaton_accepts(machine, &word).unwrap_or(false)
        }
        Rule::ModelFit { sensors, model } => {
            if sensors.len() < 2 || sensors.iter().any(|s| reading(*s, 0).is_none()) {
                return false;
            }
            match (reading(sensors[0], 0), reading(sensors[1], 0)) {
                (Some(DecodedValue::Real(x)), Some(DecodedValue::Real(y))) => {
                    model.fits(x.value(), y.value())
                }
                _ => false,
            }
        }
    }
}

/// Check that a decoded selection reproduces the activation record exactly:
/// per frame, the active set and the residual readings (reals compared at
/// the declared quantization).
pub fn decoded_matches(
    params: &CodecParams,
    trace: &SystemTrace,
    scope: usize,
    dec: &Decoded,
) -> bool {
    for f in 0..scope {
        let state = trace.state(f).expect("frame in scope");
        if dec.active[f] != state.active {
            return false;
        }
        if dec.residual[f].len() != state.residual.len() {
            return false;
        }
        for (sensor, value) in &state.residual {
            match (value, dec.residual[f].get(sensor)) {
                (Value::Symbol(c), Some(DecodedValue::Symbol(d))) if c == d => {}
                (Value::Real(v), Some(DecodedValue::Real(q))) if *q == params.quantize(*v) => {}
                _ => return false,
            }
        }
    }
    true
}

/// Encode one state under a chosen selection, verifying losslessness.
pub fn encode_state(
    h: &Hierarchy,
    params: &CodecParams,
    state: &ActivationState,
    atoms: Vec<AtomKind>,
) -> Result<codec::Description, CodecError> {
    let trace = synthetic_trace(h, std::slice::from_ref(state));
    let sel = Selection { frames: vec![atoms] };
    let dec = decode_selection(h, &sel, 1)?;
    if !decoded_matches(params, &trace, 1, &dec) {
        return Err(CodecError::LossySelection(state.frame));
    }
    codec::Description::from_frames(
        h,
        params,
        sel.frames.into_iter().enumerate().collect(),
    )
}

/// Rebuild a standalone trace context from activation states: readings are
/// reconstructed from residuals plus the symbols implied by active level-1
/// detectors. Frames are renumbered from 0.
pub fn synthetic_trace(h: &Hierarchy, states: &[ActivationState]) -> SystemTrace {
    let mut rows = Vec::with_capacity(states.len());
    for state in states {
        let mut row: BTreeMap<SensorId, Value> = BTreeMap::new();
        for (s, v) in &state.residual {
            row.insert(*s, *v);
        }
        for &id in &state.active {
            if let Some(d) = h.detector(id) {
                if let Some((s, c)) = d.rule.implied_symbol() {
                    row.insert(s, Value::Symbol(c));
                }
            }
        }
        rows.push(row);
    }
    let states = states
        .iter()
        .enumerate()
        .map(|(f, s)| ActivationState { frame: f, ..s.clone() })
        .collect();
    SystemTrace::synthetic(states, rows)
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

/// Cap on active detectors for the exhaustive search.
pub const ORACLE_CAP: usize = 12;

/// Exhaustive minimal description of a whole (small) trace: search over all
/// subsets of active instances taken as explicit atoms, keep the lossless
/// ones, return a minimum-bit selection.
pub fn oracle_trace(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
) -> Result<(Selection, u64), ComplexityError> {
    let scope = trace.len();
    let instances: Vec<Instance> = known_instances(trace, scope, None).into_iter().collect();
    if instances.len() > ORACLE_CAP {
        return Err(ComplexityError::TooLarge(instances.len(), ORACLE_CAP));
    }

    let mut best: Option<(Selection, u64)> = None;
    for mask in 0u32..(1u32 << instances.len()) {
        let explicit: BTreeSet<Instance> = instances
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, inst)| *inst)
            .collect();
        let known = implication_closure(h, trace, &explicit);
        let sel = assemble(h, params, trace, scope, &known, &explicit, None);
        let Ok(dec) = decode_selection(h, &sel, scope) else {
            continue;
        };
        if !decoded_matches(params, trace, scope, &dec) {
            continue;
        }
        let bits = sel.total_bits(h, params)?;
        if best.as_ref().map(|(_, b)| bits < *b).unwrap_or(true) {
            best = Some((sel, bits));
        }
    }
    // The full-atom selection is always admissible, so a minimum exists.
    Ok(best.expect("at least the explicit full selection decodes"))
}

/// Exhaustive minimal description of one isolated state (cap 12 active).
pub fn minimal_description_oracle(
    h: &Hierarchy,
    params: &CodecParams,
    state: &ActivationState,
) -> Result<(Vec<AtomKind>, u64), ComplexityError> {
    let trace = synthetic_trace(h, std::slice::from_ref(state));
    let (sel, bits) = oracle_trace(h, params, &trace)?;
    Ok((sel.frames.into_iter().next().unwrap_or_default(), bits))
}

fn implication_closure(
    h: &Hierarchy,
    trace: &SystemTrace,
    explicit: &BTreeSet<Instance>,
) -> BTreeSet<Instance> {
    let mut known = explicit.clone();
    let mut worklist: Vec<Instance> = explicit.iter().copied().collect();
    while let Some((t, id)) = worklist.pop() {
        let d = h.detector(id).expect("instances are registered");
        for slot in d.rule.template() {
            if let Some(tf) = t.checked_sub(slot.offset_back as usize) {
                if trace.is_active(tf, slot.input) && known.insert((tf, slot.input)) {
                    worklist.push((tf, slot.input));
                }
            }
        }
    }
    known
}
