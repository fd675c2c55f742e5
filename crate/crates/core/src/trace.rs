//! Frame-by-frame evaluation: from sensor readings to activation states.
//!
//! Evaluation is deterministic and layered: level-n outputs are computed
//! only from level n-1 outputs (or sensors for n = 1), in level order.
//! Windowed rules may consult up to W past frames. Analog properties are
//! lost upward: a structural detector's output is a pure function of its
//! inputs' binary activations within the declared window.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::hierarchy::{DetectorId, Hierarchy, SensorId, SensorKind};
use crate::recognizers::automaton::automaton_accepts;
use crate::rule::Rule;

/// A sensor reading: a discrete symbol or an analog value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Symbol(char),
    Real(f64),
}

/// Raw per-frame input: (sensor, value) pairs.
pub type ReadingRow = Vec<(SensorId, Value)>;

/// Which detectors fired at a frame, plus the readings no active level-1
/// detector accounts for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationState {
    pub frame: usize,
    pub active: BTreeSet<DetectorId>,
    pub residual: Vec<(SensorId, Value)>,
}

/// The observable record of a system: consecutive activation states from
/// frame 0 plus the validated raw sensor record.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemTrace {
    states: Vec<ActivationState>,
    readings: Vec<BTreeMap<SensorId, Value>>,
}

impl SystemTrace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ActivationState] {
        &self.states
    }

    pub fn state(&self, frame: usize) -> Option<&ActivationState> {
        self.states.get(frame)
    }

    pub fn reading(&self, frame: usize, sensor: SensorId) -> Option<&Value> {
        self.readings.get(frame).and_then(|r| r.get(&sensor))
    }

    pub fn is_active(&self, frame: usize, id: DetectorId) -> bool {
        self.states
            .get(frame)
            .map(|s| s.active.contains(&id))
            .unwrap_or(false)
    }

    /// First frame at which `id` fired, if it ever did.
    pub fn first_activation(&self, id: DetectorId) -> Option<usize> {
        self.states.iter().position(|s| s.active.contains(&id))
    }

    /// Assemble a trace from pre-built parts (selection decoding and
    /// isolated-state contexts).
    pub(crate) fn synthetic(
        states: Vec<ActivationState>,
        readings: Vec<BTreeMap<SensorId, Value>>,
    ) -> Self {
        debug_assert_eq!(states.len(), readings.len());
        Self { states, readings }
    }
}

/// Incremental evaluator carrying the history that windowed rules consult.
pub struct Evaluator<'h> {
    h: &'h Hierarchy,
    order: Vec<DetectorId>,
    trace: SystemTrace,
}

impl<'h> Evaluator<'h> {
    pub fn new(h: &'h Hierarchy) -> Self {
        Self {
            h,
            order: h.evaluation_order(),
            trace: SystemTrace::default(),
        }
    }

    pub fn trace(&self) -> &SystemTrace {
        &self.trace
    }

    pub fn into_trace(self) -> SystemTrace {
        self.trace
    }

    /// Evaluate the next frame from its readings.
    pub fn step(&mut self, row: &ReadingRow) -> Result<&ActivationState, EvalError> {
        let frame = self.trace.len();
        let readings = self.validate(row, frame)?;

        let mut active: BTreeSet<DetectorId> = BTreeSet::new();
        for &id in &self.order {
            let d = self.h.detector(id).expect("ordered ids are registered");
            let ctx = Ctx {
                trace: &self.trace,
                frame,
                readings: &readings,
                current: &active,
            };
            if eval_rule(&d.rule, &ctx) {
                active.insert(id);
            }
        }

        // Readings explained by an active level-1 detector leave the residual.
        let mut explained: BTreeSet<SensorId> = BTreeSet::new();
        for id in &active {
            let d = self.h.detector(*id).unwrap();
            if d.level == 1 {
                explained.extend(d.rule.explained_sensors());
            }
        }
        let residual = readings
            .iter()
            .filter(|(s, _)| !explained.contains(s))
            .map(|(s, v)| (*s, *v))
            .collect();

        self.trace.states.push(ActivationState { frame, active, residual });
        self.trace.readings.push(readings);
        Ok(self.trace.states.last().unwrap())
    }

    fn validate(
        &self,
        row: &ReadingRow,
        frame: usize,
    ) -> Result<BTreeMap<SensorId, Value>, EvalError> {
        let mut map = BTreeMap::new();
        for &(id, value) in row {
            let sensor = self
                .h
                .sensor(id)
                .ok_or(EvalError::UnknownSensor(id.0))?;
            if !sensor.is_live(frame) {
                continue; // observable not yet introduced
            }
            match (&sensor.kind, &value) {
                (SensorKind::Symbolic { alphabet }, Value::Symbol(c)) => {
                    if !alphabet.contains(c) {
                        return Err(EvalError::AlphabetViolation { sensor: id.0, symbol: *c });
                    }
                }
                (SensorKind::Real, Value::Real(v)) => {
                    if !v.is_finite() {
                        return Err(EvalError::TypeMismatch(id.0));
                    }
                }
                _ => return Err(EvalError::TypeMismatch(id.0)),
            }
            map.insert(id, value);
        }
        for sensor in self.h.sensors() {
            if sensor.is_live(frame) && !map.contains_key(&sensor.id) {
                return Err(EvalError::MissingReading { sensor: sensor.id.0, frame });
            }
        }
        Ok(map)
    }
}

struct Ctx<'a> {
    trace: &'a SystemTrace,
    frame: usize,
    readings: &'a BTreeMap<SensorId, Value>,
    current: &'a BTreeSet<DetectorId>,
}

impl Ctx<'_> {
    fn reading(&self, sensor: SensorId, offset_back: u32) -> Option<&Value> {
        if offset_back == 0 {
            self.readings.get(&sensor)
        } else {
            let f = self.frame.checked_sub(offset_back as usize)?;
            self.trace.reading(f, sensor)
        }
    }

    fn active(&self, id: DetectorId, offset_back: u32) -> bool {
        if offset_back == 0 {
            self.current.contains(&id)
        } else {
            match self.frame.checked_sub(offset_back as usize) {
                Some(f) => self.trace.is_active(f, id),
                None => false,
            }
        }
    }
}

fn eval_rule(rule: &Rule, ctx: &Ctx<'_>) -> bool {
    match rule {
        Rule::SymbolEquals { sensor, symbol } => {
            matches!(ctx.reading(*sensor, 0), Some(Value::Symbol(c)) if c == symbol)
        }
        Rule::Threshold { sensor, at_least, value } => match ctx.reading(*sensor, 0) {
            Some(Value::Real(v)) => {
                if *at_least {
                    *v >= value.value()
                } else {
                    *v <= value.value()
                }
            }
            _ => false,
        },
        Rule::AllOf { inputs } => inputs.iter().all(|&i| ctx.active(i, 0)),
        Rule::Sequence { slots, max_mismatches } => {
            let mismatches = slots
                .iter()
                .filter(|s| !ctx.active(s.input, s.offset_back))
                .count();
            mismatches as u32 <= *max_mismatches
        }
        Rule::Automaton { sensor, machine, window } => {
            let mut word = Vec::with_capacity(*window as usize);
            for off in (0..*window).rev() {
                match ctx.reading(*sensor, off) {
                    Some(Value::Symbol(c)) => word.push(*c),
                    _ => return false,
                }
            }
            // symbols outside the machine's alphabet cannot start an accepted word
            automaton_accepts(machine, &word).unwrap_or(false)
        }
        Rule::ModelFit { sensors, model } => {
            if sensors.len() < 2 {
                return false;
            }
            if sensors.iter().any(|s| ctx.reading(*s, 0).is_none()) {
                return false;
            }
            match (ctx.reading(sensors[0], 0), ctx.reading(sensors[1], 0)) {
                (Some(Value::Real(x)), Some(Value::Real(y))) => model.fits(*x, *y),
                _ => false,
            }
        }
    }
}

/// Evaluate one isolated frame (no history; windowed rules see only it).
pub fn evaluate_frame(
    h: &Hierarchy,
    readings: &ReadingRow,
    frame: usize,
) -> Result<ActivationState, EvalError> {
    let mut ev = Evaluator::new(h);
    let mut state = ev.step(readings)?.clone();
    state.frame = frame;
    Ok(state)
}

/// Evaluate consecutive frames starting at 0.
pub fn evaluate_trace(h: &Hierarchy, rows: &[ReadingRow]) -> Result<SystemTrace, EvalError> {
    let mut ev = Evaluator::new(h);
    for row in rows {
        ev.step(row)?;
    }
    Ok(ev.into_trace())
}
