//! The closed, serializable rule language for recognition devices.
//!
//! Every rule has a well-defined serialized size (its device cost), a
//! declared window of past frames it may consult, and — for the structural
//! kinds — a template describing which lower-level activations its own
//! activation implies. The template is what drives redundancy elimination.

use serde::{Deserialize, Serialize};

use crate::codec::Quantized;
use crate::hierarchy::{DetectorId, SensorId};
use crate::recognizers::automaton::Automaton;

/// One template slot of a sequence rule: an input expected active
/// `offset_back` frames before the owner's activation frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub input: DetectorId,
    pub offset_back: u32,
}

/// Quantized conic coefficients plus an acceptance tolerance; the model half
/// of a conceptual detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedConic {
    /// ax^2 + bxy + cy^2 + dx + ey + f, unit-norm before quantization.
    pub coeffs: [Quantized; 6],
    pub tol: Quantized,
}

impl QuantizedConic {
    pub fn residual(&self, x: f64, y: f64) -> f64 {
        let [a, b, c, d, e, f] = self.coeffs.map(|q| q.value());
        (a * x * x + b * x * y + c * y * y + d * x + e * y + f).abs()
    }

    pub fn fits(&self, x: f64, y: f64) -> bool {
        self.residual(x, y) <= self.tol.value()
    }
}

/// A recognition predicate. Level-1 kinds read sensors; structural kinds
/// read detectors at the level below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Rule {
    /// Fires when a symbolic sensor reads exactly `symbol` this frame.
    SymbolEquals { sensor: SensorId, symbol: char },
    /// Fires when a real sensor is at or beyond a quantized bound.
    /// The analog value itself is lost at the detector's level.
    Threshold {
        sensor: SensorId,
        at_least: bool,
        value: Quantized,
    },
    /// Fires when all inputs are active this frame.
    AllOf { inputs: Vec<DetectorId> },
    /// Windowed sequence match over lower-level detectors. Fires when at
    /// most `max_mismatches` slots fail; a positive tolerance makes the
    /// detector fire over noisy constituents, which then remain in the
    /// description as residual corrections.
    Sequence { slots: Vec<Slot>, max_mismatches: u32 },
    /// Fires when the last `window` symbols of a sensor form a word the
    /// machine accepts.
    Automaton {
        sensor: SensorId,
        machine: Automaton,
        window: u32,
    },
    /// A conceptual detector: fires when the first two sensors' readings
    /// satisfy the conic within tolerance. When active it stands in for all
    /// its declared sensors' readings in the description.
    ModelFit {
        sensors: Vec<SensorId>,
        model: QuantizedConic,
    },
}

impl Rule {
    /// How many past frames (including the current one) evaluation consults.
    pub fn window(&self) -> u32 {
        match self {
            Rule::Sequence { slots, .. } => {
                slots.iter().map(|s| s.offset_back).max().unwrap_or(0) + 1
            }
            Rule::Automaton { window, .. } => (*window).max(1),
            _ => 1,
        }
    }

    pub fn input_sensors(&self) -> Vec<SensorId> {
        match self {
            Rule::SymbolEquals { sensor, .. }
            | Rule::Threshold { sensor, .. }
            | Rule::Automaton { sensor, .. } => vec![*sensor],
            Rule::ModelFit { sensors, .. } => sensors.clone(),
            _ => vec![],
        }
    }

    pub fn input_detectors(&self) -> Vec<DetectorId> {
        match self {
            Rule::AllOf { inputs } => inputs.clone(),
            Rule::Sequence { slots, .. } => slots.iter().map(|s| s.input).collect(),
            _ => vec![],
        }
    }

    /// Template implied by this rule's activation: `(input, offset_back)`
    /// per slot, in slot order (positions are 1-based in corrections).
    /// Empty for rules whose activation implies nothing reconstructible.
    pub fn template(&self) -> Vec<Slot> {
        match self {
            Rule::AllOf { inputs } => inputs
                .iter()
                .map(|&input| Slot { input, offset_back: 0 })
                .collect(),
            Rule::Sequence { slots, .. } => slots.clone(),
            _ => vec![],
        }
    }

    /// Sensors whose current reading is accounted for by this detector
    /// being active (and so leaves the residual record).
    pub fn explained_sensors(&self) -> Vec<SensorId> {
        match self {
            Rule::SymbolEquals { sensor, .. } => vec![*sensor],
            Rule::ModelFit { sensors, .. } => sensors.clone(),
            _ => vec![],
        }
    }

    /// The exact symbol this rule pins its sensor to when active.
    pub fn implied_symbol(&self) -> Option<(SensorId, char)> {
        match self {
            Rule::SymbolEquals { sensor, symbol } => Some((*sensor, *symbol)),
            _ => None,
        }
    }
}
