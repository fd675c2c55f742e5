//! Sensors, detectors, and the strictly layered detection hierarchy.
//!
//! A detector is a binary device. Level-1 detectors read sensors; a detector
//! at level n >= 2 reads detectors at level n-1 only. Registration assigns
//! dense, stable indices: adding a detector never renumbers existing ones,
//! which is what keeps inactive detectors free in the bit accounting.

use serde::{Deserialize, Serialize};

use crate::codec;
use crate::error::HierarchyError;
use crate::rule::Rule;

/// Registration index of a sensor (1-based, dense).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SensorId(pub u32);

/// Registration index of a detector (1-based, dense, never reused).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DetectorId(pub u32);

impl std::fmt::Display for SensorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl std::fmt::Display for DetectorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "d{}", self.0)
    }
}

/// What an analog channel carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SensorKind {
    /// Discrete symbols drawn from a declared alphabet.
    Symbolic { alphabet: Vec<char> },
    /// Real-valued channel; literals are coded at the configured precision.
    Real,
}

/// An analog input channel at level 0, below all detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub id: SensorId,
    pub name: String,
    pub kind: SensorKind,
    /// First frame at which the observable exists. Sensors introduced
    /// mid-run (a new observable) carry a later start frame.
    pub active_from: usize,
}

impl Sensor {
    pub fn is_live(&self, frame: usize) -> bool {
        frame >= self.active_from
    }

    pub fn alphabet_size(&self) -> Option<usize> {
        match &self.kind {
            SensorKind::Symbolic { alphabet } => Some(alphabet.len()),
            SensorKind::Real => None,
        }
    }
}

/// A binary device with a level, declared inputs, and a recognition rule.
///
/// `device_cost_bits` is the canonical serialized size of the rule and is
/// computed at registration, never supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub id: DetectorId,
    pub name: String,
    pub level: u32,
    pub rule: Rule,
    pub device_cost_bits: u64,
}

/// The layered DAG of sensors and detectors.
///
/// Wiring is implied by each rule's input references and validated at
/// registration: no skip-level edges, no cycles (inputs must already exist).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    sensors: Vec<Sensor>,
    detectors: Vec<Detector>,
}

impl Hierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sensors(&self) -> &[Sensor] {
        &self.sensors
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn sensor(&self, id: SensorId) -> Option<&Sensor> {
        (id.0 >= 1).then(|| self.sensors.get(id.0 as usize - 1)).flatten()
    }

    pub fn detector(&self, id: DetectorId) -> Option<&Detector> {
        (id.0 >= 1).then(|| self.detectors.get(id.0 as usize - 1)).flatten()
    }

    pub fn detector_by_name(&self, name: &str) -> Option<&Detector> {
        self.detectors.iter().find(|d| d.name == name)
    }

    pub fn sensor_by_name(&self, name: &str) -> Option<&Sensor> {
        self.sensors.iter().find(|s| s.name == name)
    }

    pub fn max_level(&self) -> u32 {
        self.detectors.iter().map(|d| d.level).max().unwrap_or(0)
    }

    /// Detector ids sorted by (level, id): the deterministic evaluation order.
    pub fn evaluation_order(&self) -> Vec<DetectorId> {
        let mut ids: Vec<DetectorId> = self.detectors.iter().map(|d| d.id).collect();
        ids.sort_by_key(|id| (self.detector(*id).unwrap().level, id.0));
        ids
    }

    /// True if some registered rule reads detector `id`.
    pub fn has_dependents(&self, id: DetectorId) -> bool {
        self.detectors
            .iter()
            .any(|d| d.rule.input_detectors().contains(&id))
    }

    pub fn register_sensor(&mut self, name: &str, kind: SensorKind) -> Result<SensorId, HierarchyError> {
        self.register_sensor_from(name, kind, 0)
    }

    /// Register a sensor that comes online at `active_from` (a new observable).
    pub fn register_sensor_from(
        &mut self,
        name: &str,
        kind: SensorKind,
        active_from: usize,
    ) -> Result<SensorId, HierarchyError> {
        if self.sensors.iter().any(|s| s.name == name) {
            return Err(HierarchyError::DuplicateId(name.to_string()));
        }
        let id = SensorId(self.sensors.len() as u32 + 1);
        self.sensors.push(Sensor {
            id,
            name: name.to_string(),
            kind,
            active_from,
        });
        Ok(id)
    }

    /// Register a detector at `level` with recognition rule `rule`.
    ///
    /// The new detector gets the next registration index; no existing index
    /// changes. Fails if the rule's inputs do not exist or violate the
    /// strict layering (every input of a level-n detector has level n-1;
    /// level-1 detectors read sensors only).
    pub fn register_detector(
        &mut self,
        name: &str,
        level: u32,
        rule: Rule,
    ) -> Result<DetectorId, HierarchyError> {
        if level == 0 {
            return Err(HierarchyError::ZeroLevel);
        }
        if self.detectors.iter().any(|d| d.name == name) {
            return Err(HierarchyError::DuplicateId(name.to_string()));
        }

        let sensor_inputs = rule.input_sensors();
        let detector_inputs = rule.input_detectors();
        if sensor_inputs.is_empty() && detector_inputs.is_empty() {
            return Err(HierarchyError::EmptyInputs);
        }

        if level == 1 {
            // Level-1 detectors read sensors only.
            if !detector_inputs.is_empty() {
                return Err(HierarchyError::RuleLevelMismatch(level));
            }
            for s in &sensor_inputs {
                if self.sensor(*s).is_none() {
                    return Err(HierarchyError::UnknownInput(s.0));
                }
            }
        } else {
            // A level-n detector receives inputs from level n-1 only.
            if !sensor_inputs.is_empty() {
                return Err(HierarchyError::RuleLevelMismatch(level));
            }
            for d in &detector_inputs {
                let input = self
                    .detector(*d)
                    .ok_or(HierarchyError::UnknownInput(d.0))?;
                if input.level != level - 1 {
                    return Err(HierarchyError::LevelViolation {
                        level,
                        input: d.0,
                        input_level: input.level,
                    });
                }
            }
        }

        let id = DetectorId(self.detectors.len() as u32 + 1);
        let device_cost_bits = codec::rule_device_cost(self, &rule);
        self.detectors.push(Detector {
            id,
            name: name.to_string(),
            level,
            rule,
            device_cost_bits,
        });
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::Rule;

    fn symbol_sensor(h: &mut Hierarchy) -> SensorId {
        h.register_sensor("s1", SensorKind::Symbolic { alphabet: vec!['a', 'b'] })
            .unwrap()
    }

    #[test]
    fn first_registration_gets_index_one() {
        let mut h = Hierarchy::new();
        let s = symbol_sensor(&mut h);
        let id = h
            .register_detector("Da", 1, Rule::SymbolEquals { sensor: s, symbol: 'a' })
            .unwrap();
        assert_eq!(id, DetectorId(1));
    }

    #[test]
    fn well_formed_level_two_wiring() {
        let mut h = Hierarchy::new();
        let s = symbol_sensor(&mut h);
        let d1 = h
            .register_detector("Da", 1, Rule::SymbolEquals { sensor: s, symbol: 'a' })
            .unwrap();
        let d2 = h
            .register_detector("top", 2, Rule::AllOf { inputs: vec![d1] })
            .unwrap();
        assert_eq!(d2, DetectorId(2));
        assert_eq!(h.detector(d2).unwrap().level, 2);
    }

    #[test]
    fn skip_level_edge_is_rejected() {
        let mut h = Hierarchy::new();
        let s = symbol_sensor(&mut h);
        let d1 = h
            .register_detector("Da", 1, Rule::SymbolEquals { sensor: s, symbol: 'a' })
            .unwrap();
        let err = h
            .register_detector("skip", 3, Rule::AllOf { inputs: vec![d1] })
            .unwrap_err();
        assert!(matches!(err, HierarchyError::LevelViolation { level: 3, input: 1, input_level: 1 }));
    }

    #[test]
    fn unknown_input_and_duplicates_rejected() {
        let mut h = Hierarchy::new();
        let s = symbol_sensor(&mut h);
        assert!(matches!(
            h.register_detector("x", 2, Rule::AllOf { inputs: vec![DetectorId(9)] }),
            Err(HierarchyError::UnknownInput(9))
        ));
        h.register_detector("Da", 1, Rule::SymbolEquals { sensor: s, symbol: 'a' })
            .unwrap();
        assert!(matches!(
            h.register_detector("Da", 1, Rule::SymbolEquals { sensor: s, symbol: 'b' }),
            Err(HierarchyError::DuplicateId(_))
        ));
    }

    #[test]
    fn empty_rules_rejected() {
        let mut h = Hierarchy::new();
        assert!(matches!(
            h.register_detector("none", 2, Rule::AllOf { inputs: vec![] }),
            Err(HierarchyError::EmptyInputs)
        ));
    }

    #[test]
    fn registration_indices_are_stable() {
        let mut h = Hierarchy::new();
        let s = symbol_sensor(&mut h);
        let a = h
            .register_detector("Da", 1, Rule::SymbolEquals { sensor: s, symbol: 'a' })
            .unwrap();
        let b = h
            .register_detector("Db", 1, Rule::SymbolEquals { sensor: s, symbol: 'b' })
            .unwrap();
        h.register_detector("DbDup2", 1, Rule::SymbolEquals { sensor: s, symbol: 'b' })
            .unwrap();
        assert_eq!(a, DetectorId(1));
        assert_eq!(b, DetectorId(2));
        assert_eq!(h.detector(a).unwrap().name, "Da");
    }
}
