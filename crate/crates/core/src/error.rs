//! Error types for the detection and coding engine.

use thiserror::Error;

/// Errors raised while building or evaluating a hierarchy.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyError {
    /// A level-n detector referenced an input that is not at level n-1.
    #[error("level violation: detector at level {level} requires inputs at level {} but input {input} is at level {input_level}", level - 1)]
    LevelViolation {
        level: u32,
        input: u32,
        input_level: u32,
    },
    /// Rule referenced a sensor or detector id that does not exist.
    #[error("unknown input id {0}")]
    UnknownInput(u32),
    /// A detector or sensor name was registered twice.
    #[error("duplicate id: name {0:?} already registered")]
    DuplicateId(String),
    /// A detector must detect something; empty input lists are rejected.
    #[error("degenerate rule: detector has no inputs")]
    EmptyInputs,
    /// A level-1 rule must read sensors; higher levels must read detectors.
    #[error("rule kind not allowed at level {0}")]
    RuleLevelMismatch(u32),
    /// Levels start at 1.
    #[error("level must be >= 1")]
    ZeroLevel,
}

/// Errors raised during frame/trace evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// A registered, live sensor had no reading for a frame.
    #[error("missing reading for sensor {sensor} at frame {frame}")]
    MissingReading { sensor: u32, frame: usize },
    /// A symbolic reading was not a member of the sensor's alphabet.
    #[error("symbol {symbol:?} not in alphabet of sensor {sensor}")]
    AlphabetViolation { sensor: u32, symbol: char },
    /// A real value was supplied to a symbolic sensor or vice versa.
    #[error("reading type mismatch for sensor {0}")]
    TypeMismatch(u32),
    /// A reading referenced a sensor that was never registered.
    #[error("reading for unregistered sensor {0}")]
    UnknownSensor(u32),
}

/// Errors raised by the canonical codec.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    /// Universal integer codes only cover n >= 1.
    #[error("gamma code undefined for non-positive integer")]
    NonPositive,
    /// Atom referenced an unregistered detector or sensor.
    #[error("unknown id {0} in description atom")]
    UnknownId(u32),
    /// The chosen selection does not decode back to the encoded state.
    #[error("lossy selection: decode does not reproduce the state at frame {0}")]
    LossySelection(usize),
    /// Run-length coding needs at least one cell.
    #[error("empty lattice")]
    EmptyLattice,
    /// Bitstream ended mid-codeword while decoding.
    #[error("truncated bitstream")]
    Truncated,
}

/// Errors raised by complexity accounting and Kd profiling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexityError {
    /// Exhaustive minimal-description search is capped at 12 active detectors.
    #[error("too large: {0} active detectors exceed the oracle cap of {1}")]
    TooLarge(usize, usize),
    /// Coarse-graining diameter exceeded the lattice dimensions.
    #[error("diameter {0} larger than smallest grid dimension {1}")]
    DiameterTooLarge(usize, usize),
    /// A Kd profile needs at least two entries to locate a shift.
    #[error("profile too short")]
    TooShort,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Errors raised by the emergence monitor.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmergenceError {
    /// Detector was already active at the baseline, or never activated.
    #[error("baseline violation: {0}")]
    BaselineViolation(String),
    /// Sliding window longer than the trace.
    #[error("window {window} longer than trace of {frames} frames")]
    WindowTooLong { window: usize, frames: usize },
    /// Complexity comparison is only defined for detectors nothing reads from.
    #[error("detector {0} has dependents; emergence check undefined")]
    DependentsExist(u32),
}

/// Errors raised by the recognizer library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecognizerError {
    #[error("too few data points: need {needed}, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("signal too short: need {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("areas and perimeters must be positive")]
    NonPositive,
    #[error("point set is degenerate (collinear or rank-deficient)")]
    Degenerate,
    #[error("area range must span at least one decade")]
    NoSpan,
    #[error("symbol {0:?} not in automaton alphabet")]
    AlphabetViolation(char),
}
