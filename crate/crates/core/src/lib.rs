//! A detection-hierarchy and description-length engine.
//!
//! Systems are observed through strictly layered binary detectors; the
//! observable record is the per-frame activation state. A fixed prefix-free
//! codec assigns the record an exact bit length — its relative complexity —
//! after eliminating the lower-level activity made redundant by active
//! higher-level detectors. Emergence is the moment a detector's activation
//! makes that length strictly drop. The same machinery covers the two
//! classical faces of the phenomenon: higher-level structures surfacing
//! through an existing hierarchy, and a system outrunning its model until a
//! new model (a conceptual detector) restores a concise description.
//!
//! The numeric recognizers (conic fits, dimension estimates, correlation
//! and point-pattern statistics) are generic over the scalar type; the
//! aliases at the crate root fix them to `f64`.

pub mod codec;
pub mod complexity;
pub mod emergence;
pub mod error;
pub mod hierarchy;
pub mod lattice;
pub mod linalg;
pub mod recognizers;
pub mod rule;
pub mod scalar;
pub mod selection;
pub mod trace;

pub use codec::{AtomKind, CodecParams, Description, Quantized};
pub use complexity::{
    kd_profile, kd_shift, relative_complexity, relative_complexity_with, AccountingMode,
    ComplexityReport, KdProfile,
};
pub use emergence::{
    check_emergence, classify_event, complexity_trace, erm_step, monitor_trace, ChangeEntry,
    EmergenceEvent, ErmParams, ErmPhase, EventKind, Phase,
};
pub use error::{
    CodecError, ComplexityError, EmergenceError, EvalError, HierarchyError, RecognizerError,
};
pub use hierarchy::{Detector, DetectorId, Hierarchy, Sensor, SensorId, SensorKind};
pub use lattice::Lattice;
pub use rule::{QuantizedConic, Rule, Slot};
pub use selection::{
    decode_selection, encode_state, full_selection, minimal_description_oracle, oracle_trace,
    reduce_redundant, reduce_trace, ReduceOptions, Selection,
};
pub use trace::{evaluate_frame, evaluate_trace, ActivationState, ReadingRow, SystemTrace, Value};

/// Default scalar for the numeric kernels.
pub type Scalar = f64;

/// Conic model over the default scalar.
pub type ConicModel = recognizers::conic::ConicModel<Scalar>;
/// Dimension estimate over the default scalar.
pub type DimensionEstimate = recognizers::fractal::DimensionEstimate<Scalar>;
/// Dimension shift over the default scalar.
pub type DimensionShift = recognizers::fractal::DimensionShift<Scalar>;
/// Point-pattern statistics over the default scalar.
pub type PatternStats = recognizers::pattern::PatternStats<Scalar>;
