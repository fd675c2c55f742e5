//! The library of concrete recognition devices: automata for formal
//! languages, correlation-based periodicity, conic orbit models,
//! perimeter-area fractal dimension, and point-pattern statistics.

pub mod automaton;
pub mod conic;
pub mod fractal;
pub mod pattern;
pub mod period;

pub use automaton::{automaton_accepts, Automaton, Dfa, Pda, StackAction};
pub use conic::{classify, fit_conic, ConicClass};
pub use fractal::{dimension_shift, fractal_dimension};
pub use pattern::{pattern_stats, PatternThresholds, Window};
pub use period::{autocorrelation, detect_period};
