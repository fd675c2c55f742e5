//! Scenario configuration: one TOML document per run, schema-validated
//! before anything executes. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use emergence_core::AccountingMode;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub codec: CodecOptions,
    #[serde(default)]
    pub monitor: MonitorOptions,
    #[serde(default)]
    pub accounting: AccountingMode,
    #[serde(default)]
    pub output: OutputOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    WordStream(WordStreamConfig),
    Trajectory(TrajectoryConfig),
    KdLattice(KdLatticeConfig),
    PatchTable(PatchTableConfig),
    PointPattern(PointPatternConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodecOptions {
    pub precision_bits: u32,
}

impl Default for CodecOptions {
    fn default() -> Self {
        Self { precision_bits: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorOptions {
    /// Sliding window length w for complexity comparisons.
    pub window: usize,
    /// Consecutive prediction failures before bifurcation (r).
    pub failure_run: u32,
    /// Consecutive valid frames to accept a candidate model (v).
    pub validation_run: u32,
    /// Prediction tolerance as a multiple of the fit residual spread.
    pub tol_sigma_factor: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self { window: 16, failure_run: 3, validation_run: 5, tol_sigma_factor: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputOptions {
    pub report: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Scenario payloads

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordStreamConfig {
    /// Tokens concatenated in order, the whole sequence repeated.
    pub tokens: Vec<String>,
    pub repeats: usize,
    /// Substitution noise rate per symbol.
    #[serde(default)]
    pub noise_rate: f64,
    /// Stream alphabet; defaults to the characters of the tokens.
    #[serde(default)]
    pub alphabet: Option<String>,
    pub detectors: Vec<DetectorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorSpec {
    Symbol(SymbolSpec),
    Word(WordSpec),
    Automaton(AutomatonSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub name: String,
    pub symbol: char,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordSpec {
    pub name: String,
    /// Sequence of symbols; each needs a symbol detector declared.
    pub token: String,
    #[serde(default)]
    pub max_mismatches: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonSpec {
    pub name: String,
    pub machine: MachineKind,
    /// Word length read from the stream.
    pub window: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MachineKind {
    /// The shipped (ab)* finite-state recognizer.
    AbStar,
    /// The shipped a^n b^n pushdown recognizer.
    AnBn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub frames: usize,
    /// Frame at which sampling switches to the post conic.
    pub switch_frame: usize,
    pub pre: ConicSpec,
    pub post: ConicSpec,
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma: f64,
    /// Points used to fit each model.
    #[serde(default = "default_fit_window")]
    pub fit_window: usize,
    /// Introduce a new observable (radial distance) at bifurcation; the
    /// re-model then classifies as semantic instead of syntactic.
    #[serde(default)]
    pub add_observable: bool,
}

fn default_noise_sigma() -> f64 {
    0.01
}

fn default_fit_window() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConicSpec {
    Circle { radius: f64, angular_step: f64 },
    Ellipse { a: f64, b: f64, angular_step: f64 },
    Hyperbola { a: f64, b: f64, param_start: f64, param_step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdLatticeConfig {
    /// Plain-text grid of '0'/'1' rows.
    #[serde(default)]
    pub lattice_file: Option<PathBuf>,
    #[serde(default)]
    pub pattern: Option<LatticePattern>,
    pub diameters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticePattern {
    Checkerboard { rows: usize, cols: usize },
    Filled { rows: usize, cols: usize, value: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchTableConfig {
    /// CSV with columns area,perimeter.
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub generate: Option<PatchGen>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatchGen {
    pub count: usize,
    pub breakpoint_area: f64,
    pub dimension_low: f64,
    pub dimension_high: f64,
    pub prefactor: f64,
    /// Multiplicative (lognormal) noise scale.
    pub noise: f64,
    pub area_min: f64,
    pub area_max: f64,
}

impl Default for PatchGen {
    fn default() -> Self {
        Self {
            count: 200,
            breakpoint_area: 65.0,
            dimension_low: 1.2,
            dimension_high: 1.5,
            prefactor: 2.0,
            noise: 0.05,
            area_min: 1.0,
            area_max: 4000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointPatternConfig {
    /// CSV with columns x,y.
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub generate: Option<PointGen>,
    /// Observation window (width, height).
    pub window: [f64; 2],
    pub quadrat_size: f64,
    #[serde(default = "default_regularity_factor")]
    pub regularity_factor: f64,
    #[serde(default = "default_vmr_threshold")]
    pub vmr_threshold: f64,
}

fn default_regularity_factor() -> f64 {
    1.1
}

fn default_vmr_threshold() -> f64 {
    1.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointGen {
    /// Complete spatial randomness.
    Csr { count: usize },
    /// Cluster centers with a regular minimum-spacing layout inside each.
    ClusteredInhibited { clusters: usize, per_side: usize, spacing: f64 },
    /// A perfect grid.
    Grid { nx: usize, ny: usize, spacing: f64 },
}

// ---------------------------------------------------------------------------

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: ScenarioConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    validate(&cfg)?;
    Ok(cfg)
}

/// Semantic checks beyond the schema.
pub fn validate(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let fail = |msg: String| Err(CliError::Config(format!("{}: {msg}", cfg.name)));
    if cfg.codec.precision_bits < 2 || cfg.codec.precision_bits > 62 {
        return fail("codec.precision_bits must be in 2..=62".into());
    }
    if cfg.monitor.window == 0 {
        return fail("monitor.window must be >= 1".into());
    }
    match &cfg.scenario {
        ScenarioKind::WordStream(ws) => {
            if ws.tokens.is_empty() || ws.tokens.iter().any(|t| t.is_empty()) {
                return fail("bad alphabet: tokens must be non-empty".into());
            }
            if ws.repeats == 0 {
                return fail("repeats must be >= 1".into());
            }
            if !(0.0..=1.0).contains(&ws.noise_rate) {
                return fail("noise_rate must be in [0, 1]".into());
            }
            let alphabet = word_stream_alphabet(ws);
            if ws.noise_rate > 0.0 && alphabet.len() < 2 {
                return fail("bad alphabet: substitution noise needs >= 2 symbols".into());
            }
            for tok in &ws.tokens {
                if tok.chars().any(|c| !alphabet.contains(&c)) {
                    return fail(format!("token {tok:?} uses symbols outside the alphabet"));
                }
            }
            let symbols: Vec<char> = ws
                .detectors
                .iter()
                .filter_map(|d| match d {
                    DetectorSpec::Symbol(s) => Some(s.symbol),
                    _ => None,
                })
                .collect();
            for d in &ws.detectors {
                if let DetectorSpec::Word(w) = d {
                    if w.token.is_empty() {
                        return fail(format!("word {:?} has an empty token", w.name));
                    }
                    for c in w.token.chars() {
                        if !symbols.contains(&c) {
                            return fail(format!(
                                "word {:?} needs a symbol detector for {c:?}",
                                w.name
                            ));
                        }
                    }
                }
            }
        }
        ScenarioKind::Trajectory(t) => {
            if t.frames == 0 {
                return fail("frames must be >= 1".into());
            }
            if t.fit_window < 6 {
                return fail("fit_window must be >= 6 (a conic needs six points)".into());
            }
            if t.noise_sigma < 0.0 {
                return fail("noise_sigma must be >= 0".into());
            }
            for (label, spec) in [("pre", &t.pre), ("post", &t.post)] {
                if let Err(msg) = conic_spec_ok(spec) {
                    return fail(format!("bad conic ({label}): {msg}"));
                }
            }
        }
        ScenarioKind::KdLattice(k) => {
            match (&k.lattice_file, &k.pattern) {
                (Some(_), Some(_)) => {
                    return fail("give either lattice_file or pattern, not both".into())
                }
                (None, None) => return fail("give lattice_file or pattern".into()),
                _ => {}
            }
            if k.diameters.is_empty() {
                return fail("diameters must be non-empty".into());
            }
            if k.diameters.windows(2).any(|w| w[0] >= w[1]) || k.diameters[0] == 0 {
                return fail("diameters must be strictly increasing and >= 1".into());
            }
        }
        ScenarioKind::PatchTable(p) => match (&p.csv, &p.generate) {
            (Some(_), Some(_)) => return fail("give either csv or generate, not both".into()),
            (None, None) => return fail("give csv or generate".into()),
            _ => {}
        },
        ScenarioKind::PointPattern(p) => {
            match (&p.csv, &p.generate) {
                (Some(_), Some(_)) => return fail("give either csv or generate, not both".into()),
                (None, None) => return fail("give csv or generate".into()),
                _ => {}
            }
            if p.window[0] <= 0.0 || p.window[1] <= 0.0 || p.quadrat_size <= 0.0 {
                return fail("window and quadrat_size must be positive".into());
            }
        }
    }
    Ok(())
}

fn conic_spec_ok(spec: &ConicSpec) -> Result<(), String> {
    match spec {
        ConicSpec::Circle { radius, angular_step } => {
            if *radius <= 0.0 || *angular_step == 0.0 {
                return Err("radius must be positive, angular_step non-zero".into());
            }
        }
        ConicSpec::Ellipse { a, b, angular_step } => {
            if *a <= 0.0 || *b <= 0.0 || *angular_step == 0.0 {
                return Err("axes must be positive, angular_step non-zero".into());
            }
        }
        ConicSpec::Hyperbola { a, b, param_step, .. } => {
            if *a <= 0.0 || *b <= 0.0 || *param_step == 0.0 {
                return Err("axes must be positive, param_step non-zero".into());
            }
        }
    }
    Ok(())
}

/// The effective alphabet of a word-stream scenario.
pub fn word_stream_alphabet(ws: &WordStreamConfig) -> Vec<char> {
    match &ws.alphabet {
        Some(a) => {
            let mut chars: Vec<char> = a.chars().collect();
            chars.sort_unstable();
            chars.dedup();
            chars
        }
        None => {
            let mut chars: Vec<char> = ws.tokens.iter().flat_map(|t| t.chars()).collect();
            chars.sort_unstable();
            chars.dedup();
            chars
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word_stream_toml() -> &'static str {
        r#"
name = "words"
seed = 7

[scenario.word_stream]
tokens = ["ab"]
repeats = 4

[[scenario.word_stream.detectors]]
symbol = { name = "Da", symbol = "a" }

[[scenario.word_stream.detectors]]
symbol = { name = "Db", symbol = "b" }

[[scenario.word_stream.detectors]]
word = { name = "Dab", token = "ab" }

[monitor]
window = 8
"#
    }

    #[test]
    fn parses_and_validates_a_word_stream_config() {
        let cfg: ScenarioConfig = toml::from_str(word_stream_toml()).unwrap();
        validate(&cfg).unwrap();
        assert_eq!(cfg.monitor.window, 8);
        assert_eq!(cfg.monitor.failure_run, 3, "defaulted");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let doc = format!("{}\nbogus_key = 1\n", word_stream_toml());
        assert!(toml::from_str::<ScenarioConfig>(&doc).is_err());
        let doc = word_stream_toml().replace("window = 8", "window = 8\nwhat = 2");
        assert!(toml::from_str::<ScenarioConfig>(&doc).is_err());
    }

    #[test]
    fn round_trip_preserves_the_document() {
        let cfg: ScenarioConfig = toml::from_str(word_stream_toml()).unwrap();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: ScenarioConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn empty_token_list_is_a_bad_alphabet() {
        let doc = word_stream_toml().replace("tokens = [\"ab\"]", "tokens = []");
        let cfg: ScenarioConfig = toml::from_str(&doc).unwrap();
        let err = validate(&cfg).unwrap_err();
        assert!(err.to_string().contains("bad alphabet"), "{err}");
    }

    #[test]
    fn word_detectors_need_their_symbols() {
        let doc = word_stream_toml().replace("token = \"ab\"", "token = \"ac\"");
        let cfg: ScenarioConfig = toml::from_str(&doc).unwrap();
        assert!(validate(&cfg).is_err());
    }
}
