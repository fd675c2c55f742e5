//! The canonical description codec.
//!
//! Complexity is defined as total code length in bits under one fixed,
//! deterministic, prefix-free scheme:
//!
//! - positive integers take the universal gamma code, `2*floor(log2 n) + 1`
//!   bits, so a detector's coding cost depends only on its registration
//!   index and never on the repertoire size;
//! - literal symbols take `ceil(log2 |alphabet|)` bits;
//! - residual corrections take a gamma position code plus the literal;
//! - model parameters and real literals take a declared fixed precision
//!   (default 16 bits).
//!
//! Per frame, an atom count code `gamma(m+1)` precedes the atoms so that
//! silent frames are encodable in one bit. Lengths are exact and
//! hand-checkable; no general-purpose compressor is involved.

use serde::{Deserialize, Serialize};

use crate::error::CodecError;
use crate::hierarchy::{DetectorId, Hierarchy, SensorId, SensorKind};
use crate::lattice::Lattice;
use crate::rule::Rule;

/// Length in bits of the gamma code for `n >= 1`.
pub fn gamma_length(n: u64) -> Result<u64, CodecError> {
    if n == 0 {
        return Err(CodecError::NonPositive);
    }
    Ok(gamma_len(n))
}

/// Infallible gamma length for internal use; `n` must be >= 1.
pub(crate) fn gamma_len(n: u64) -> u64 {
    debug_assert!(n >= 1);
    2 * (63 - n.leading_zeros() as u64) + 1
}

/// Bits needed for a fixed-width literal over an alphabet of `n` symbols.
pub fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

/// Append the gamma codeword for `n` to a bit vector.
pub fn encode_gamma(n: u64, out: &mut Vec<bool>) -> Result<(), CodecError> {
    if n == 0 {
        return Err(CodecError::NonPositive);
    }
    let k = 63 - n.leading_zeros() as u64;
    for _ in 0..k {
        out.push(false);
    }
    for i in (0..=k).rev() {
        out.push(n & (1 << i) != 0);
    }
    Ok(())
}

/// Read one gamma codeword starting at `*pos`.
pub fn decode_gamma(bits: &[bool], pos: &mut usize) -> Result<u64, CodecError> {
    let mut k = 0u64;
    while *pos < bits.len() && !bits[*pos] {
        k += 1;
        *pos += 1;
    }
    if *pos + k as usize >= bits.len() + usize::from(k == 0) && *pos >= bits.len() {
        return Err(CodecError::Truncated);
    }
    let mut value = 0u64;
    for _ in 0..=k {
        if *pos >= bits.len() {
            return Err(CodecError::Truncated);
        }
        value = (value << 1) | u64::from(bits[*pos]);
        *pos += 1;
    }
    Ok(value)
}

// ---------------------------------------------------------------------------
// Quantization

/// Codec options shared by a run: fixed precision for real-valued content.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodecParams {
    /// Bits per model parameter / real literal. Half of them are fractional.
    pub precision_bits: u32,
}

impl Default for CodecParams {
    fn default() -> Self {
        Self { precision_bits: 16 }
    }
}

impl CodecParams {
    pub fn quantize(&self, v: f64) -> Quantized {
        Quantized::from_f64(v, self.precision_bits)
    }
}

/// A real value held at a declared fixed-point precision.
///
/// `precision_bits` total, half fractional: with the default 16 bits the
/// representable range is [-128, 128) at a resolution of 1/256.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quantized {
    pub raw: i64,
    pub precision_bits: u32,
}

impl Quantized {
    pub fn from_f64(v: f64, precision_bits: u32) -> Self {
        let scale = Self::scale_of(precision_bits);
        let max = (1i64 << (precision_bits - 1)) - 1;
        let min = -(1i64 << (precision_bits - 1));
        let raw = (v * scale as f64).round();
        let raw = if raw.is_nan() {
            0
        } else {
            raw.clamp(min as f64, max as f64) as i64
        };
        Self { raw, precision_bits }
    }

    fn scale_of(precision_bits: u32) -> i64 {
        1i64 << (precision_bits / 2)
    }

    pub fn value(&self) -> f64 {
        self.raw as f64 / Self::scale_of(self.precision_bits) as f64
    }

    pub fn bits(&self) -> u64 {
        self.precision_bits as u64
    }
}

// ---------------------------------------------------------------------------
// Description atoms

/// The corrected content carried by a residual atom: the symbol a sensor
/// actually read where a covering detector expected something else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolPayload {
    pub sensor: SensorId,
    pub symbol: char,
}

/// One unit of the canonical encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AtomKind {
    /// An active detector, coded by registration index.
    Activation { id: DetectorId },
    /// A residual correction: template slot `slot` (1-based) of `owner`
    /// did not match; the payload carries the erroneous content, if any.
    Correction {
        owner: DetectorId,
        slot: u32,
        payload: Option<SymbolPayload>,
    },
    /// An unexplained symbolic reading.
    LiteralSymbol { sensor: SensorId, symbol: char },
    /// An unexplained real reading, quantized.
    LiteralReal { sensor: SensorId, value: Quantized },
    /// One model parameter at declared precision.
    ModelParam { value: Quantized },
}

/// Exact code length of one atom in bits.
pub fn atom_length(h: &Hierarchy, params: &CodecParams, atom: &AtomKind) -> Result<u64, CodecError> {
    match atom {
        AtomKind::Activation { id } => {
            if h.detector(*id).is_none() {
                return Err(CodecError::UnknownId(id.0));
            }
            gamma_length(id.0 as u64)
        }
        AtomKind::Correction { owner, slot, payload } => {
            if h.detector(*owner).is_none() {
                return Err(CodecError::UnknownId(owner.0));
            }
            let mut bits = gamma_length(*slot as u64)?;
            if let Some(p) = payload {
                bits += literal_symbol_bits(h, p.sensor)?;
            }
            Ok(bits)
        }
        AtomKind::LiteralSymbol { sensor, .. } => literal_symbol_bits(h, *sensor),
        AtomKind::LiteralReal { .. } | AtomKind::ModelParam { .. } => {
            Ok(params.precision_bits as u64)
        }
    }
}

fn literal_symbol_bits(h: &Hierarchy, sensor: SensorId) -> Result<u64, CodecError> {
    let s = h.sensor(sensor).ok_or(CodecError::UnknownId(sensor.0))?;
    match &s.kind {
        SensorKind::Symbolic { alphabet } => Ok(ceil_log2(alphabet.len() as u64)),
        SensorKind::Real => Err(CodecError::UnknownId(sensor.0)),
    }
}

/// Frame cost: count code `gamma(m+1)` plus the atoms' lengths.
pub fn frame_bits(h: &Hierarchy, params: &CodecParams, atoms: &[AtomKind]) -> Result<u64, CodecError> {
    let mut bits = gamma_length(atoms.len() as u64 + 1)?;
    for a in atoms {
        bits += atom_length(h, params, a)?;
    }
    Ok(bits)
}

/// A frame's chosen atoms plus their exact cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDescription {
    pub frame: usize,
    pub atoms: Vec<AtomKind>,
    pub bits: u64,
}

/// A full description: per-frame atom lists and the total bit count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Description {
    pub frames: Vec<FrameDescription>,
    pub total_bits: u64,
}

impl Description {
    pub fn from_frames(h: &Hierarchy, params: &CodecParams, frames: Vec<(usize, Vec<AtomKind>)>) -> Result<Self, CodecError> {
        let mut out = Vec::with_capacity(frames.len());
        let mut total = 0;
        for (frame, atoms) in frames {
            let bits = frame_bits(h, params, &atoms)?;
            total += bits;
            out.push(FrameDescription { frame, atoms, bits });
        }
        Ok(Self { frames: out, total_bits: total })
    }
}

// ---------------------------------------------------------------------------
// Lattice run-length coding (the fixed description tool for Kd profiles)

/// Bits to code a binary lattice: one bit for the initial value plus a gamma
/// code per raster-scan run length. Lossless given the grid dimensions.
pub fn encode_lattice_rle(lat: &Lattice) -> Result<u64, CodecError> {
    if lat.is_empty() {
        return Err(CodecError::EmptyLattice);
    }
    let mut bits = 1u64;
    for run in lat.runs() {
        bits += gamma_len(run);
    }
    Ok(bits)
}

/// Materialize the run-length bitstream (used to prove losslessness).
pub fn lattice_to_bits(lat: &Lattice) -> Result<Vec<bool>, CodecError> {
    if lat.is_empty() {
        return Err(CodecError::EmptyLattice);
    }
    let mut out = Vec::new();
    out.push(lat.get(0, 0));
    for run in lat.runs() {
        encode_gamma(run, &mut out)?;
    }
    Ok(out)
}

/// Decode a run-length bitstream back into a lattice of known dimensions.
pub fn lattice_from_bits(bits: &[bool], rows: usize, cols: usize) -> Result<Lattice, CodecError> {
    if rows == 0 || cols == 0 || bits.is_empty() {
        return Err(CodecError::EmptyLattice);
    }
    let total = rows * cols;
    let mut cells = Vec::with_capacity(total);
    let mut value = bits[0];
    let mut pos = 1usize;
    while cells.len() < total {
        let run = decode_gamma(bits, &mut pos)? as usize;
        for _ in 0..run {
            cells.push(value);
        }
        value = !value;
    }
    if cells.len() != total {
        return Err(CodecError::Truncated);
    }
    Ok(Lattice::from_cells(rows, cols, cells))
}

// ---------------------------------------------------------------------------
// Device cost: the canonical serialized size of a recognition rule

const RULE_TAG_BITS: u64 = 3;

/// Serialized size of a rule in bits; this is the detector's device cost,
/// "the size of the recognition device".
pub fn rule_device_cost(h: &Hierarchy, rule: &Rule) -> u64 {
    match rule {
        Rule::SymbolEquals { sensor, .. } => {
            let sym = literal_symbol_bits(h, *sensor).unwrap_or(0);
            RULE_TAG_BITS + gamma_len(sensor.0 as u64) + sym
        }
        Rule::Threshold { sensor, value, .. } => {
            RULE_TAG_BITS + gamma_len(sensor.0 as u64) + 1 + value.bits()
        }
        Rule::AllOf { inputs } => {
            RULE_TAG_BITS
                + gamma_len(inputs.len() as u64)
                + inputs.iter().map(|d| gamma_len(d.0 as u64)).sum::<u64>()
        }
        Rule::Sequence { slots, max_mismatches } => {
            RULE_TAG_BITS
                + gamma_len(slots.len() as u64)
                + slots
                    .iter()
                    .map(|s| gamma_len(s.input.0 as u64) + gamma_len(s.offset_back as u64 + 1))
                    .sum::<u64>()
                + gamma_len(*max_mismatches as u64 + 1)
        }
        Rule::Automaton { sensor, machine, window } => {
            RULE_TAG_BITS
                + gamma_len(sensor.0 as u64)
                + gamma_len(*window as u64)
                + machine.encoded_bits()
        }
        Rule::ModelFit { sensors, model } => {
            RULE_TAG_BITS
                + gamma_len(sensors.len() as u64)
                + sensors.iter().map(|s| gamma_len(s.0 as u64)).sum::<u64>()
                + model.coeffs.iter().map(|c| c.bits()).sum::<u64>()
                + model.tol.bits()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_lengths_match_definition() {
        assert_eq!(gamma_length(1).unwrap(), 1);
        assert_eq!(gamma_length(2).unwrap(), 3);
        assert_eq!(gamma_length(3).unwrap(), 3);
        assert_eq!(gamma_length(4).unwrap(), 5);
        assert_eq!(gamma_length(64).unwrap(), 13);
        assert!(matches!(gamma_length(0), Err(CodecError::NonPositive)));
    }

    #[test]
    fn gamma_bitstream_round_trips() {
        let values = [1u64, 2, 3, 7, 8, 64, 65, 1023, 1 << 40];
        let mut bits = Vec::new();
        for v in values {
            encode_gamma(v, &mut bits).unwrap();
        }
        let mut pos = 0;
        for v in values {
            assert_eq!(decode_gamma(&bits, &mut pos).unwrap(), v);
        }
        assert_eq!(pos, bits.len());
    }

    #[test]
    fn gamma_codeword_length_agrees_with_gamma_length() {
        for n in 1..2000u64 {
            let mut bits = Vec::new();
            encode_gamma(n, &mut bits).unwrap();
            assert_eq!(bits.len() as u64, gamma_length(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn ceil_log2_edges() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
    }

    #[test]
    fn quantization_round_trips_at_declared_resolution() {
        let params = CodecParams::default();
        let q = params.quantize(1.25);
        assert_eq!(q.value(), 1.25);
        let q = params.quantize(0.126);
        assert!((q.value() - 0.126).abs() <= 0.5 / 256.0);
        // clamped at range edge
        let q = params.quantize(1e9);
        assert!(q.value() < 128.1);
    }
}
