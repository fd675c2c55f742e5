//! Relative complexity: the description length of a system's activation
//! record under the canonical codec, after redundancy elimination.
//!
//! Two accounting modes exist. State-only charges nothing for the devices
//! themselves, so registering a detector that never fires changes nothing,
//! bit for bit. With-device-cost additionally charges each detector used in
//! the selection its serialized rule size, once per trace — the cost of
//! detection.

use serde::{Deserialize, Serialize};

use crate::codec::{self, CodecParams};
use crate::error::ComplexityError;
use crate::hierarchy::Hierarchy;
use crate::lattice::Lattice;
use crate::selection::{reduce_trace, ReduceOptions, Selection};
use crate::trace::SystemTrace;

/// How device sizes enter the account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AccountingMode {
    #[default]
    StateOnly,
    WithDeviceCost,
}

/// The bit accounting for one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub per_frame: Vec<u64>,
    pub total_bits: u64,
    pub mode: AccountingMode,
    pub selection: Selection,
}

/// Describe a trace and total its code length.
pub fn relative_complexity(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    mode: AccountingMode,
) -> Result<ComplexityReport, ComplexityError> {
    relative_complexity_with(h, params, trace, mode, ReduceOptions::default())
}

/// As [`relative_complexity`], with reduction options (scope restriction or
/// a detector excluded from the describing repertoire).
pub fn relative_complexity_with(
    h: &Hierarchy,
    params: &CodecParams,
    trace: &SystemTrace,
    mode: AccountingMode,
    opts: ReduceOptions,
) -> Result<ComplexityReport, ComplexityError> {
    let selection = reduce_trace(h, params, trace, opts);
    let per_frame = selection.per_frame_bits(h, params)?;
    let mut total_bits: u64 = per_frame.iter().sum();
    if mode == AccountingMode::WithDeviceCost {
        for id in selection.used_detectors() {
            total_bits += h.detector(id).map(|d| d.device_cost_bits).unwrap_or(0);
        }
    }
    Ok(ComplexityReport { per_frame, total_bits, mode, selection })
}

// ---------------------------------------------------------------------------
// Kd profiles: complexity through observational tools of a given diameter

/// Description length of a lattice seen through increasing perceptive
/// diameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdProfile {
    /// (diameter, bits) with diameters strictly increasing.
    pub entries: Vec<(usize, u64)>,
}

/// Code the lattice at each diameter: coarse-grain into d-by-d blocks
/// (majority rule, ties to 0, ragged edges truncated), then run-length code.
pub fn kd_profile(lat: &Lattice, diameters: &[usize]) -> Result<KdProfile, ComplexityError> {
    if lat.is_empty() {
        return Err(ComplexityError::Codec(crate::error::CodecError::EmptyLattice));
    }
    let min_dim = lat.rows().min(lat.cols());
    let mut entries = Vec::with_capacity(diameters.len());
    let mut prev = 0usize;
    for &d in diameters {
        if d == 0 || d <= prev && prev != 0 {
            return Err(ComplexityError::TooShort);
        }
        if d > min_dim {
            return Err(ComplexityError::DiameterTooLarge(d, min_dim));
        }
        let coarse = if d == 1 { lat.clone() } else { lat.coarse_grain(d) };
        entries.push((d, codec::encode_lattice_rle(&coarse)?));
        prev = d;
    }
    if entries.is_empty() {
        return Err(ComplexityError::TooShort);
    }
    Ok(KdProfile { entries })
}

/// The diameter with the largest complexity drop from its predecessor;
/// ties go to the smallest diameter.
pub fn kd_shift(profile: &KdProfile) -> Result<usize, ComplexityError> {
    if profile.entries.len() < 2 {
        return Err(ComplexityError::TooShort);
    }
    let mut best_d = 0usize;
    let mut best_drop = i128::MIN;
    for pair in profile.entries.windows(2) {
        let (_, prev_bits) = pair[0];
        let (d, bits) = pair[1];
        let drop = prev_bits as i128 - bits as i128;
        if drop > best_drop {
            best_drop = drop;
            best_d = d;
        }
    }
    Ok(best_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_lattice_rle;

    #[test]
    fn lattice_pinned_lengths() {
        assert_eq!(encode_lattice_rle(&Lattice::filled(8, 8, false)).unwrap(), 14);
        assert_eq!(encode_lattice_rle(&Lattice::checkerboard(8, 8)).unwrap(), 65);
        assert_eq!(encode_lattice_rle(&Lattice::filled(1, 1, false)).unwrap(), 2);
    }

    #[test]
    fn kd_profile_all_zeros() {
        let lat = Lattice::filled(8, 8, false);
        let profile = kd_profile(&lat, &[1, 2]).unwrap();
        assert_eq!(profile.entries, vec![(1, 14), (2, 10)]);
        assert_eq!(kd_shift(&profile).unwrap(), 2);
    }

    #[test]
    fn kd_profile_checkerboard_drops_sharply_at_two() {
        let lat = Lattice::checkerboard(8, 8);
        let profile = kd_profile(&lat, &[1, 2]).unwrap();
        assert_eq!(profile.entries, vec![(1, 65), (2, 10)]);
        assert_eq!(kd_shift(&profile).unwrap(), 2);
    }

    #[test]
    fn kd_diameter_equal_to_side_gives_single_cell() {
        let lat = Lattice::checkerboard(8, 8);
        let profile = kd_profile(&lat, &[8]).unwrap();
        assert_eq!(profile.entries, vec![(8, 2)]);
    }

    #[test]
    fn kd_errors() {
        let lat = Lattice::checkerboard(8, 8);
        assert!(matches!(
            kd_profile(&lat, &[9]),
            Err(ComplexityError::DiameterTooLarge(9, 8))
        ));
        let single = kd_profile(&lat, &[1]).unwrap();
        assert!(matches!(kd_shift(&single), Err(ComplexityError::TooShort)));
    }
}
