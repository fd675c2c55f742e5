//! Fractal dimension from the perimeter-area relation, and two-regime
//! dimension shifts located by segmented regression.
//!
//! For patches obeying P ~ A^(D/2), the slope of log-perimeter against
//! log-area is D/2. A shift in dimension across an area scale shows up as a
//! breakpoint between two log-log regimes; the breakpoint is chosen over
//! the observed split positions by total squared error.

use serde::{Deserialize, Serialize};

use crate::error::RecognizerError;
use crate::linalg::line_fit;
use crate::scalar::Real;

/// Lower patch count for a single-regime estimate.
pub const MIN_PATCHES: usize = 3;
/// Lower patch count for a two-regime search (each side needs a fit).
pub const MIN_SHIFT_PATCHES: usize = 8;

/// A perimeter-area dimension estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate<R: Real> {
    /// Slope of log P on log A.
    pub slope: R,
    /// D = 2 * slope.
    pub dimension: R,
    /// Residual sum of squares of the log-log fit.
    pub sse: R,
    pub patches: usize,
    /// Whether D fell in the geometrically meaningful band [1, 2].
    pub in_range: bool,
}

/// Fit log P = b0 + slope * log A over (area, perimeter) patches.
pub fn fractal_dimension<R: Real>(
    patches: &[(R, R)],
) -> Result<DimensionEstimate<R>, RecognizerError> {
    if patches.len() < MIN_PATCHES {
        return Err(RecognizerError::TooFew { needed: MIN_PATCHES, got: patches.len() });
    }
    if patches.iter().any(|&(a, p)| a <= R::zero() || p <= R::zero()) {
        return Err(RecognizerError::NonPositive);
    }
    let xs: Vec<R> = patches.iter().map(|&(a, _)| a.ln()).collect();
    let ys: Vec<R> = patches.iter().map(|&(_, p)| p.ln()).collect();
    let (_, slope, sse) = line_fit(&xs, &ys);
    let dimension = slope * R::from_f64(2.0).unwrap();
    let slack = R::from_f64(1e-9).unwrap();
    Ok(DimensionEstimate {
        slope,
        dimension,
        sse,
        patches: patches.len(),
        in_range: dimension >= R::one() - slack && dimension <= R::from_f64(2.0).unwrap() + slack,
    })
}

/// A located dimension shift: two regimes split at a breakpoint area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionShift<R: Real> {
    /// Geometric mean of the areas flanking the chosen split.
    pub breakpoint_area: R,
    pub low: DimensionEstimate<R>,
    pub high: DimensionEstimate<R>,
    /// Total SSE of the two-segment fit.
    pub split_sse: R,
    /// SSE of the single-regime fit, for the improvement test.
    pub single_sse: R,
}

impl<R: Real> DimensionShift<R> {
    /// How much splitting improved the fit; near zero on single-regime data.
    pub fn sse_gain(&self) -> R {
        self.single_sse - self.split_sse
    }
}

/// Two-segment least squares in log-log space over candidate split
/// positions. Patches must span at least a decade of area.
pub fn dimension_shift<R: Real>(
    patches: &[(R, R)],
) -> Result<DimensionShift<R>, RecognizerError> {
    if patches.len() < MIN_SHIFT_PATCHES {
        return Err(RecognizerError::TooFew { needed: MIN_SHIFT_PATCHES, got: patches.len() });
    }
    if patches.iter().any(|&(a, p)| a <= R::zero() || p <= R::zero()) {
        return Err(RecognizerError::NonPositive);
    }
    let mut sorted: Vec<(R, R)> = patches.to_vec();
    sorted.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let min_area = sorted.first().unwrap().0;
    let max_area = sorted.last().unwrap().0;
    if max_area / min_area < R::from_f64(10.0).unwrap() {
        return Err(RecognizerError::NoSpan);
    }

    let single = fractal_dimension(&sorted)?;
    let mut best: Option<(usize, R)> = None;
    for split in MIN_PATCHES..=(sorted.len() - MIN_PATCHES) {
        let low = fractal_dimension(&sorted[..split])?;
        let high = fractal_dimension(&sorted[split..])?;
        let total = low.sse + high.sse;
        if best.map(|(_, b)| total < b).unwrap_or(true) {
            best = Some((split, total));
        }
    }
    let (split, split_sse) = best.expect("at least one candidate split");
    let low = fractal_dimension(&sorted[..split])?;
    let high = fractal_dimension(&sorted[split..])?;
    let breakpoint_area = (sorted[split - 1].0 * sorted[split].0).sqrt();
    Ok(DimensionShift {
        breakpoint_area,
        low,
        high,
        split_sse,
        single_sse: single.sse,
    })
}
