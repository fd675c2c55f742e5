//! Spatial point-pattern statistics: small-scale regularity from nearest
//! neighbors, large-scale aggregation from quadrat counts. Classical
//! single-scale statistics confound the two; computing both at once is what
//! makes the combined organization visible.

use serde::{Deserialize, Serialize};

use crate::error::RecognizerError;
use crate::scalar::{from_usize, Real};

pub const MIN_POINTS: usize = 30;

/// The observation window: the rectangle [0, width] x [0, height].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window<R: Real> {
    pub width: R,
    pub height: R,
}

/// Decision thresholds, both configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternThresholds<R: Real> {
    /// Regular when mean nearest-neighbor distance exceeds the
    /// complete-spatial-randomness expectation by this factor.
    pub regularity_factor: R,
    /// Aggregated when the quadrat count variance/mean ratio reaches this.
    pub vmr_threshold: R,
}

impl Default for PatternThresholds<f64> {
    fn default() -> Self {
        Self { regularity_factor: 1.1, vmr_threshold: 1.5 }
    }
}

/// The computed statistics and both flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternStats<R: Real> {
    pub mean_nn_distance: R,
    /// 0.5 / sqrt(intensity): the CSR expectation.
    pub csr_nn_distance: R,
    pub nn_ratio: R,
    pub quadrat_vmr: R,
    pub regular: bool,
    pub aggregated: bool,
}

/// Nearest-neighbor and quadrat statistics over a rectangular window.
/// Quadrats are full `quadrat_size` squares tiled from the origin; partial
/// edge quadrats (and the points in them) are left out of the counts.
pub fn pattern_stats<R: Real>(
    points: &[(R, R)],
    window: Window<R>,
    quadrat_size: R,
    thresholds: PatternThresholds<R>,
) -> Result<PatternStats<R>, RecognizerError> {
    if points.len() < MIN_POINTS {
        return Err(RecognizerError::TooFew { needed: MIN_POINTS, got: points.len() });
    }
    let area = window.width * window.height;
    if area <= R::zero() || quadrat_size <= R::zero() {
        return Err(RecognizerError::NonPositive);
    }

    // Mean nearest-neighbor distance.
    let mut total = R::zero();
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut best = R::infinity();
        for (j, &(xj, yj)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let d2 = (xi - xj) * (xi - xj) + (yi - yj) * (yi - yj);
            if d2 < best {
                best = d2;
            }
        }
        total = total + best.sqrt();
    }
    let mean_nn = total / from_usize(points.len());
    let intensity = from_usize::<R>(points.len()) / area;
    let csr_nn = R::from_f64(0.5).unwrap() / intensity.sqrt();
    let nn_ratio = mean_nn / csr_nn;

    // Quadrat counts over full tiles.
    let nx = (window.width / quadrat_size).floor().to_f64_lossy() as usize;
    let ny = (window.height / quadrat_size).floor().to_f64_lossy() as usize;
    if nx * ny < 4 {
        return Err(RecognizerError::TooFew { needed: 4, got: nx * ny });
    }
    let mut counts = vec![0usize; nx * ny];
    for &(x, y) in points {
        let cx = (x / quadrat_size).floor().to_f64_lossy() as isize;
        let cy = (y / quadrat_size).floor().to_f64_lossy() as isize;
        if cx >= 0 && cy >= 0 && (cx as usize) < nx && (cy as usize) < ny {
            counts[cy as usize * nx + cx as usize] += 1;
        }
    }
    let m = counts.iter().map(|&c| from_usize::<R>(c)).fold(R::zero(), |a, c| a + c)
        / from_usize(counts.len());
    let var = counts
        .iter()
        .map(|&c| from_usize::<R>(c))
        .fold(R::zero(), |a, c| a + (c - m) * (c - m))
        / from_usize(counts.len());
    let vmr = if m > R::zero() { var / m } else { R::zero() };

    Ok(PatternStats {
        mean_nn_distance: mean_nn,
        csr_nn_distance: csr_nn,
        nn_ratio,
        quadrat_vmr: vmr,
        regular: nn_ratio >= thresholds.regularity_factor,
        aggregated: vmr >= thresholds.vmr_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn window() -> Window<f64> {
        Window { width: 100.0, height: 100.0 }
    }

    #[test]
    fn csr_points_raise_neither_flag() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let points: Vec<(f64, f64)> = (0..400)
            .map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        let stats = pattern_stats(&points, window(), 10.0, PatternThresholds::default()).unwrap();
        assert!(!stats.regular, "nn ratio {}", stats.nn_ratio);
        assert!(!stats.aggregated, "vmr {}", stats.quadrat_vmr);
    }

    #[test]
    fn perfect_grid_is_regular_but_not_aggregated() {
        // spacing 5: intensity 1/25, CSR expectation 2.5, observed 5
        let points: Vec<(f64, f64)> = (0..20)
            .flat_map(|i| (0..20).map(move |j| (2.5 + 5.0 * i as f64, 2.5 + 5.0 * j as f64)))
            .collect();
        let stats = pattern_stats(&points, window(), 10.0, PatternThresholds::default()).unwrap();
        assert!((stats.nn_ratio - 2.0).abs() < 1e-9);
        assert!(stats.regular);
        assert!(!stats.aggregated, "vmr {}", stats.quadrat_vmr);
    }

    #[test]
    fn clustered_points_with_inhibition_raise_both_flags() {
        // Clusters with a minimum spacing inside each (competition) and
        // large empty regions between them (clustered establishment). The
        // within-cluster spacing exceeds the CSR expectation computed from
        // the diluted global intensity, so both flags fire.
        let centers = [(15.0, 15.0), (65.0, 15.0), (15.0, 65.0), (65.0, 65.0), (40.0, 40.0), (78.0, 78.0)];
        let mut points = Vec::new();
        for &(cx, cy) in &centers {
            for i in 0..6 {
                for j in 0..6 {
                    points.push((cx + 5.0 * i as f64 - 12.5, cy + 5.0 * j as f64 - 12.5));
                }
            }
        }
        let stats = pattern_stats(&points, window(), 20.0, PatternThresholds::default()).unwrap();
        assert!(stats.regular, "nn ratio {}", stats.nn_ratio);
        assert!(stats.aggregated, "vmr {}", stats.quadrat_vmr);
    }

    #[test]
    fn too_few_points_error() {
        let points = vec![(1.0f64, 1.0); 10];
        assert!(matches!(
            pattern_stats(&points, window(), 10.0, PatternThresholds::default()),
            Err(RecognizerError::TooFew { needed: 30, got: 10 })
        ));
    }
}
