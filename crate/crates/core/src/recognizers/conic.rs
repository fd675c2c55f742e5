//! Algebraic least-squares conic fitting and classification.
//!
//! The fitted conic ax^2 + bxy + cy^2 + dx + ey + f = 0 is the smallest
//! eigenvector of the design scatter matrix under a unit coefficient norm,
//! computed on centered and scaled points for conditioning and mapped back.
//! Classification follows the sign of the discriminant b^2 - 4ac, with a
//! rank check on the full conic matrix for degenerate fits (line pairs,
//! repeated lines from collinear input).

use serde::{Deserialize, Serialize};

use crate::error::RecognizerError;
use crate::linalg::smallest_eigenvector;
use crate::scalar::{from_usize, Real};

/// Discriminant tolerance: |b^2 - 4ac| at or below this (on unit-norm
/// coefficients) classifies as a parabola.
pub const DEFAULT_CLASS_EPS: f64 = 1e-7;

/// Determinant tolerance below which the conic matrix counts as
/// rank-deficient.
pub const DEFAULT_DEGENERATE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConicClass {
    Ellipse,
    Parabola,
    Hyperbola,
    Degenerate,
}

/// A fitted conic with unit-norm coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicModel<R: Real> {
    /// (a, b, c, d, e, f) of ax^2 + bxy + cy^2 + dx + ey + f = 0.
    pub coeffs: [R; 6],
    pub class: ConicClass,
}

impl<R: Real> ConicModel<R> {
    pub fn from_coeffs(coeffs: [R; 6]) -> Self {
        let coeffs = canonicalize(coeffs);
        let class = classify(&coeffs, R::from_f64(DEFAULT_CLASS_EPS).unwrap());
        Self { coeffs, class }
    }

    /// Algebraic residual |ax^2 + bxy + cy^2 + dx + ey + f| at a point.
    pub fn residual(&self, p: (R, R)) -> R {
        let (x, y) = p;
        let [a, b, c, d, e, f] = self.coeffs;
        (a * x * x + b * x * y + c * y * y + d * x + e * y + f).abs()
    }

    /// The bifurcation flag: true when the point's residual exceeds `tol`.
    pub fn flag(&self, p: (R, R), tol: R) -> bool {
        self.residual(p) > tol
    }
}

/// Classify unit-norm coefficients by the discriminant sign, with the
/// rank-deficiency check first.
pub fn classify<R: Real>(coeffs: &[R; 6], class_eps: R) -> ConicClass {
    let [a, b, c, d, e, f] = *coeffs;
    let two = R::from_f64(2.0).unwrap();
    // det of [[a, b/2, d/2], [b/2, c, e/2], [d/2, e/2, f]]
    let (hb, hd, he) = (b / two, d / two, e / two);
    let det = a * (c * f - he * he) - hb * (hb * f - he * hd) + hd * (hb * he - c * hd);
    if det.abs() <= R::from_f64(DEFAULT_DEGENERATE_EPS).unwrap() {
        return ConicClass::Degenerate;
    }
    let disc = b * b - R::from_f64(4.0).unwrap() * a * c;
    if disc.abs() <= class_eps {
        ConicClass::Parabola
    } else if disc < R::zero() {
        ConicClass::Ellipse
    } else {
        ConicClass::Hyperbola
    }
}

/// Least-squares conic through at least six non-collinear points.
pub fn fit_conic<R: Real>(points: &[(R, R)]) -> Result<ConicModel<R>, RecognizerError> {
    if points.len() < 6 {
        return Err(RecognizerError::TooFew { needed: 6, got: points.len() });
    }

    // Center and scale for conditioning.
    let n = from_usize::<R>(points.len());
    let mx = points.iter().fold(R::zero(), |a, p| a + p.0) / n;
    let my = points.iter().fold(R::zero(), |a, p| a + p.1) / n;
    let mean_dist = points
        .iter()
        .fold(R::zero(), |a, p| {
            a + ((p.0 - mx) * (p.0 - mx) + (p.1 - my) * (p.1 - my)).sqrt()
        })
        / n;
    let s = if mean_dist > R::zero() {
        R::from_f64(std::f64::consts::SQRT_2).unwrap() / mean_dist
    } else {
        return Err(RecognizerError::Degenerate);
    };

    // Scatter matrix of [x^2, xy, y^2, x, y, 1] rows.
    let mut scatter = vec![vec![R::zero(); 6]; 6];
    for &(px, py) in points {
        let x = (px - mx) * s;
        let y = (py - my) * s;
        let row = [x * x, x * y, y * y, x, y, R::one()];
        for i in 0..6 {
            for j in 0..6 {
                scatter[i][j] = scatter[i][j] + row[i] * row[j];
            }
        }
    }

    let v = smallest_eigenvector(&scatter);
    let [na, nb, nc, nd, ne, nf] = [v[0], v[1], v[2], v[3], v[4], v[5]];

    // Undo x' = s(x - mx), y' = s(y - my).
    let s2 = s * s;
    let two = R::from_f64(2.0).unwrap();
    let a = na * s2;
    let b = nb * s2;
    let c = nc * s2;
    let d = -two * na * s2 * mx - nb * s2 * my + nd * s;
    let e = -nb * s2 * mx - two * nc * s2 * my + ne * s;
    let f = na * s2 * mx * mx + nb * s2 * mx * my + nc * s2 * my * my - nd * s * mx - ne * s * my
        + nf;

    let model = ConicModel::from_coeffs([a, b, c, d, e, f]);
    if model.class == ConicClass::Degenerate {
        return Err(RecognizerError::Degenerate);
    }
    Ok(model)
}

fn canonicalize<R: Real>(coeffs: [R; 6]) -> [R; 6] {
    let norm = coeffs
        .iter()
        .fold(R::zero(), |a, &c| a + c * c)
        .sqrt();
    if norm <= R::zero() {
        return coeffs;
    }
    let mut out = coeffs.map(|c| c / norm);
    let lead = out
        .iter()
        .find(|c| c.abs() > R::from_f64(1e-12).unwrap())
        .copied()
        .unwrap_or(R::one());
    if lead < R::zero() {
        out = out.map(|c| -c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle_points(n: usize, r: f64) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (r * t.cos(), r * t.sin())
            })
            .collect()
    }

    #[test]
    fn circle_classifies_as_ellipse() {
        let m = fit_conic(&circle_points(12, 1.0)).unwrap();
        assert_eq!(m.class, ConicClass::Ellipse);
        for p in circle_points(50, 1.0) {
            assert!(m.residual(p) < 1e-10);
        }
    }

    #[test]
    fn parabola_discriminant_vanishes() {
        let pts: Vec<(f64, f64)> = (-6..=6).map(|i| (i as f64 / 2.0, (i as f64 / 2.0).powi(2))).collect();
        let m = fit_conic(&pts).unwrap();
        assert_eq!(m.class, ConicClass::Parabola);
    }

    #[test]
    fn rectangular_hyperbola_classifies_as_hyperbola() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64 / 2.0, 2.0 / i as f64)).collect();
        let m = fit_conic(&pts).unwrap();
        assert_eq!(m.class, ConicClass::Hyperbola);
    }

    #[test]
    fn too_few_and_collinear_points_are_rejected() {
        let pts = circle_points(5, 1.0);
        assert!(matches!(
            fit_conic(&pts),
            Err(RecognizerError::TooFew { needed: 6, got: 5 })
        ));
        let line: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        assert!(matches!(fit_conic(&line), Err(RecognizerError::Degenerate)));
    }

    #[test]
    fn flag_thresholds_on_the_analytic_residual() {
        let m = fit_conic(&circle_points(12, 1.0)).unwrap();
        // unit circle has unit-norm coefficients (1,0,1,0,0,-1)/sqrt(3);
        // the residual at (2, 0) is |4 - 1| / sqrt(3) = sqrt(3)
        let expected = 3.0 / 3.0f64.sqrt();
        assert_relative_eq!(m.residual((2.0, 0.0)), expected, epsilon = 1e-9);
        assert!(m.flag((2.0, 0.0), expected * 0.9));
        assert!(!m.flag((2.0, 0.0), expected * 1.1));
        assert!(!m.flag((1.0, 0.0), 1e-9));
        assert!(!m.flag((2.0, 0.0), f64::INFINITY));
    }

    #[test]
    fn classification_invariant_under_rotation_and_scale() {
        let sets: Vec<(Vec<(f64, f64)>, ConicClass)> = vec![
            (circle_points(12, 1.0), ConicClass::Ellipse),
            (
                (-6..=6).map(|i| (i as f64 / 2.0, (i as f64 / 2.0).powi(2))).collect(),
                ConicClass::Parabola,
            ),
            (
                (1..=10).map(|i| (i as f64 / 2.0, 2.0 / i as f64)).collect(),
                ConicClass::Hyperbola,
            ),
        ];
        for (points, class) in sets {
            for (angle, scale) in [(0.3, 2.0), (1.1, 0.5), (2.5, 10.0)] {
                let (sin, cos) = (angle as f64).sin_cos();
                let moved: Vec<(f64, f64)> = points
                    .iter()
                    .map(|&(x, y)| {
                        (scale * (cos * x - sin * y), scale * (sin * x + cos * y))
                    })
                    .collect();
                let m = fit_conic(&moved).unwrap();
                assert_eq!(m.class, class, "angle {angle}, scale {scale}");
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let pts: Vec<(f32, f32)> = circle_points(12, 1.0)
            .into_iter()
            .map(|(x, y)| (x as f32, y as f32))
            .collect();
        let m = fit_conic(&pts).unwrap();
        assert_eq!(m.class, ConicClass::Ellipse);
    }
}
