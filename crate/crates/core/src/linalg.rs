//! Minimal dense linear algebra for the fitting kernels: a cyclic Jacobi
//! eigensolver for small symmetric matrices, generic over the scalar.

use crate::scalar::Real;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors as columns). Suitable for the small
/// (<= 6x6) scatter matrices the fitters produce.
pub fn jacobi_eigen<R: Real>(a: &[Vec<R>]) -> (Vec<R>, Vec<Vec<R>>) {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<R>> = a.to_vec();
    let mut v: Vec<Vec<R>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { R::one() } else { R::zero() }).collect())
        .collect();

    let eps = R::epsilon() * R::from_f64(100.0).unwrap();
    for _sweep in 0..100 {
        let mut off = R::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + m[i][j] * m[i][j];
            }
        }
        let scale = (0..n).fold(R::zero(), |acc, i| acc + m[i][i] * m[i][i]);
        if off <= eps * eps * (scale + R::one()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() <= R::epsilon() * (m[p][p].abs() + m[q][q].abs()) {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (R::from_f64(2.0).unwrap() * m[p][q]);
                let t = {
                    let sign = if theta >= R::zero() { R::one() } else { -R::one() };
                    sign / (theta.abs() + (theta * theta + R::one()).sqrt())
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let values = (0..n).map(|i| m[i][i]).collect();
    (values, v)
}

/// Eigenvector of the smallest eigenvalue of a symmetric matrix.
pub fn smallest_eigenvector<R: Real>(a: &[Vec<R>]) -> Vec<R> {
    let n = a.len();
    let (values, vectors) = jacobi_eigen(a);
    let mut best = 0;
    for i in 1..n {
        if values[i] < values[best] {
            best = i;
        }
    }
    (0..n).map(|k| vectors[k][best]).collect()
}

/// Ordinary least squares for y = b0 + b1 x. Returns (intercept, slope, sse).
pub fn line_fit<R: Real>(xs: &[R], ys: &[R]) -> (R, R, R) {
    debug_assert_eq!(xs.len(), ys.len());
    let n = crate::scalar::from_usize::<R>(xs.len());
    let mean_x = xs.iter().fold(R::zero(), |a, &x| a + x) / n;
    let mean_y = ys.iter().fold(R::zero(), |a, &y| a + y) / n;
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mean_x) * (x - mean_x);
        sxy = sxy + (x - mean_x) * (y - mean_y);
    }
    let slope = if sxx > R::zero() { sxy / sxx } else { R::zero() };
    let intercept = mean_y - slope * mean_x;
    let mut sse = R::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        sse = sse + r * r;
    }
    (intercept, slope, sse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jacobi_diagonalizes_a_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let a = vec![vec![2.0f64, 1.0], vec![1.0, 2.0]];
        let (mut values, _) = jacobi_eigen(&a);
        values.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_relative_eq!(values[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(values[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_eigenvectors_satisfy_av_eq_lambda_v() {
        let a = vec![
            vec![4.0f64, 1.0, 0.5],
            vec![1.0, 3.0, -0.25],
            vec![0.5, -0.25, 2.0],
        ];
        let (values, vectors) = jacobi_eigen(&a);
        for j in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|k| a[i][k] * vectors[k][j]).sum();
                assert_relative_eq!(av, values[j] * vectors[i][j], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn line_fit_recovers_exact_lines() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let (b0, b1, sse) = line_fit(&xs, &ys);
        assert_relative_eq!(b0, 3.0, epsilon = 1e-12);
        assert_relative_eq!(b1, -2.0, epsilon = 1e-12);
        assert!(sse < 1e-20);
    }

    #[test]
    fn smallest_eigenvector_works_on_f32_too() {
        let a = vec![vec![2.0f32, 0.0], vec![0.0, 5.0]];
        let v = smallest_eigenvector(&a);
        assert!(v[0].abs() > 0.99 && v[1].abs() < 1e-3);
    }
}
