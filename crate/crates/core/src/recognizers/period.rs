//! Periodicity detection via the temporal autocorrelation function.

use crate::error::RecognizerError;
use crate::scalar::{from_usize, Real};

/// Smallest lag whose normalized autocorrelation reaches `threshold` and is
/// a global maximum among lags up to `max_lag`; `None` when no lag
/// qualifies. Needs at least `2 * max_lag` samples.
pub fn detect_period<R: Real>(
    signal: &[R],
    max_lag: usize,
    threshold: R,
) -> Result<Option<usize>, RecognizerError> {
    if max_lag == 0 || signal.len() < 2 * max_lag {
        return Err(RecognizerError::TooShort {
            needed: 2 * max_lag.max(1),
            got: signal.len(),
        });
    }
    let r = autocorrelation(signal, max_lag);
    let mut best = R::neg_infinity();
    for &v in &r {
        if v > best {
            best = v;
        }
    }
    let tie = R::from_f64(1e-9).unwrap();
    for (i, &v) in r.iter().enumerate() {
        if v >= threshold && v >= best - tie {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

/// Normalized autocorrelation at lags `1..=max_lag` (mean removed, overlap
/// corrected so an exactly periodic signal scores 1 at its period).
pub fn autocorrelation<R: Real>(signal: &[R], max_lag: usize) -> Vec<R> {
    let n = signal.len();
    let mean = signal.iter().fold(R::zero(), |a, &x| a + x) / from_usize(n);
    let var = signal
        .iter()
        .fold(R::zero(), |a, &x| a + (x - mean) * (x - mean))
        / from_usize(n);
    let mut out = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        if var <= R::zero() {
            out.push(R::zero());
            continue;
        }
        let overlap = n - lag;
        let mut acc = R::zero();
        for t in 0..overlap {
            acc = acc + (signal[t] - mean) * (signal[t + lag] - mean);
        }
        out.push(acc / from_usize(overlap) / var);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_signal_has_period_two() {
        let signal: Vec<f64> = (0..64).map(|t| (t % 2) as f64).collect();
        assert_eq!(detect_period(&signal, 16, 0.9).unwrap(), Some(2));
    }

    #[test]
    fn sine_of_period_eight_is_found() {
        let signal: Vec<f64> = (0..64)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 8.0).sin())
            .collect();
        // brute-force check that lag 8 is the first global maximum >= 0.9
        let r = autocorrelation(&signal, 32);
        let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(r[7] >= max - 1e-9, "lag 8 is a global maximum");
        assert_eq!(detect_period(&signal, 32, 0.9).unwrap(), Some(8));
    }

    #[test]
    fn seeded_noise_has_no_period_at_high_threshold() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let signal: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert_eq!(detect_period(&signal, 32, 0.9).unwrap(), None);
    }

    #[test]
    fn too_short_signals_error() {
        let signal = vec![0.0f64; 10];
        assert!(matches!(
            detect_period(&signal, 8, 0.9),
            Err(RecognizerError::TooShort { needed: 16, got: 10 })
        ));
    }

    #[test]
    fn time_shift_does_not_change_the_period() {
        for shift in [1usize, 3, 5] {
            let base: Vec<f64> = (0..96)
                .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 6.0).sin())
                .collect();
            let shifted: Vec<f64> = (0..96)
                .map(|t| (2.0 * std::f64::consts::PI * (t + shift) as f64 / 6.0).sin())
                .collect();
            assert_eq!(
                detect_period(&base, 24, 0.9).unwrap(),
                detect_period(&shifted, 24, 0.9).unwrap()
            );
        }
    }
}
