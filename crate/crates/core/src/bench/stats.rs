use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BenchError;

/// Resample count used when none is configured.
pub const DEFAULT_RESAMPLES: usize = 1000;

/// Sample mean and twice the standard deviation of `resamples` bootstrap means.
pub fn bootstrap_stats(values: &[f64], resamples: usize, seed: u64) -> Result<(f64, f64), BenchError> {
    if values.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    if resamples == 0 {
        return Err(BenchError::InvalidConfig("resamples must be at least 1".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let mm = means.iter().sum::<f64>() / resamples as f64;
    let var = means.iter().map(|m| (m - mm).powi(2)).sum::<f64>() / resamples as f64;
    Ok((mean, 2.0 * var.sqrt()))
}

/// Fraction of edges by which `cut` trails the best known cut.
pub fn relative_error(best_known: f64, cut: f64, edges: usize) -> f64 {
    (best_known - cut) / edges as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values() {
        assert_eq!(bootstrap_stats(&[3.5; 7], 100, 1).unwrap(), (3.5, 0.0));
    }

    #[test]
    fn bernoulli_pair() {
        // resampled mean of {0, 1} with n = 2 has variance 0.25 / 2
        let (mean, two_sigma) = bootstrap_stats(&[0.0, 1.0], 100_000, 2).unwrap();
        assert_eq!(mean, 0.5);
        let expected = 2.0 * (0.25f64 / 2.0).sqrt();
        assert!((two_sigma - expected).abs() < 0.05 * expected, "{two_sigma}");
    }

    #[test]
    fn deterministic_and_validated() {
        let v: Vec<f64> = (0..20).map(|i| (i * i % 7) as f64).collect();
        assert_eq!(bootstrap_stats(&v, 500, 3).unwrap(), bootstrap_stats(&v, 500, 3).unwrap());
        assert!(matches!(bootstrap_stats(&[], 10, 0), Err(BenchError::EmptyInput)));
        assert!(bootstrap_stats(&v, 0, 0).is_err());
    }

    #[test]
    fn table_row() {
        assert!((relative_error(3064.0, 3026.0, 4694) - 0.0081).abs() < 5e-4);
    }
}
