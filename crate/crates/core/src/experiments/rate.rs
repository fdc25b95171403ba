use super::ExperimentError;
use serde::{Deserialize, Serialize};

/// Power law `e ~ c x^alpha` fitted in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub alpha: f64,
    pub c: f64,
    /// RMS of the log deviations.
    pub residual: f64,
}

pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit, ExperimentError> {
    if pairs.len() < 3 {
        return Err(ExperimentError::TooFewPoints(pairs.len()));
    }
    if pairs.iter().any(|&(x, e)| !(x > 0.0 && e > 0.0 && x.is_finite() && e.is_finite())) {
        return Err(ExperimentError::NonPositiveData);
    }
    let n = pairs.len() as f64;
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::InvalidConfig("rate fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let b = my - alpha * mx;
    let residual = (lx.iter().zip(&ly).map(|(x, y)| (y - b - alpha * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit { alpha, c: b.exp(), residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_power_laws() {
        let pairs: Vec<(f64, f64)> = (1..=5).map(|n| (0.5f64.powi(n), 3.0 * 0.25f64.powi(n))).collect();
        let f = fit_rate(&pairs).unwrap();
        assert!((f.alpha - 2.0).abs() < 1e-12 && (f.c - 3.0).abs() < 1e-10 && f.residual < 1e-12);
        let pairs: Vec<(f64, f64)> = (1..=5).map(|n| (0.5f64.powi(n), 5.0 * 0.5f64.powi(n))).collect();
        let f = fit_rate(&pairs).unwrap();
        assert!((f.alpha - 1.0).abs() < 1e-12 && (f.c - 5.0).abs() < 1e-10);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let pairs: Vec<(f64, f64)> =
            (1..=8).map(|n| (0.5f64.powi(n), 2.0 * 0.5f64.powi(2 * n) * rng.gen_range(0.99..1.01))).collect();
        assert!((fit_rate(&pairs).unwrap().alpha - 2.0).abs() < 0.05);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_rate(&[(1.0, 1.0), (2.0, 2.0)]), Err(ExperimentError::TooFewPoints(2))));
        assert!(matches!(fit_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(ExperimentError::NonPositiveData)));
    }
}
