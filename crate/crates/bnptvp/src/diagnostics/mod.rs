//! Posterior summaries and convergence diagnostics.

mod geweke;
mod summary;

pub use geweke::{
    geweke_joint_test, geweke_joint_test_with_fault, GewekeFault, GewekeReport, GewekeStat,
};
pub use summary::{summarize, ParameterSummary, SummaryTable};

#[derive(Debug, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("draw set is empty")]
    EmptyDraws,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("chains disagree on dimensions: {0}")]
    ChainMismatch(String),
}

/// Effective sample size by the initial-monotone-sequence estimator.
/// `None` for traces whose variance vanishes.
pub fn ess_initial_monotone(trace: &[f64]) -> Option<f64> {
    let n = trace.len();
    if n < 4 {
        return None;
    }
    let mean = trace.iter().sum::<f64>() / n as f64;
    let c0 = trace.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if !(c0 > 0.0) {
        return None;
    }
    let autocov = |lag: usize| -> f64 {
        trace[..n - lag]
            .iter()
            .zip(&trace[lag..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / n as f64
    };
    // Paired sums Gamma_m = c_{2m} + c_{2m+1}, kept while positive and
    // non-increasing.
    let mut sum_pairs = 0.0;
    let mut previous = f64::INFINITY;
    let mut m = 0usize;
    while 2 * m + 1 < n {
        let pair = autocov(2 * m) + autocov(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(previous);
        sum_pairs += pair;
        previous = pair;
        m += 1;
    }
    let tau = (2.0 * sum_pairs - c0) / c0;
    Some(n as f64 / tau.max(1.0 / n as f64))
}

/// Split-chain potential scale reduction. Each chain is halved; needs at
/// least two chains (or one chain long enough to split) and nonzero
/// within-chain variance.
pub fn split_rhat(chains: &[&[f64]]) -> Option<f64> {
    let min_len = chains.iter().map(|c| c.len()).min()?;
    if min_len < 4 {
        return None;
    }
    let half = min_len / 2;
    let mut splits: Vec<&[f64]> = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        splits.push(&chain[..half]);
        splits.push(&chain[half..2 * half]);
    }
    let m = splits.len() as f64;
    let n = half as f64;
    let means: Vec<f64> = splits
        .iter()
        .map(|c| c.iter().sum::<f64>() / n)
        .collect();
    let vars: Vec<f64> = splits
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0))
        .collect();
    let grand = means.iter().sum::<f64>() / m;
    let between = n / (m - 1.0) * means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>();
    let within = vars.iter().sum::<f64>() / m;
    if !(within > 0.0) {
        return None;
    }
    Some((((n - 1.0) / n * within + between / n) / within).sqrt())
}

/// Kolmogorov-Smirnov distance between a sorted sample and a reference CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Empirical quantile by linear interpolation on a sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn ess_of_iid_trace_is_near_n() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let n = 10_000;
        let trace: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let ess = ess_initial_monotone(&trace).unwrap();
        assert!(
            (ess - n as f64).abs() < 0.1 * n as f64,
            "iid ESS {ess} should be within 10% of {n}"
        );
    }

    #[test]
    fn ess_of_ar1_trace_matches_autocorrelation_formula() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let n = 200_000;
        let rho = 0.9f64;
        let mut x = 0.0;
        let trace: Vec<f64> = (0..n)
            .map(|_| {
                x = rho * x
                    + (1.0 - rho * rho).sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal);
                x
            })
            .collect();
        let ess = ess_initial_monotone(&trace).unwrap();
        let expect = n as f64 * (1.0 - rho) / (1.0 + rho);
        assert!(
            (ess - expect).abs() < 0.2 * expect,
            "AR(1) ESS {ess} vs {expect}"
        );
    }

    #[test]
    fn constant_trace_has_undefined_ess() {
        assert!(ess_initial_monotone(&[2.0; 100]).is_none());
    }

    #[test]
    fn split_rhat_near_one_for_matching_chains_and_large_for_shifted() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..5_000).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..5_000).map(|_| rng.gen::<f64>()).collect();
        let rhat = split_rhat(&[&a, &b]).unwrap();
        assert!((rhat - 1.0).abs() < 0.01, "rhat={rhat}");
        let shifted: Vec<f64> = b.iter().map(|x| x + 5.0).collect();
        let rhat = split_rhat(&[&a, &shifted]).unwrap();
        assert!(rhat > 2.0, "rhat={rhat}");
    }

    #[test]
    fn ks_distance_of_perfect_grid_is_small() {
        let n = 1000;
        let sorted: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&sorted, |x| x.clamp(0.0, 1.0));
        assert!(d <= 0.5 / n as f64 + 1e-12, "d={d}");
    }

    #[test]
    fn quantiles_interpolate() {
        let sorted = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&sorted, 0.5), 3.0);
        assert_eq!(quantile(&sorted, 0.0), 1.0);
        assert_eq!(quantile(&sorted, 1.0), 5.0);
        assert!((quantile(&sorted, 0.25) - 2.0).abs() < 1e-12);
    }
}
