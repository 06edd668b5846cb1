//! Scalar families used throughout the sampler.
//!
//! Gamma and inverse Gamma use the shape-scale parametrization
//! (`E[Gamma(a,b)] = a*b`), and the exponential is `Gamma(1, scale)`, so the
//! full-conditional parameter substitutions stay literal.

use rand::Rng;
use rand_distr::Distribution;

use super::DistributionError;

/// One named scalar family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum StandardDist {
    Beta { shape1: f64, shape2: f64 },
    Gamma { shape: f64, scale: f64 },
    InverseGamma { shape: f64, scale: f64 },
    Exponential { scale: f64 },
    Binomial { trials: u64, prob: f64 },
    Bernoulli { prob: f64 },
    /// Weights may be unnormalized; they are consumed as given.
    Categorical { weights: Vec<f64> },
}

impl StandardDist {
    pub fn validate(&self) -> Result<(), DistributionError> {
        let bad = |family, reason: String| Err(DistributionError::InvalidParameters { family, reason });
        match self {
            StandardDist::Beta { shape1, shape2 } => {
                if !(shape1.is_finite() && shape2.is_finite() && *shape1 > 0.0 && *shape2 > 0.0) {
                    return bad("beta", format!("shapes ({shape1}, {shape2}) must be positive"));
                }
            }
            StandardDist::Gamma { shape, scale } | StandardDist::InverseGamma { shape, scale } => {
                if !(shape.is_finite() && scale.is_finite() && *shape > 0.0 && *scale > 0.0) {
                    return bad("gamma", format!("shape {shape} and scale {scale} must be positive"));
                }
            }
            StandardDist::Exponential { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad("exponential", format!("scale {scale} must be positive"));
                }
            }
            StandardDist::Binomial { prob, .. } | StandardDist::Bernoulli { prob } => {
                if !(prob.is_finite() && (0.0..=1.0).contains(prob)) {
                    return bad("binomial", format!("probability {prob} outside [0, 1]"));
                }
            }
            StandardDist::Categorical { weights } => {
                if weights.is_empty() {
                    return bad("categorical", "empty weight vector".into());
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return bad("categorical", "weights must be finite and nonnegative".into());
                }
                if weights.iter().sum::<f64>() <= 0.0 {
                    return bad("categorical", "weights sum to zero".into());
                }
            }
        }
        Ok(())
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        use statrs::function::gamma::ln_gamma;
        match self {
            StandardDist::Beta { shape1: a, shape2: b } => {
                if !(0.0..=1.0).contains(&x) {
                    return f64::NEG_INFINITY;
                }
                (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() + ln_gamma(a + b)
                    - ln_gamma(*a)
                    - ln_gamma(*b)
            }
            StandardDist::Gamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (shape - 1.0) * x.ln() - x / scale - ln_gamma(*shape) - shape * scale.ln()
            }
            StandardDist::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                shape * scale.ln() - ln_gamma(*shape) - (shape + 1.0) * x.ln() - scale / x
            }
            StandardDist::Exponential { scale } => {
                if x < 0.0 {
                    return f64::NEG_INFINITY;
                }
                -scale.ln() - x / scale
            }
            StandardDist::Binomial { trials, prob } => {
                let k = x.round();
                if k < 0.0 || k > *trials as f64 {
                    return f64::NEG_INFINITY;
                }
                let n = *trials as f64;
                ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
                    + k * prob.ln()
                    + (n - k) * (1.0 - prob).ln()
            }
            StandardDist::Bernoulli { prob } => {
                if x == 1.0 {
                    prob.ln()
                } else if x == 0.0 {
                    (1.0 - prob).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            StandardDist::Categorical { weights } => {
                let idx = x.round() as usize;
                if x < 0.0 || idx >= weights.len() {
                    return f64::NEG_INFINITY;
                }
                (weights[idx] / weights.iter().sum::<f64>()).ln()
            }
        }
    }
}

/// Validate, then draw. Discrete families return their value as `f64`
/// (the categorical returns the zero-based index).
pub fn sample_standard<R: Rng + ?Sized>(
    dist: &StandardDist,
    rng: &mut R,
) -> Result<f64, DistributionError> {
    dist.validate()?;
    Ok(match dist {
        StandardDist::Beta { shape1, shape2 } => draw_beta(*shape1, *shape2, rng),
        StandardDist::Gamma { shape, scale } => draw_gamma(*shape, *scale, rng),
        StandardDist::InverseGamma { shape, scale } => draw_inverse_gamma(*shape, *scale, rng),
        StandardDist::Exponential { scale } => draw_exponential(*scale, rng),
        StandardDist::Binomial { trials, prob } => draw_binomial(*trials, *prob, rng) as f64,
        StandardDist::Bernoulli { prob } => {
            if rng.gen::<f64>() < *prob {
                1.0
            } else {
                0.0
            }
        }
        StandardDist::Categorical { weights } => draw_categorical(weights, rng) as f64,
    })
}

pub fn draw_beta<R: Rng + ?Sized>(shape1: f64, shape2: f64, rng: &mut R) -> f64 {
    rand_distr::Beta::new(shape1, shape2)
        .expect("beta shapes validated by caller")
        .sample(rng)
}

pub fn draw_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    rand_distr::Gamma::new(shape, scale)
        .expect("gamma parameters validated by caller")
        .sample(rng)
}

pub fn draw_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    // 1/Gamma(shape, 1/scale) has the shape-scale inverse gamma law.
    scale / draw_gamma(shape, 1.0, rng)
}

pub fn draw_exponential<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    draw_gamma(1.0, scale, rng)
}

pub fn draw_binomial<R: Rng + ?Sized>(trials: u64, prob: f64, rng: &mut R) -> u64 {
    if trials == 0 || prob <= 0.0 {
        return 0;
    }
    if prob >= 1.0 {
        return trials;
    }
    rand_distr::Binomial::new(trials, prob)
        .expect("binomial parameters validated by caller")
        .sample(rng)
}

/// Single-uniform cumulative scan; ties resolve toward the smaller index.
pub fn draw_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (idx, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return idx;
        }
    }
    weights.len() - 1
}

/// Categorical draw from unnormalized log masses.
pub fn draw_from_log_masses<R: Rng + ?Sized>(log_masses: &[f64], rng: &mut R) -> usize {
    let max = log_masses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    debug_assert!(max.is_finite(), "all allocation masses vanished");
    let weights: Vec<f64> = log_masses.iter().map(|lm| (lm - max).exp()).collect();
    draw_categorical(&weights, rng)
}

pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn log_normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    -0.5 * ((2.0 * std::f64::consts::PI * variance).ln() + (x - mean).powi(2) / variance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn mc_mean_var<R: Rng>(dist: &StandardDist, n: usize, rng: &mut R) -> (f64, f64) {
        let draws: Vec<f64> = (0..n).map(|_| sample_standard(dist, rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var)
    }

    #[test]
    fn gamma_shape_scale_prior_mean() {
        // Gamma(20, 0.1) has mean 2 — the slab-scale prior mean.
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let (mean, _) = mc_mean_var(&StandardDist::Gamma { shape: 20.0, scale: 0.1 }, 200_000, &mut rng);
        assert!((mean - 2.0).abs() < 0.01, "mean={mean}");
    }

    #[test]
    fn beta_uniform_case() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let (mean, var) = mc_mean_var(&StandardDist::Beta { shape1: 1.0, shape2: 1.0 }, 200_000, &mut rng);
        assert!((mean - 0.5).abs() < 0.005);
        assert!((var - 1.0 / 12.0).abs() < 0.002);
    }

    #[test]
    fn categorical_unnormalized_frequencies() {
        let dist = StandardDist::Categorical { weights: vec![2.0, 1.0, 1.0] };
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let n = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[sample_standard(&dist, &mut rng).unwrap() as usize] += 1;
        }
        let freqs: Vec<f64> = counts.iter().map(|c| *c as f64 / n as f64).collect();
        for (freq, expect) in freqs.iter().zip([0.5, 0.25, 0.25]) {
            assert!((freq - expect).abs() < 0.01, "{freqs:?}");
        }
    }

    #[test]
    fn moments_within_four_standard_errors() {
        // (dist, mean, variance, Var[(X-mean)^2] for the SE of the variance)
        let cases: Vec<(StandardDist, f64, f64, f64)> = vec![
            (
                StandardDist::Gamma { shape: 3.0, scale: 2.0 },
                6.0,
                12.0,
                // E[(X-mu)^4] - var^2 for Gamma(a,b): (3 + 6/a) var^2 - var^2
                (2.0 + 6.0 / 3.0) * 144.0,
            ),
            (
                StandardDist::Exponential { scale: 0.5 },
                0.5,
                0.25,
                8.0 * 0.0625,
            ),
            (
                StandardDist::InverseGamma { shape: 6.0, scale: 10.0 },
                2.0,
                1.0,
                // loose bound used only to scale the tolerance
                30.0,
            ),
            (
                StandardDist::Binomial { trials: 10, prob: 0.3 },
                3.0,
                2.1,
                2.1 * (1.0 + 2.0),
            ),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 200_000usize;
        for (dist, exact_mean, exact_var, var_of_sq) in cases {
            let (mean, var) = mc_mean_var(&dist, n, &mut rng);
            let se_mean = (exact_var / n as f64).sqrt();
            assert!(
                (mean - exact_mean).abs() < 4.0 * se_mean,
                "{dist:?} mean {mean} vs {exact_mean}"
            );
            let se_var = (var_of_sq / n as f64).sqrt();
            assert!(
                (var - exact_var).abs() < 4.0 * se_var,
                "{dist:?} var {var} vs {exact_var}"
            );
        }
    }

    #[test]
    fn invalid_parameters_error() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for dist in [
            StandardDist::Beta { shape1: 0.0, shape2: 1.0 },
            StandardDist::Gamma { shape: -1.0, scale: 1.0 },
            StandardDist::Exponential { scale: 0.0 },
            StandardDist::Bernoulli { prob: 1.5 },
            StandardDist::Categorical { weights: vec![] },
            StandardDist::Categorical { weights: vec![0.0, 0.0] },
        ] {
            assert!(sample_standard(&dist, &mut rng).is_err(), "{dist:?}");
        }
    }

    #[test]
    fn categorical_tie_break_toward_smaller_index() {
        // With a zero-weight head the scan must skip it, and equal weights
        // resolve by the single uniform against the cumulative sums.
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let idx = draw_categorical(&[0.0, 1.0, 0.0], &mut rng);
            assert_eq!(idx, 1);
        }
    }
}
