//! Joint-distribution validation of the Gibbs sampler.
//!
//! Two simulators target the same joint law of (parameters, data):
//!
//! * the marginal-conditional side draws parameters from the prior block
//!   directly — because the latent-scale factor repeats once per slice, the
//!   prior is not ancestrally samplable, so draws are importance-weighted by
//!   the product/sum ratio of the per-slice exponential rates;
//! * the successive-conditional side alternates a full Gibbs sweep with
//!   re-simulation of the data given the parameters (the first observation
//!   row is held fixed).
//!
//! Matching moments (within Monte-Carlo error) on both sides is evidence
//! that every full conditional is consistent with the joint; a deliberately
//! corrupted update must push some z-score far out.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::distributions::{
    draw_beta, draw_gamma, draw_inverse_gamma, sample_inverse_wishart, InverseWishartParams,
};
use crate::gibbs::{steps, ChainState, ModelSpec, SpikeVariant};
use crate::tsddp::{clamp_stick, TsddpChain};
use crate::var_core::Panel;

use super::{ess_initial_monotone, DiagnosticsError};

/// Optional deliberate corruption of one update, for calibrating the test's
/// power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GewekeFault {
    None,
    /// Swap the two Beta parameters in the mixing-probability update.
    SwappedPiParameters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GewekeStat {
    pub name: String,
    pub forward_mean: f64,
    pub forward_se: f64,
    pub chain_mean: f64,
    pub chain_se: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GewekeReport {
    pub sweeps: u64,
    /// Effective sample size of the importance-weighted forward draws.
    pub forward_ess: f64,
    pub stats: Vec<GewekeStat>,
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.stats
            .iter()
            .map(|s| s.z.abs())
            .fold(0.0, f64::max)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<14} {:>12} {:>10} {:>12} {:>10} {:>8}\n",
            "statistic", "forward", "se", "gibbs", "se", "z"
        );
        for s in &self.stats {
            out.push_str(&format!(
                "{:<14} {:>12.5} {:>10.5} {:>12.5} {:>10.5} {:>8.2}\n",
                s.name, s.forward_mean, s.forward_se, s.chain_mean, s.chain_se, s.z
            ));
        }
        out.push_str(&format!(
            "forward importance ESS: {:.0} of {}\n",
            self.forward_ess, self.sweeps
        ));
        out
    }
}

pub fn geweke_joint_test(
    spec: &ModelSpec,
    sweeps: u64,
    seed: u64,
) -> Result<GewekeReport, DiagnosticsError> {
    geweke_joint_test_with_fault(spec, sweeps, seed, GewekeFault::None)
}

pub fn geweke_joint_test_with_fault(
    spec: &ModelSpec,
    sweeps: u64,
    seed: u64,
    fault: GewekeFault,
) -> Result<GewekeReport, DiagnosticsError> {
    if sweeps == 0 {
        return Err(DiagnosticsError::InvalidInput("sweeps must be positive".into()));
    }
    spec.validate()
        .map_err(|e| DiagnosticsError::InvalidInput(e.to_string()))?;

    let mut seed_rng = ChaCha12Rng::seed_from_u64(seed);
    let y1 = DVector::from_fn(spec.dim, |_, _| {
        0.5 * seed_rng.sample::<f64, _>(StandardNormal)
    });
    let forward_seed = seed_rng.gen::<u64>();
    let chain_seed = seed_rng.gen::<u64>();

    let names = stat_names(spec);
    let (forward, chain) = std::thread::scope(|scope| {
        let fwd = scope.spawn(|| forward_side(spec, sweeps, forward_seed));
        let chn = scope.spawn(|| chain_side(spec, sweeps, chain_seed, &y1, fault));
        (fwd.join().expect("forward simulator"), chn.join().expect("chain simulator"))
    });
    let forward = forward?;
    let chain = chain?;

    let stats = names
        .iter()
        .enumerate()
        .map(|(idx, name)| {
            let (fm, fse) = (forward.means[idx], forward.ses[idx]);
            let (cm, cse) = (chain.means[idx], chain.ses[idx]);
            let denom = (fse * fse + cse * cse).sqrt();
            let diff = fm - cm;
            let z = if denom > 0.0 {
                diff / denom
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY * diff.signum()
            };
            GewekeStat {
                name: name.clone(),
                forward_mean: fm,
                forward_se: fse,
                chain_mean: cm,
                chain_se: cse,
                z,
            }
        })
        .collect();
    Ok(GewekeReport {
        sweeps,
        forward_ess: forward.ess,
        stats,
    })
}

fn stat_names(spec: &ModelSpec) -> Vec<String> {
    let mut names = vec![
        "beta_mean".to_string(),
        "beta_sq_mean".to_string(),
        "sigma_11".to_string(),
    ];
    if spec.dim >= 2 {
        names.push("sigma_12".to_string());
    }
    names.extend([
        "pi_mean".to_string(),
        "k_max".to_string(),
        "k_distinct".to_string(),
        "slab_fraction".to_string(),
    ]);
    names
}

fn compute_stats(state: &ChainState, spec: &ModelSpec) -> Vec<f64> {
    let slices = spec.slices();
    let n_coef = spec.n_coef();
    let total = (slices * n_coef) as f64;
    let mut beta_sum = 0.0;
    let mut beta_sq = 0.0;
    let mut slab = 0.0;
    let mut k_max = 0u32;
    let mut labels = std::collections::BTreeSet::new();
    for s in 0..slices {
        for j in 0..n_coef {
            let b = state.beta[s][j];
            beta_sum += b;
            beta_sq += b * b;
            if state.gamma[s][j] == 1 {
                slab += 1.0;
                let label = state.d_alloc[s][j];
                k_max = k_max.max(label);
                labels.insert(label);
            }
        }
    }
    let mut stats = vec![
        beta_sum / total,
        beta_sq / total,
        state.sigma[(0, 0)],
    ];
    if spec.dim >= 2 {
        stats.push(state.sigma[(0, 1)]);
    }
    stats.extend([
        state.pi.iter().sum::<f64>() / slices as f64,
        k_max as f64,
        labels.len() as f64,
        slab / total,
    ]);
    stats
}

struct SideEstimates {
    means: Vec<f64>,
    ses: Vec<f64>,
    ess: f64,
}

/// Marginal-conditional side: importance-weighted prior draws. Monitored
/// statistics depend on the parameters only, so no data simulation is
/// needed here — the likelihood integrates out exactly.
fn forward_side(
    spec: &ModelSpec,
    sweeps: u64,
    seed: u64,
) -> Result<SideEstimates, DiagnosticsError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n_stats = stat_names(spec).len();
    let mut log_weights = Vec::with_capacity(sweeps as usize);
    let mut stat_rows: Vec<Vec<f64>> = Vec::with_capacity(sweeps as usize);
    for _ in 0..sweeps {
        let (state, log_weight) = draw_prior_block(spec, &mut rng)?;
        stat_rows.push(compute_stats(&state, spec));
        log_weights.push(log_weight);
    }
    let max_lw = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|lw| (lw - max_lw).exp()).collect();
    let w_sum: f64 = weights.iter().sum();
    let w_sq_sum: f64 = weights.iter().map(|w| w * w).sum();
    let ess = w_sum * w_sum / w_sq_sum;

    let mut means = vec![0.0; n_stats];
    for (row, w) in stat_rows.iter().zip(&weights) {
        for (m, v) in means.iter_mut().zip(row) {
            *m += w * v;
        }
    }
    for m in means.iter_mut() {
        *m /= w_sum;
    }
    // Delta-method standard error of the self-normalized estimator.
    let mut ses = vec![0.0; n_stats];
    for (row, w) in stat_rows.iter().zip(&weights) {
        for ((se, v), m) in ses.iter_mut().zip(row).zip(&means) {
            *se += (w * (v - m)).powi(2);
        }
    }
    for se in ses.iter_mut() {
        *se = se.sqrt() / w_sum;
    }
    Ok(SideEstimates { means, ses, ess })
}

/// Successive-conditional side: Gibbs sweep then data re-simulation.
fn chain_side(
    spec: &ModelSpec,
    sweeps: u64,
    seed: u64,
    y1: &DVector<f64>,
    fault: GewekeFault,
) -> Result<SideEstimates, DiagnosticsError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (mut state, _) = draw_prior_block(spec, &mut rng)?;
    let names: Vec<String> = (0..spec.dim).map(|i| format!("v{}", i + 1)).collect();
    let mut panel = Panel::new(names, DMatrix::zeros(spec.t_len, spec.dim))
        .map_err(|e| DiagnosticsError::InvalidInput(e.to_string()))?;
    panel.values.row_mut(0).copy_from(&y1.transpose());
    resimulate_data(&mut panel, &state, spec, &mut rng)?;

    let burn = sweeps / 10;
    let n_stats = stat_names(spec).len();
    let mut traces: Vec<Vec<f64>> = vec![Vec::with_capacity((sweeps - burn) as usize); n_stats];
    for it in 0..sweeps {
        steps::update_sticks_aux_slices(&mut state, spec, &mut rng);
        steps::update_lambda(&mut state, spec, &mut rng);
        steps::update_atoms(&mut state, spec, &mut rng);
        steps::update_allocations(&mut state, spec, &panel, &mut rng)
            .map_err(|e| DiagnosticsError::InvalidInput(e.to_string()))?;
        steps::update_beta(&mut state, spec, &panel, &mut rng)
            .map_err(|e| DiagnosticsError::InvalidInput(e.to_string()))?;
        steps::update_sigma(&mut state, spec, &panel, &mut rng)
            .map_err(|e| DiagnosticsError::InvalidInput(e.to_string()))?;
        match fault {
            GewekeFault::None => steps::update_pi(&mut state, spec, &mut rng),
            GewekeFault::SwappedPiParameters => update_pi_swapped(&mut state, spec, &mut rng),
        }
        resimulate_data(&mut panel, &state, spec, &mut rng)?;
        if it >= burn {
            for (trace, value) in traces.iter_mut().zip(compute_stats(&state, spec)) {
                trace.push(value);
            }
        }
    }
    let mut means = Vec::with_capacity(n_stats);
    let mut ses = Vec::with_capacity(n_stats);
    for trace in &traces {
        let n = trace.len() as f64;
        let mean = trace.iter().sum::<f64>() / n;
        let var = trace.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let ess = ess_initial_monotone(trace).unwrap_or(n);
        means.push(mean);
        ses.push((var / ess.max(1.0)).sqrt());
    }
    Ok(SideEstimates {
        means,
        ses,
        ess: f64::NAN,
    })
}

fn update_pi_swapped<R: Rng + ?Sized>(state: &mut ChainState, spec: &ModelSpec, rng: &mut R) {
    for s in 0..spec.slices() {
        let (shape1, shape2) = steps::pi_beta_params(state, spec, s);
        state.pi[s] = clamp_stick(draw_beta(shape2, shape1, rng));
    }
}

/// Draw the full parameter block from the prior. Returns the state together
/// with the log importance weight accounting for the repeated latent-scale
/// factors: for each coefficient with slab rates `r_1..r_k`, the weight is
/// `prod(r_i / 2) / (sum(r_i) / 2)`.
fn draw_prior_block<R: Rng + ?Sized>(
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<(ChainState, f64), DiagnosticsError> {
    let slices = spec.slices();
    let n_coef = spec.n_coef();
    let h = &spec.hyper;
    let mut chain = TsddpChain::init(
        h.concentration,
        h.dependence,
        slices,
        h.base_measure(),
        1,
        rng,
    )
    .map_err(|e| DiagnosticsError::InvalidInput(e.to_string()))?;
    let pi: Vec<f64> = (0..slices)
        .map(|_| clamp_stick(draw_beta(1.0, h.sparsity_shape, rng)))
        .collect();
    let tau0 = match spec.variant {
        SpikeVariant::DeDiffuse => draw_gamma(h.spike_shape, h.spike_scale, rng),
        SpikeVariant::NormalDiffuse => draw_inverse_gamma(h.spike_shape, h.spike_scale, rng),
        SpikeVariant::Dirac => h.spike_scale_prior_center(SpikeVariant::Dirac),
    };

    let mut gamma = vec![vec![0u8; n_coef]; slices];
    let mut d_alloc = vec![vec![0u32; n_coef]; slices];
    for s in 0..slices {
        for j in 0..n_coef {
            if rng.gen::<f64>() >= pi[s] {
                gamma[s][j] = 1;
                d_alloc[s][j] = draw_slab_label(&mut chain, s, rng);
            }
        }
    }

    let fallback = h.fallback_slab_scale();
    let mut lambda = vec![vec![0.0; n_coef]; slices];
    let mut log_weight = 0.0;
    match spec.variant {
        // Per-site scales with one exponential factor each: ancestral, no
        // importance correction needed.
        SpikeVariant::Dirac => {
            for row in lambda.iter_mut() {
                for value in row.iter_mut() {
                    *value = draw_gamma(1.0, 2.0 / fallback, rng);
                }
            }
        }
        // Pooled scales: the per-slice exponential factors repeat, so the
        // draw uses the summed rate and the product/sum ratio enters the
        // importance weight.
        SpikeVariant::DeDiffuse | SpikeVariant::NormalDiffuse => {
            for j in 0..n_coef {
                let mut rates: Vec<f64> = Vec::with_capacity(slices);
                for s in 0..slices {
                    if gamma[s][j] == 1 {
                        rates.push(chain.components[(d_alloc[s][j] - 1) as usize].atom.scale);
                    } else if spec.variant == SpikeVariant::DeDiffuse {
                        rates.push(tau0);
                    }
                }
                let value = if rates.is_empty() {
                    draw_gamma(1.0, 2.0 / fallback, rng)
                } else {
                    let total: f64 = rates.iter().sum();
                    log_weight +=
                        rates.iter().map(|r| (r / 2.0).ln()).sum::<f64>() - (total / 2.0).ln();
                    draw_gamma(1.0, 2.0 / total, rng)
                };
                for s in 0..slices {
                    lambda[s][j] = value;
                }
            }
        }
    }

    let mut beta = Vec::with_capacity(slices);
    for s in 0..slices {
        let mut row = DVector::zeros(n_coef);
        for j in 0..n_coef {
            row[j] = if gamma[s][j] == 1 {
                let atom = &chain.components[(d_alloc[s][j] - 1) as usize].atom;
                atom.location + lambda[s][j].sqrt() * rng.sample::<f64, _>(StandardNormal)
            } else {
                match spec.variant {
                    SpikeVariant::Dirac => 0.0,
                    SpikeVariant::NormalDiffuse => {
                        tau0.sqrt() * rng.sample::<f64, _>(StandardNormal)
                    }
                    SpikeVariant::DeDiffuse => {
                        lambda[s][j].sqrt() * rng.sample::<f64, _>(StandardNormal)
                    }
                }
            };
        }
        beta.push(row);
    }

    let iw = InverseWishartParams::new(h.dof, h.scale_matrix.clone())
        .map_err(|e| DiagnosticsError::InvalidInput(e.to_string()))?;
    let sigma = sample_inverse_wishart(&iw, rng)
        .map_err(|e| DiagnosticsError::InvalidInput(e.to_string()))?;

    let mut u_slice = Vec::with_capacity(slices);
    for s in 0..slices {
        let weights = chain.weights_at(s);
        let mut row = Vec::with_capacity(n_coef);
        for j in 0..n_coef {
            let cap = if gamma[s][j] == 1 {
                weights[(d_alloc[s][j] - 1) as usize]
            } else {
                1.0
            };
            row.push((rng.gen::<f64>() * cap).max(f64::MIN_POSITIVE * 1e3));
        }
        u_slice.push(row);
    }

    Ok((
        ChainState {
            beta,
            sigma,
            lambda,
            tau0,
            chain,
            gamma,
            d_alloc,
            u_slice,
            pi,
        },
        log_weight,
    ))
}

/// Stick-breaking label draw at slice `s`, growing the chain lazily.
fn draw_slab_label<R: Rng + ?Sized>(chain: &mut TsddpChain, s: usize, rng: &mut R) -> u32 {
    let target: f64 = rng.gen();
    let mut acc = 0.0;
    let mut left = 1.0;
    let mut k = 0usize;
    loop {
        if k == chain.len() {
            chain.grow(k + 1, rng);
        }
        let v = chain.components[k].sticks[s];
        acc += v * left;
        if target < acc || left < 1e-14 {
            return (k + 1) as u32;
        }
        left *= 1.0 - v;
        k += 1;
    }
}

fn resimulate_data<R: Rng + ?Sized>(
    panel: &mut Panel,
    state: &ChainState,
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<(), DiagnosticsError> {
    let n = spec.dim;
    let chol = Cholesky::new(state.sigma.clone())
        .ok_or_else(|| DiagnosticsError::InvalidInput("non-SPD covariance".into()))?;
    for s in 0..spec.slices() {
        let y_prev = panel.row(s);
        let noise = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let shock = chol.l() * noise;
        for i in 0..n {
            let mut value = shock[i];
            for c in 0..n {
                value += state.beta[s][c * n + i] * y_prev[c];
            }
            panel.values[(s + 1, i)] = value;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::Hyperparameters;

    fn test_spec(variant: SpikeVariant) -> ModelSpec {
        let mut spec = ModelSpec::new(2, 4, variant);
        // Finite low-order moments for the monitored statistics.
        spec.hyper = Hyperparameters {
            spike_shape: 4.0,
            ..Hyperparameters::defaults(2)
        };
        spec
    }

    #[test]
    fn zero_sweeps_is_an_error() {
        let spec = test_spec(SpikeVariant::Dirac);
        assert!(geweke_joint_test(&spec, 0, 1).is_err());
    }

    #[test]
    fn report_is_reproducible_under_seed() {
        let spec = test_spec(SpikeVariant::Dirac);
        let a = geweke_joint_test(&spec, 400, 3).unwrap();
        let b = geweke_joint_test(&spec, 400, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stats.len(), 8);
        assert!(a.forward_ess > 100.0, "IS ESS collapsed: {}", a.forward_ess);
    }

    #[test]
    fn short_run_sanity_all_variants() {
        // Short runs: just check the harness produces finite moments and
        // plausibly small z-scores; the acceptance suite runs the long form.
        for variant in [
            SpikeVariant::Dirac,
            SpikeVariant::NormalDiffuse,
            SpikeVariant::DeDiffuse,
        ] {
            let spec = test_spec(variant);
            let report = geweke_joint_test(&spec, 3_000, 11).unwrap();
            for stat in &report.stats {
                assert!(stat.forward_mean.is_finite(), "{variant:?} {stat:?}");
                assert!(stat.chain_mean.is_finite());
            }
            assert!(
                report.max_abs_z() < 8.0,
                "{variant:?} catastrophic mismatch:\n{}",
                report.to_table()
            );
        }
    }
}
