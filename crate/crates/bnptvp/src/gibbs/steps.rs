//! The seven full-conditional updates.
//!
//! Each update has a pure parameter-computation function next to it so the
//! conjugate parameters can be checked directly against hand computation;
//! the `update_*` functions draw from those parameters and mutate the state.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::distributions::{
    draw_beta, draw_from_log_masses, draw_gamma, draw_inverse_gamma, log_normal_pdf, sample_gig,
    sample_inverse_wishart, sample_mvn_from_precision, GigParams, InverseWishartParams,
};
use crate::tsddp::clamp_stick;
use crate::var_core::{coef_position, Panel};

use super::{ChainState, ModelSpec, SpikeVariant, StepError};

/// Lower floor applied to quadratic forms entering GiG parameters, so a
/// coefficient sitting exactly on its atom cannot produce an overflowing
/// inverse scale.
const QUAD_FLOOR: f64 = 1e-30;

fn ln_exp_scale_pdf(x: f64, scale: f64) -> f64 {
    -scale.ln() - x / scale
}

// ---------------------------------------------------------------------------
// Step 1: sticks, auxiliaries, slice variables, coverage growth
// ---------------------------------------------------------------------------

/// Beta parameters of the stick fraction for component `k0` (zero-based) at
/// slice `s`: counts from the adjacent auxiliaries plus the slab allocations
/// at, and strictly above, this component.
pub fn stick_beta_params(state: &ChainState, spec: &ModelSpec, k0: usize, s: usize) -> (f64, f64) {
    let m = spec.hyper.dependence as f64;
    let comp = &state.chain.components[k0];
    let slices = spec.slices();
    let mut shape1 = 1.0;
    let mut shape2 = spec.hyper.concentration;
    if s + 1 < slices {
        shape1 += comp.aux[s] as f64;
        shape2 += m - comp.aux[s] as f64;
    }
    if s >= 1 {
        shape1 += comp.aux[s - 1] as f64;
        shape2 += m - comp.aux[s - 1] as f64;
    }
    let label = (k0 + 1) as u32;
    for j in 0..spec.n_coef() {
        if state.gamma[s][j] == 1 {
            if state.d_alloc[s][j] == label {
                shape1 += 1.0;
            } else if state.d_alloc[s][j] > label {
                shape2 += 1.0;
            }
        }
    }
    (shape1, shape2)
}

/// Unnormalized log masses of the auxiliary count linking slices `s` and
/// `s + 1` of component `k0`, over its support `{0, ..., m}`.
pub fn aux_log_masses(state: &ChainState, spec: &ModelSpec, k0: usize, s: usize) -> Vec<f64> {
    let m = spec.hyper.dependence;
    let alpha = spec.hyper.concentration;
    let comp = &state.chain.components[k0];
    let v0 = comp.sticks[s];
    let v1 = comp.sticks[s + 1];
    let ln_ratio = v0.ln() + v1.ln() - (1.0 - v0).ln() - (1.0 - v1).ln();
    (0..=m)
        .map(|z| {
            let zf = z as f64;
            zf * ln_ratio
                - 2.0 * ln_gamma(zf + 1.0)
                - ln_gamma(alpha + (m - z) as f64)
                - ln_gamma((m - z) as f64 + 1.0)
        })
        .collect()
}

/// Update sticks and auxiliaries for every instantiated component, redraw the
/// slice uniforms, then grow components until the instantiated weights cover
/// every slice level.
pub fn update_sticks_aux_slices<R: Rng + ?Sized>(
    state: &mut ChainState,
    spec: &ModelSpec,
    rng: &mut R,
) {
    let slices = spec.slices();
    for k0 in 0..state.chain.len() {
        for s in 0..slices {
            let (shape1, shape2) = stick_beta_params(state, spec, k0, s);
            state.chain.components[k0].sticks[s] = clamp_stick(draw_beta(shape1, shape2, rng));
        }
        for s in 0..slices.saturating_sub(1) {
            let masses = aux_log_masses(state, spec, k0, s);
            state.chain.components[k0].aux[s] = draw_from_log_masses(&masses, rng) as u32;
        }
    }
    // Slice uniforms: u | (d, gamma) is uniform on (0, w_d) for slab
    // coefficients and on (0, 1) for spiked ones.
    for s in 0..slices {
        let weights = state.chain.weights_at(s);
        for j in 0..spec.n_coef() {
            let cap = if state.gamma[s][j] == 1 {
                weights[(state.d_alloc[s][j] - 1) as usize]
            } else {
                1.0
            };
            state.u_slice[s][j] = (rng.gen::<f64>() * cap).max(f64::MIN_POSITIVE * 1e3);
        }
    }
    // Coverage: leftover mass below the smallest slice level everywhere.
    for s in 0..slices {
        let min_u = state.u_slice[s]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        while state.chain.leftover(s, state.chain.len()) >= min_u {
            let grown = state.chain.len() + 1;
            state.chain.grow(grown, rng);
            assert!(grown < 100_000, "slice coverage failed to terminate");
        }
    }
}

// ---------------------------------------------------------------------------
// Step 2: latent scales
// ---------------------------------------------------------------------------

/// How the latent scale of one coefficient is to be redrawn.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaDraw {
    Gig(GigParams),
    /// No data term survives: redraw from the exponential factor with this
    /// scale.
    PriorExp { scale: f64 },
}

/// Pooled full conditional of the latent scale for coefficient `j` (diffuse
/// variants; one scale shared across time).
///
/// Double-exponential spike: every slice contributes, with the spike scale
/// standing in where the coefficient is spiked. Normal spike: only slab
/// slices contribute; with none at all the conditional reduces to the
/// fallback exponential factor.
pub fn lambda_full_conditional(state: &ChainState, spec: &ModelSpec, j: usize) -> LambdaDraw {
    debug_assert!(spec.variant != SpikeVariant::Dirac);
    let slices = spec.slices();
    let fallback = 2.0 / spec.hyper.fallback_slab_scale();
    let mut rate = 0.0;
    let mut inv_rate = 0.0;
    let mut slab = 0usize;
    for s in 0..slices {
        if state.gamma[s][j] == 1 {
            let atom = state.atom(state.d_alloc[s][j]);
            rate += atom.scale;
            inv_rate += (state.beta[s][j] - atom.location).powi(2);
            slab += 1;
        } else if spec.variant == SpikeVariant::DeDiffuse {
            rate += state.tau0;
            inv_rate += state.beta[s][j].powi(2);
        }
    }
    let order = match spec.variant {
        SpikeVariant::DeDiffuse => 1.0 - slices as f64 / 2.0,
        _ => {
            if slab == 0 {
                return LambdaDraw::PriorExp { scale: fallback };
            }
            1.0 - slab as f64 / 2.0
        }
    };
    if inv_rate < QUAD_FLOOR {
        if order > 0.0 {
            return match GigParams::new(order, rate, 0.0) {
                Ok(params) => LambdaDraw::Gig(params),
                Err(_) => LambdaDraw::PriorExp { scale: fallback },
            };
        }
        inv_rate = QUAD_FLOOR;
    }
    match GigParams::new(order, rate, inv_rate) {
        Ok(params) => LambdaDraw::Gig(params),
        Err(_) => LambdaDraw::PriorExp { scale: fallback },
    }
}

/// Dirac-variant full conditional of the latent scale for coefficient `j`:
/// the exponential factor repeats once per slab slice at the fixed
/// prior-mean scale `a1 b1`, giving `GiG(1 - s/2, s a1 b1, sum (beta -
/// mu)^2)` over the `s` slab slices. Coupling the rate to the assigned
/// atoms' scales instead would let a zero-location atom grow its scale with
/// every assignment until its density bonus absorbs all coefficients, so
/// the atom scales stay out of the point-mass variant's conditionals.
pub fn lambda_dirac_conditional(state: &ChainState, spec: &ModelSpec, j: usize) -> LambdaDraw {
    let tau_ref = spec.hyper.fallback_slab_scale();
    let mut inv_rate = 0.0;
    let mut slab = 0usize;
    for s in 0..spec.slices() {
        if state.gamma[s][j] == 1 {
            let atom = state.atom(state.d_alloc[s][j]);
            inv_rate += (state.beta[s][j] - atom.location).powi(2);
            slab += 1;
        }
    }
    if slab == 0 {
        return LambdaDraw::PriorExp {
            scale: 2.0 / tau_ref,
        };
    }
    match GigParams::new(
        1.0 - slab as f64 / 2.0,
        slab as f64 * tau_ref,
        inv_rate.max(QUAD_FLOOR),
    ) {
        Ok(params) => LambdaDraw::Gig(params),
        Err(_) => LambdaDraw::PriorExp {
            scale: 2.0 / tau_ref,
        },
    }
}

pub fn update_lambda<R: Rng + ?Sized>(state: &mut ChainState, spec: &ModelSpec, rng: &mut R) {
    for j in 0..spec.n_coef() {
        let draw = match spec.variant {
            SpikeVariant::DeDiffuse | SpikeVariant::NormalDiffuse => {
                lambda_full_conditional(state, spec, j)
            }
            SpikeVariant::Dirac => lambda_dirac_conditional(state, spec, j),
        };
        let value = match draw {
            LambdaDraw::Gig(params) => sample_gig(&params, rng),
            LambdaDraw::PriorExp { scale } => draw_gamma(1.0, scale, rng),
        };
        for s in 0..spec.slices() {
            state.lambda[s][j] = value;
        }
    }
}

// ---------------------------------------------------------------------------
// Step 3: atoms and spike scale
// ---------------------------------------------------------------------------

/// Gaussian posterior (mean, variance) of the location of atom `k0`.
pub fn atom_location_params(state: &ChainState, spec: &ModelSpec, k0: usize) -> (f64, f64) {
    let h = &spec.hyper;
    let label = (k0 + 1) as u32;
    let mut precision = 1.0 / h.loc_var;
    let mut weighted = h.loc_mean / h.loc_var;
    for s in 0..spec.slices() {
        for j in 0..spec.n_coef() {
            if state.gamma[s][j] == 1 && state.d_alloc[s][j] == label {
                precision += 1.0 / state.lambda[s][j];
                weighted += state.beta[s][j] / state.lambda[s][j];
            }
        }
    }
    let variance = 1.0 / precision;
    (variance * weighted, variance)
}

/// Gamma posterior (shape, scale) of the scale of atom `k0`. Under the
/// Dirac variant the latent scales are decoupled from the atom identity (see
/// [`lambda_full_conditional`]), so the atom scale keeps its prior.
pub fn atom_scale_params(state: &ChainState, spec: &ModelSpec, k0: usize) -> (f64, f64) {
    let h = &spec.hyper;
    if spec.variant == SpikeVariant::Dirac {
        return (h.scale_shape, h.scale_scale);
    }
    let label = (k0 + 1) as u32;
    let mut count = 0.0;
    let mut lambda_sum = 0.0;
    for s in 0..spec.slices() {
        for j in 0..spec.n_coef() {
            if state.gamma[s][j] == 1 && state.d_alloc[s][j] == label {
                count += 1.0;
                lambda_sum += state.lambda[s][j];
            }
        }
    }
    (
        h.scale_shape + count,
        2.0 * h.scale_scale / (2.0 + h.scale_scale * lambda_sum),
    )
}

/// Spike-scale full conditional, by variant.
#[derive(Debug, Clone, PartialEq)]
pub enum SpikeScaleDraw {
    Gamma { shape: f64, scale: f64 },
    InverseGamma { shape: f64, scale: f64 },
    Fixed,
}

pub fn spike_scale_full_conditional(state: &ChainState, spec: &ModelSpec) -> SpikeScaleDraw {
    let h = &spec.hyper;
    match spec.variant {
        SpikeVariant::Dirac => SpikeScaleDraw::Fixed,
        SpikeVariant::DeDiffuse => {
            let mut count = 0.0;
            let mut lambda_sum = 0.0;
            for s in 0..spec.slices() {
                for j in 0..spec.n_coef() {
                    if state.gamma[s][j] == 0 {
                        count += 1.0;
                        lambda_sum += state.lambda[s][j];
                    }
                }
            }
            SpikeScaleDraw::Gamma {
                shape: h.spike_shape + count,
                scale: 2.0 * h.spike_scale / (2.0 + h.spike_scale * lambda_sum),
            }
        }
        SpikeVariant::NormalDiffuse => {
            let mut count = 0.0;
            let mut sq_sum = 0.0;
            for s in 0..spec.slices() {
                for j in 0..spec.n_coef() {
                    if state.gamma[s][j] == 0 {
                        count += 1.0;
                        sq_sum += state.beta[s][j].powi(2);
                    }
                }
            }
            SpikeScaleDraw::InverseGamma {
                shape: h.spike_shape + count / 2.0,
                scale: h.spike_scale + sq_sum / 2.0,
            }
        }
    }
}

pub fn update_atoms<R: Rng + ?Sized>(state: &mut ChainState, spec: &ModelSpec, rng: &mut R) {
    for k0 in 0..state.chain.len() {
        let (mean, variance) = atom_location_params(state, spec, k0);
        let (shape, scale) = atom_scale_params(state, spec, k0);
        let atom = &mut state.chain.components[k0].atom;
        atom.location = mean + variance.sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal);
        atom.scale = draw_gamma(shape, scale, rng);
    }
    match spike_scale_full_conditional(state, spec) {
        SpikeScaleDraw::Gamma { shape, scale } => state.tau0 = draw_gamma(shape, scale, rng),
        SpikeScaleDraw::InverseGamma { shape, scale } => {
            state.tau0 = draw_inverse_gamma(shape, scale, rng)
        }
        SpikeScaleDraw::Fixed => {}
    }
}

// ---------------------------------------------------------------------------
// Step 4: allocations
// ---------------------------------------------------------------------------

/// One candidate `(d, gamma)` outcome with its unnormalized log mass;
/// `label == 0` is the spike.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationOutcome {
    pub label: u32,
    pub log_mass: f64,
}

/// Candidate outcomes for coefficient `j` at slice `s` under the diffuse
/// variants (the coefficient value stays conditioned on).
///
/// Slab components range over those whose weight clears the slice level.
/// When this coefficient has no other slab assignment, the spike mass also
/// carries the fallback exponential factor of the latent scale, which an
/// all-spike configuration would otherwise leave unattached.
pub fn allocation_outcomes_diffuse(
    state: &ChainState,
    spec: &ModelSpec,
    weights: &[f64],
    j: usize,
    s: usize,
) -> Vec<AllocationOutcome> {
    let lam = state.lambda[s][j];
    let beta = state.beta[s][j];
    let pi = state.pi[s];
    let level = state.u_slice[s][j];
    let mut outcomes = Vec::with_capacity(4);

    let mut spike_lm = pi.ln()
        + match spec.variant {
            SpikeVariant::DeDiffuse => {
                log_normal_pdf(beta, 0.0, lam) + ln_exp_scale_pdf(lam, 2.0 / state.tau0)
            }
            SpikeVariant::NormalDiffuse => log_normal_pdf(beta, 0.0, state.tau0),
            SpikeVariant::Dirac => unreachable!("dirac uses the collapsed site update"),
        };
    if spec.variant == SpikeVariant::NormalDiffuse && state.slab_count_excluding(j, s) == 0 {
        spike_lm += ln_exp_scale_pdf(lam, 2.0 / spec.hyper.fallback_slab_scale());
    }
    outcomes.push(AllocationOutcome {
        label: 0,
        log_mass: spike_lm,
    });

    let slab_lm_base = (1.0 - pi).ln();
    for (k0, w) in weights.iter().enumerate() {
        if *w > level {
            let atom = &state.chain.components[k0].atom;
            outcomes.push(AllocationOutcome {
                label: (k0 + 1) as u32,
                log_mass: slab_lm_base
                    + log_normal_pdf(beta, atom.location, lam)
                    + ln_exp_scale_pdf(lam, 2.0 / atom.scale),
            });
        }
    }
    outcomes
}

/// Collapsed site outcomes for the Dirac variant: the coefficient is
/// integrated out against the partial residual `resid_free = y_t - X_t beta_t
/// + x_j beta_j` (the fit with coefficient `j` removed), which turns the slab
/// mass into a rank-one-corrected Gaussian likelihood.
pub fn allocation_outcomes_dirac(
    state: &ChainState,
    spec: &ModelSpec,
    weights: &[f64],
    sigma_inv: &DMatrix<f64>,
    resid_free: &DVector<f64>,
    x_value: f64,
    x_row: usize,
    j: usize,
    s: usize,
) -> Vec<AllocationOutcome> {
    debug_assert!(spec.variant == SpikeVariant::Dirac);
    let lam = state.lambda[s][j];
    let pi = state.pi[s];
    let level = state.u_slice[s][j];
    let sigma_inv_resid = sigma_inv * resid_free;
    let quad_free = resid_free.dot(&sigma_inv_resid);
    let cross = x_value * sigma_inv_resid[x_row];
    let fisher = x_value * x_value * sigma_inv[(x_row, x_row)];

    let mut outcomes = Vec::with_capacity(4);
    let tau_ref = spec.hyper.fallback_slab_scale();
    let mut spike_lm = pi.ln() - 0.5 * quad_free;
    if state.slab_count_excluding(j, s) == 0 {
        // An all-spike coefficient keeps one latent-scale factor attached.
        spike_lm += ln_exp_scale_pdf(lam, 2.0 / tau_ref);
    }
    outcomes.push(AllocationOutcome {
        label: 0,
        log_mass: spike_lm,
    });

    // The slab side carries this slice's latent-scale factor at the fixed
    // prior-mean scale (see `lambda_dirac_conditional`).
    let slab_lm_base = (1.0 - pi).ln() + ln_exp_scale_pdf(lam, 2.0 / tau_ref);
    for (k0, w) in weights.iter().enumerate() {
        if *w > level {
            let atom = &state.chain.components[k0].atom;
            let mu = atom.location;
            let shift = cross - fisher * mu;
            let quad = quad_free - 2.0 * mu * cross + mu * mu * fisher
                - lam * shift * shift / (1.0 + lam * fisher);
            outcomes.push(AllocationOutcome {
                label: (k0 + 1) as u32,
                log_mass: slab_lm_base
                    - 0.5 * (1.0 + lam * fisher).ln()
                    - 0.5 * quad,
            });
        }
    }
    outcomes
}

fn draw_outcome<R: Rng + ?Sized>(
    outcomes: &[AllocationOutcome],
    s: usize,
    j: usize,
    rng: &mut R,
) -> Result<u32, StepError> {
    if outcomes.iter().all(|o| o.log_mass == f64::NEG_INFINITY) {
        return Err(StepError::DegenerateAllocation {
            time_index: s,
            coef: j,
        });
    }
    let masses: Vec<f64> = outcomes.iter().map(|o| o.log_mass).collect();
    Ok(outcomes[draw_from_log_masses(&masses, rng)].label)
}

/// Joint update of every `(d, gamma)` pair. The Dirac variant is strictly
/// sequential in the coefficient index within each slice and redraws each
/// coefficient from its scalar full conditional right after its allocation,
/// keeping the partial residuals exact. Afterwards, components beyond the
/// largest referenced label are dropped.
pub fn update_allocations<R: Rng + ?Sized>(
    state: &mut ChainState,
    spec: &ModelSpec,
    panel: &Panel,
    rng: &mut R,
) -> Result<(), StepError> {
    let slices = spec.slices();
    let n = spec.dim;
    match spec.variant {
        SpikeVariant::NormalDiffuse | SpikeVariant::DeDiffuse => {
            for s in 0..slices {
                let weights = state.chain.weights_at(s);
                for j in 0..spec.n_coef() {
                    let outcomes = allocation_outcomes_diffuse(state, spec, &weights, j, s);
                    let label = draw_outcome(&outcomes, s, j, rng)?;
                    state.d_alloc[s][j] = label;
                    state.gamma[s][j] = u8::from(label > 0);
                }
            }
        }
        SpikeVariant::Dirac => {
            let chol = Cholesky::new(state.sigma.clone()).ok_or(StepError::NonSpdScale)?;
            let sigma_inv = chol.inverse();
            for s in 0..slices {
                let weights = state.chain.weights_at(s);
                let y_prev = panel.row(s);
                let y = panel.row(s + 1);
                // Current residual y - B y_prev for this slice.
                let mut resid = y.clone();
                for j in 0..spec.n_coef() {
                    let (row, col) = coef_position(n, j);
                    resid[row] -= state.beta[s][j] * y_prev[col];
                }
                for j in 0..spec.n_coef() {
                    let (row, col) = coef_position(n, j);
                    let x_value = y_prev[col];
                    // Residual with coefficient j removed from the fit.
                    let mut resid_free = resid.clone();
                    resid_free[row] += x_value * state.beta[s][j];
                    let outcomes = allocation_outcomes_dirac(
                        state,
                        spec,
                        &weights,
                        &sigma_inv,
                        &resid_free,
                        x_value,
                        row,
                        j,
                        s,
                    );
                    let label = draw_outcome(&outcomes, s, j, rng)?;
                    state.d_alloc[s][j] = label;
                    state.gamma[s][j] = u8::from(label > 0);
                    let new_beta = if label == 0 {
                        0.0
                    } else {
                        let atom = state.atom(label);
                        let sigma_inv_resid = &sigma_inv * &resid_free;
                        let fisher = x_value * x_value * sigma_inv[(row, row)];
                        let precision = 1.0 / state.lambda[s][j] + fisher;
                        let mean_term =
                            atom.location / state.lambda[s][j] + x_value * sigma_inv_resid[row];
                        mean_term / precision
                            + rng.sample::<f64, _>(rand_distr::StandardNormal) / precision.sqrt()
                    };
                    state.beta[s][j] = new_beta;
                    resid = resid_free;
                    resid[row] -= x_value * new_beta;
                }
            }
        }
    }
    label_swap_pass(state, spec);
    let keep = state.max_referenced_label().max(1) as usize;
    state.chain.truncate(keep);
    Ok(())
}

/// One bubble pass of adjacent label swaps, front to back.
///
/// Swapping the component objects at stick positions k and k+1 (trajectories
/// and atoms move together, assignments follow their atoms) leaves every
/// factor of the joint invariant except the slice indicators: the
/// stick-chain priors are exchangeable across positions and the weight
/// factors cancel against the slice-variable densities. The move is its own
/// inverse, so accepting exactly when all slab levels still sit below their
/// component's weight is a valid Metropolis step. Heavily used components
/// migrate toward the front, where stick weights are structurally large at
/// every slice, which unblocks coefficients whose level would otherwise
/// never uncover a far-back component.
pub fn label_swap_pass(state: &mut ChainState, spec: &ModelSpec) {
    let slices = spec.slices();
    for k0 in 0..state.chain.len().saturating_sub(1) {
        let label_a = (k0 + 1) as u32;
        let label_b = (k0 + 2) as u32;
        state.chain.components.swap(k0, k0 + 1);
        let mut valid = true;
        'check: for s in 0..slices {
            let weights = state.chain.weights_at(s);
            for j in 0..spec.n_coef() {
                let d = state.d_alloc[s][j];
                if d != label_a && d != label_b {
                    continue;
                }
                // Assignments follow their component across the swap.
                let new_pos = if d == label_a { k0 + 1 } else { k0 };
                if state.u_slice[s][j] >= weights[new_pos] {
                    valid = false;
                    break 'check;
                }
            }
        }
        if valid {
            for s in 0..slices {
                for j in 0..spec.n_coef() {
                    let d = state.d_alloc[s][j];
                    if d == label_a {
                        state.d_alloc[s][j] = label_b;
                    } else if d == label_b {
                        state.d_alloc[s][j] = label_a;
                    }
                }
            }
        } else {
            state.chain.components.swap(k0, k0 + 1);
        }
    }
}

// ---------------------------------------------------------------------------
// Step 5: coefficients
// ---------------------------------------------------------------------------

/// Posterior precision and mean-term of the full coefficient vector at slice
/// `s` under a diffuse spike: `precision = PriorDiag^-1 + (y_prev y_prev')
/// (x) Sigma^-1`, `mean_term = Lambda^-1 (mu* . gamma) + X' Sigma^-1 y`.
pub fn beta_posterior_diffuse(
    state: &ChainState,
    spec: &ModelSpec,
    sigma_inv: &DMatrix<f64>,
    y_prev: &DVector<f64>,
    y: &DVector<f64>,
    s: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = spec.dim;
    let n2 = spec.n_coef();
    let sigma_inv_y = sigma_inv * y;
    let mut precision = DMatrix::zeros(n2, n2);
    let mut mean_term = DVector::zeros(n2);
    for ja in 0..n2 {
        let (ia, ca) = coef_position(n, ja);
        for jb in 0..n2 {
            let (ib, cb) = coef_position(n, jb);
            precision[(ja, jb)] = y_prev[ca] * y_prev[cb] * sigma_inv[(ia, ib)];
        }
        let prior_var = match spec.variant {
            SpikeVariant::DeDiffuse => state.lambda[s][ja],
            SpikeVariant::NormalDiffuse => {
                if state.gamma[s][ja] == 1 {
                    state.lambda[s][ja]
                } else {
                    state.tau0
                }
            }
            SpikeVariant::Dirac => unreachable!("dirac uses the slab sub-vector"),
        };
        precision[(ja, ja)] += 1.0 / prior_var;
        if state.gamma[s][ja] == 1 {
            mean_term[ja] = state.atom(state.d_alloc[s][ja]).location / state.lambda[s][ja];
        }
        mean_term[ja] += y_prev[ca] * sigma_inv_y[ia];
    }
    (precision, mean_term)
}

/// Posterior precision and mean-term of the slab sub-vector (Dirac variant)
/// at slice `s`; `slab` lists the included coefficient indices.
pub fn beta_posterior_dirac(
    state: &ChainState,
    spec: &ModelSpec,
    sigma_inv: &DMatrix<f64>,
    y_prev: &DVector<f64>,
    y: &DVector<f64>,
    slab: &[usize],
    s: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = spec.dim;
    let q = slab.len();
    let sigma_inv_y = sigma_inv * y;
    let mut precision = DMatrix::zeros(q, q);
    let mut mean_term = DVector::zeros(q);
    for (a, &ja) in slab.iter().enumerate() {
        let (ia, ca) = coef_position(n, ja);
        for (b, &jb) in slab.iter().enumerate() {
            let (ib, cb) = coef_position(n, jb);
            precision[(a, b)] = y_prev[ca] * y_prev[cb] * sigma_inv[(ia, ib)];
        }
        precision[(a, a)] += 1.0 / state.lambda[s][ja];
        mean_term[a] = state.atom(state.d_alloc[s][ja]).location / state.lambda[s][ja]
            + y_prev[ca] * sigma_inv_y[ia];
    }
    (precision, mean_term)
}

pub fn update_beta<R: Rng + ?Sized>(
    state: &mut ChainState,
    spec: &ModelSpec,
    panel: &Panel,
    rng: &mut R,
) -> Result<(), StepError> {
    let chol = Cholesky::new(state.sigma.clone()).ok_or(StepError::NonSpdScale)?;
    let sigma_inv = chol.inverse();
    for s in 0..spec.slices() {
        let y_prev = panel.row(s);
        let y = panel.row(s + 1);
        match spec.variant {
            SpikeVariant::NormalDiffuse | SpikeVariant::DeDiffuse => {
                let (precision, mean_term) =
                    beta_posterior_diffuse(state, spec, &sigma_inv, &y_prev, &y, s);
                state.beta[s] = sample_mvn_from_precision(&mean_term, &precision, rng)
                    .map_err(|_| StepError::SingularPrecision { time_index: s })?;
            }
            SpikeVariant::Dirac => {
                let slab: Vec<usize> =
                    (0..spec.n_coef()).filter(|j| state.gamma[s][*j] == 1).collect();
                let mut full = DVector::zeros(spec.n_coef());
                if !slab.is_empty() {
                    let (precision, mean_term) =
                        beta_posterior_dirac(state, spec, &sigma_inv, &y_prev, &y, &slab, s);
                    let draw = sample_mvn_from_precision(&mean_term, &precision, rng)
                        .map_err(|_| StepError::SingularPrecision { time_index: s })?;
                    for (a, &ja) in slab.iter().enumerate() {
                        full[ja] = draw[a];
                    }
                }
                state.beta[s] = full;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Step 6: innovation covariance
// ---------------------------------------------------------------------------

/// Inverse-Wishart posterior parameters: `dof + slices` degrees of freedom
/// and the prior scale plus the residual outer-product sum.
pub fn sigma_posterior_params(
    state: &ChainState,
    spec: &ModelSpec,
    panel: &Panel,
) -> (f64, DMatrix<f64>) {
    let n = spec.dim;
    let mut scale = spec.hyper.scale_matrix.clone();
    for s in 0..spec.slices() {
        let y_prev = panel.row(s);
        let mut resid = panel.row(s + 1);
        for j in 0..spec.n_coef() {
            let (row, col) = coef_position(n, j);
            resid[row] -= state.beta[s][j] * y_prev[col];
        }
        scale += &resid * resid.transpose();
    }
    (spec.hyper.dof + spec.slices() as f64, scale)
}

pub fn update_sigma<R: Rng + ?Sized>(
    state: &mut ChainState,
    spec: &ModelSpec,
    panel: &Panel,
    rng: &mut R,
) -> Result<(), StepError> {
    let (dof, scale) = sigma_posterior_params(state, spec, panel);
    let params = InverseWishartParams::new(dof, scale).map_err(|_| StepError::NonSpdScale)?;
    state.sigma = sample_inverse_wishart(&params, rng).map_err(|_| StepError::NonSpdScale)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Step 7: mixing probabilities
// ---------------------------------------------------------------------------

/// Beta parameters of the mixing probability at slice `s`:
/// `(1 + n^2 - #slab, eta + #slab)`.
pub fn pi_beta_params(state: &ChainState, spec: &ModelSpec, s: usize) -> (f64, f64) {
    let slab: f64 = state.gamma[s].iter().map(|g| *g as f64).sum();
    (
        1.0 + spec.n_coef() as f64 - slab,
        spec.hyper.sparsity_shape + slab,
    )
}

pub fn update_pi<R: Rng + ?Sized>(state: &mut ChainState, spec: &ModelSpec, rng: &mut R) {
    for s in 0..spec.slices() {
        let (shape1, shape2) = pi_beta_params(state, spec, s);
        state.pi[s] = clamp_stick(draw_beta(shape1, shape2, rng));
    }
}

/// One full sweep in the published order.
pub fn sweep<R: Rng + ?Sized>(
    state: &mut ChainState,
    spec: &ModelSpec,
    panel: &Panel,
    rng: &mut R,
) -> Result<(), StepError> {
    update_sticks_aux_slices(state, spec, rng);
    update_lambda(state, spec, rng);
    update_atoms(state, spec, rng);
    update_allocations(state, spec, panel, rng)?;
    update_beta(state, spec, panel, rng)?;
    update_sigma(state, spec, panel, rng)?;
    update_pi(state, spec, rng);
    Ok(())
}
