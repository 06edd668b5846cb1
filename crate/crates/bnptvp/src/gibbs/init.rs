//! Chain initialization.
//!
//! Coefficients start at the per-time ridge fit. The innovation covariance
//! starts at the pooled (constant-coefficient) least-squares residual
//! covariance: per-time ridge residuals scale with the data rather than the
//! noise, and a covariance started far above the noise floor feeds the
//! coefficient-draw wiggle back into itself until the quiet equations are
//! washed out. Latent scales start small and atoms start on quantiles of
//! the ridge coefficients for the same reason: every slice is saturated
//! (n^2 free coefficients against n observations), so the slab must begin
//! tight around plausible cluster locations or the variance floor never
//! holds.

use rand::Rng;

use crate::tsddp::{Atom, TsddpChain};
use crate::var_core::{ridge_init, windowed_ls_noise_floor, Panel};

use super::{ChainState, GibbsError, ModelSpec};

const INIT_LAMBDA: f64 = 0.01;
const INIT_ATOMS: usize = 5;

pub fn init_state<R: Rng + ?Sized>(
    spec: &ModelSpec,
    panel: &Panel,
    rng: &mut R,
) -> Result<ChainState, GibbsError> {
    let slices = spec.slices();
    let (beta, _ridge_cov) = ridge_init(panel, 1.0);
    let sigma = windowed_ls_noise_floor(panel);
    let mut chain = TsddpChain::init(
        spec.hyper.concentration,
        spec.hyper.dependence,
        slices,
        spec.hyper.base_measure(),
        INIT_ATOMS,
        rng,
    )
    .map_err(|e| GibbsError::InvalidSpec(e.to_string()))?;
    // Atoms on ridge-coefficient quantiles (always including zero), so the
    // initial allocation pass can place every coefficient near a plausible
    // cluster.
    let mut pool: Vec<f64> = beta.iter().flat_map(|b| b.iter().cloned()).collect();
    pool.sort_by(f64::total_cmp);
    let quantile = |q: f64| pool[((pool.len() - 1) as f64 * q) as usize];
    let locations = [0.0, quantile(0.1), quantile(0.35), quantile(0.65), quantile(0.9)];
    for (component, location) in chain.components.iter_mut().zip(locations) {
        component.atom = Atom {
            location,
            scale: spec.hyper.fallback_slab_scale(),
        };
    }
    let n_coef = spec.n_coef();
    let mut u_slice = Vec::with_capacity(slices);
    let mut d_alloc = Vec::with_capacity(slices);
    for s in 0..slices {
        let weights = chain.weights_at(s);
        let mut u_row = Vec::with_capacity(n_coef);
        let mut d_row = Vec::with_capacity(n_coef);
        for j in 0..n_coef {
            // Start every coefficient on the nearest atom.
            let mut best = 0usize;
            for (k, component) in chain.components.iter().enumerate() {
                if (beta[s][j] - component.atom.location).abs()
                    < (beta[s][j] - chain.components[best].atom.location).abs()
                {
                    best = k;
                }
            }
            d_row.push((best + 1) as u32);
            u_row.push(rng.gen::<f64>() * weights[best]);
        }
        u_slice.push(u_row);
        d_alloc.push(d_row);
    }
    Ok(ChainState {
        beta,
        sigma,
        lambda: vec![vec![INIT_LAMBDA; n_coef]; slices],
        tau0: spec.hyper.spike_scale_prior_center(spec.variant),
        chain,
        gamma: vec![vec![1; n_coef]; slices],
        d_alloc,
        u_slice,
        pi: vec![0.5; slices],
    })
}
