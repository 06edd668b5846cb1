// Sweep-level trace of the scalar AR(0.9) case: who wins the allocation at a
// representative slice and why.

use bnptvp::gibbs::{run_chain_with_progress, steps, McmcSettings, ModelSpec, SpikeVariant};
use bnptvp::var_core::simulate_tvp_var;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let path = vec![DMatrix::from_element(1, 1, 0.9); 79];
    let sigma = DMatrix::from_element(1, 1, 0.09);
    let panel =
        simulate_tvp_var(&path, &sigma, &DVector::from_vec(vec![0.5]), &mut rng).unwrap();
    let spec = ModelSpec::new(1, 80, SpikeVariant::Dirac);
    let settings = McmcSettings {
        iters: 400,
        burn_in: 0,
        thin: 1,
        seed: 3,
    };
    run_chain_with_progress(&spec, &panel, &settings, |it, state| {
        if it % 40 != 0 {
            return;
        }
        let slab: usize = state.gamma.iter().map(|s| s[0] as usize).sum();
        let s = 40usize;
        let weights = state.chain.weights_at(s);
        let sigma_inv = Cholesky::new(state.sigma.clone()).unwrap().inverse();
        let y_prev = panel.row(s);
        let y = panel.row(s + 1);
        let mut resid_free = y.clone();
        // n = 1: the only coefficient is index 0.
        let _ = &resid_free;
        let outcomes = steps::allocation_outcomes_dirac(
            state,
            &spec,
            &weights,
            &sigma_inv,
            &resid_free,
            y_prev[0],
            0,
            0,
            s,
        );
        let atoms: Vec<(f64, f64, f64)> = state
            .chain
            .components
            .iter()
            .zip(&weights)
            .map(|(c, w)| {
                (
                    (c.atom.location * 100.0).round() / 100.0,
                    (c.atom.scale * 100.0).round() / 100.0,
                    (w * 1000.0).round() / 1000.0,
                )
            })
            .collect();
        println!(
            "sweep {it}: slab {slab}/79, lambda {:.4}, sigma {:.3}, pi[40] {:.2}, u[40] {:.3}, gamma[40] {}, beta[40] {:.3}",
            state.lambda[40][0],
            state.sigma[(0, 0)],
            state.pi[s],
            state.u_slice[s][0],
            state.gamma[s][0],
            state.beta[s][0],
        );
        println!("  atoms (mu, tau, w): {atoms:?}");
        println!(
            "  outcomes at slice 40 (label, log mass): {:?}",
            outcomes
                .iter()
                .map(|o| (o.label, (o.log_mass * 100.0).round() / 100.0))
                .collect::<Vec<_>>()
        );
    })
    .unwrap();
}
