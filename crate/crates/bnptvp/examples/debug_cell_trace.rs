// Sweep-level trace of one strongly-evidenced cell in the n = 3 synthetic
// panel: allocation outcomes, atom availability, and state.

use bnptvp::gibbs::{run_chain_with_progress, steps, McmcSettings, ModelSpec, SpikeVariant};
use bnptvp::var_core::{coef_position, generate_synthetic, SyntheticConfig};
use nalgebra::Cholesky;

fn main() {
    let (panel, _truth) = generate_synthetic(&SyntheticConfig {
        dim: 3,
        t_len: 100,
        sparsity: 0.8,
        seed: 11,
        allow_explosive: false,
    })
    .unwrap();
    let spec = ModelSpec::new(3, 100, SpikeVariant::Dirac);
    let settings = McmcSettings {
        iters: 120,
        burn_in: 0,
        thin: 1,
        seed: 6,
    };
    let j = 2usize; // cell (2,0): equation 2, source 0
    let s = 50usize;
    run_chain_with_progress(&spec, &panel, &settings, |it, state| {
        if it % 6 != 0 {
            return;
        }
        let weights = state.chain.weights_at(s);
        let sigma_inv = Cholesky::new(state.sigma.clone()).unwrap().inverse();
        let y_prev = panel.row(s);
        let y = panel.row(s + 1);
        let (row, col) = coef_position(3, j);
        let mut resid_free = y.clone();
        for jj in 0..9 {
            if jj == j {
                continue;
            }
            let (r2, c2) = coef_position(3, jj);
            resid_free[r2] -= state.beta[s][jj] * y_prev[c2];
        }
        let outcomes = steps::allocation_outcomes_dirac(
            &state, &spec, &weights, &sigma_inv, &resid_free, y_prev[col], row, j, s,
        );
        let mut sorted = outcomes.clone();
        sorted.sort_by(|a, b| b.log_mass.total_cmp(&a.log_mass));
        println!(
            "sweep {it}: gamma {} d {} u {:.3} | sigma diag ({:.3},{:.3},{:.3}) pi {:.2} lam_j {:.4}",
            state.gamma[s][j],
            state.d_alloc[s][j],
            state.u_slice[s][j],
            state.sigma[(0, 0)],
            state.sigma[(1, 1)],
            state.sigma[(2, 2)],
            state.pi[s],
            state.lambda[s][j],
        );
        let atoms: Vec<(f64, f64)> = state
            .chain
            .components
            .iter()
            .zip(&weights)
            .map(|(c, w)| ((c.atom.location * 100.0).round() / 100.0, (w * 1000.0).round() / 1000.0))
            .collect();
        println!("  atoms (mu, w): {atoms:?}");
        println!(
            "  top outcomes: {:?}",
            sorted
                .iter()
                .take(4)
                .map(|o| (o.label, (o.log_mass * 10.0).round() / 10.0))
                .collect::<Vec<_>>()
        );
    })
    .unwrap();
}
