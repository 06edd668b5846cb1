// Minimal check: a strong scalar AR(1) must be detected by the point-mass
// spike sampler, and pure noise must not be.

use bnptvp::gibbs::{run_chain, McmcSettings, ModelSpec, SpikeVariant};
use bnptvp::var_core::{simulate_tvp_var, Panel};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn inclusion(panel: &Panel, label: &str) {
    let spec = ModelSpec::new(1, panel.len(), SpikeVariant::Dirac);
    let draws = run_chain(
        &spec,
        panel,
        &McmcSettings {
            iters: 4000,
            burn_in: 1000,
            thin: 1,
            seed: 3,
        },
    )
    .unwrap();
    let mut on = 0usize;
    let mut total = 0usize;
    for d in 0..draws.n_draws() {
        for g in draws.gamma_at(d) {
            on += *g as usize;
            total += 1;
        }
    }
    println!("{label}: inclusion {:.3}", on as f64 / total as f64);
}

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let path = vec![DMatrix::from_element(1, 1, 0.9); 79];
    let sigma = DMatrix::from_element(1, 1, 0.09);
    let ar = simulate_tvp_var(&path, &sigma, &DVector::from_vec(vec![0.5]), &mut rng).unwrap();
    inclusion(&ar, "AR(0.9), T=80");

    let path = vec![DMatrix::from_element(1, 1, 0.0); 79];
    let noise = simulate_tvp_var(&path, &sigma, &DVector::from_vec(vec![0.5]), &mut rng).unwrap();
    inclusion(&noise, "white noise, T=80");
}
