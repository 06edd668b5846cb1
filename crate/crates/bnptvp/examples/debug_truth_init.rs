// Start the chain exactly at the data-generating configuration and watch
// whether the sampler stays there (mixing problem) or leaves (the posterior
// genuinely prefers other states).

use bnptvp::gibbs::{steps, ChainState, McmcSettings, ModelSpec, SpikeVariant};
use bnptvp::tsddp::{Atom, TsddpChain};
use bnptvp::var_core::{coef_position, generate_synthetic, SyntheticConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn main() {
    let (panel, truth) = generate_synthetic(&SyntheticConfig {
        dim: 3,
        t_len: 100,
        sparsity: 0.8,
        seed: 11,
        allow_explosive: false,
    })
    .unwrap();
    let spec = ModelSpec::new(3, 100, SpikeVariant::Dirac);
    let slices = 99;
    let mut rng = ChaCha12Rng::seed_from_u64(6);

    let mut chain = TsddpChain::init(1.0, 5, slices, spec.hyper.base_measure(), 4, &mut rng)
        .unwrap();
    // Atoms at the generator's cluster values.
    let locs = [0.7, 0.9, -0.8, 0.6];
    for (c, l) in chain.components.iter_mut().zip(locs) {
        c.atom = Atom { location: l, scale: 2.0 };
    }
    let mut beta = Vec::new();
    let mut gamma = Vec::new();
    let mut d_alloc = Vec::new();
    let mut u_slice = Vec::new();
    for s in 0..slices {
        let mut b = DVector::zeros(9);
        let mut g = vec![0u8; 9];
        let mut d = vec![0u32; 9];
        let mut u = vec![0.0f64; 9];
        let weights = chain.weights_at(s);
        for j in 0..9 {
            let (r, c) = coef_position(3, j);
            let value = truth.coefficients[s][r * 3 + c];
            b[j] = value;
            if value != 0.0 {
                g[j] = 1;
                // Nearest atom.
                let mut best = 0usize;
                for (k, comp) in chain.components.iter().enumerate() {
                    if (value - comp.atom.location).abs()
                        < (value - chain.components[best].atom.location).abs()
                    {
                        best = k;
                    }
                }
                d[j] = (best + 1) as u32;
                u[j] = rng.gen::<f64>() * weights[best];
            } else {
                u[j] = rng.gen::<f64>();
            }
        }
        beta.push(b);
        gamma.push(g);
        d_alloc.push(d);
        u_slice.push(u);
    }
    let mut sigma = DMatrix::zeros(3, 3);
    for i in 0..3 {
        sigma[(i, i)] = truth.sigma[i * 3 + i];
    }
    let mut state = ChainState {
        beta,
        sigma,
        lambda: vec![vec![0.003; 9]; slices],
        tau0: 1.0,
        chain,
        gamma,
        d_alloc,
        u_slice,
        pi: vec![0.7; slices],
    };

    let settings = McmcSettings { iters: 8000, burn_in: 0, thin: 1, seed: 6 };
    let _ = settings;
    let mut incl_on = vec![0usize; 2];
    let mut incl_off = 0usize;
    let mut n_rec = 0usize;
    for it in 1..=8000u64 {
        steps::sweep(&mut state, &spec, &panel, &mut rng).unwrap();
        if it % 800 == 0 {
            let slab: usize = state.gamma.iter().flat_map(|r| r.iter()).map(|g| *g as usize).sum();
            println!(
                "sweep {it}: sigma [{:.4} {:.4} {:.4}] slab {slab}/891 cell(1,0) {:.2} cell(2,0) {:.2}",
                state.sigma[(0, 0)],
                state.sigma[(1, 1)],
                state.sigma[(2, 2)],
                (0..99).map(|s| state.gamma[s][1] as usize).sum::<usize>() as f64 / 99.0,
                (0..99).map(|s| state.gamma[s][2] as usize).sum::<usize>() as f64 / 99.0,
            );
        }
        if it > 2000 {
            n_rec += 1;
            for s in 0..99 {
                incl_on[0] += state.gamma[s][1] as usize;
                incl_on[1] += state.gamma[s][2] as usize;
                for j in [0usize, 3, 4, 5, 6, 7, 8] {
                    incl_off += state.gamma[s][j] as usize;
                }
            }
        }
    }
    println!(
        "time-avg: cell(1,0) {:.3} cell(2,0) {:.3} nulls {:.3}",
        incl_on[0] as f64 / (99 * n_rec) as f64,
        incl_on[1] as f64 / (99 * n_rec) as f64,
        incl_off as f64 / (7 * 99 * n_rec) as f64
    );
}
