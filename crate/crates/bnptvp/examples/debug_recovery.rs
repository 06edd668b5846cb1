// Scratch instrumentation for the sparse-recovery dynamics. Not part of the
// test suite.

use bnptvp::gibbs::{run_chain_with_progress, McmcSettings, ModelSpec, SpikeVariant};
use bnptvp::var_core::{coef_position, generate_synthetic, SyntheticConfig};

fn main() {
    let (panel, truth) = generate_synthetic(&SyntheticConfig {
        dim: 3,
        t_len: 100,
        sparsity: 0.8,
        seed: 11,
        allow_explosive: false,
    })
    .unwrap();
    let nonzero: usize = truth
        .support
        .iter()
        .map(|s| s.iter().filter(|b| **b).count())
        .sum();
    println!(
        "truth: {} nonzero of {} coefficients, atoms {:?}, lyapunov {}",
        nonzero,
        99 * 9,
        truth.atom_values,
        truth.lyapunov
    );
    let var_y: Vec<f64> = (0..3)
        .map(|i| {
            let col: Vec<f64> = (0..panel.len()).map(|t| panel.values[(t, i)]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64
        })
        .collect();
    println!("panel variance per series: {var_y:?} (noise variance 0.09)");
    let spec = ModelSpec::new(3, 100, SpikeVariant::Dirac);
    let settings = McmcSettings {
        iters: 3000,
        burn_in: 0,
        thin: 1,
        seed: 6,
    };
    // Per-cell slab frequency over the run (cell = coefficient index,
    // averaged over slices), plus the true segment values per cell.
    let mut cell_on = vec![0usize; 9];
    let mut cell_total = vec![0usize; 9];
    let mut slice_on = vec![[0usize; 2]; 99]; // cells j=4, j=5
    let mut slice_total = 0usize;
    run_chain_with_progress(&spec, &panel, &settings, |it, state| {
        if it > 1000 {
            slice_total += 1;
            for s in 0..99 {
                for j in 0..9 {
                    cell_total[j] += 1;
                    cell_on[j] += state.gamma[s][j] as usize;
                }
                slice_on[s][0] += state.gamma[s][4] as usize;
                slice_on[s][1] += state.gamma[s][5] as usize;
            }
        }
        if it % 250 == 0 {
            let slab: usize = state
                .gamma
                .iter()
                .flat_map(|s| s.iter())
                .map(|g| *g as usize)
                .sum();
            let pi_mean: f64 = state.pi.iter().sum::<f64>() / state.pi.len() as f64;
            let lam_mean: f64 = state.lambda.iter().flatten().sum::<f64>()
                / state.lambda.iter().map(|r| r.len()).sum::<usize>() as f64;
            let atoms: Vec<(f64, f64)> = state
                .chain
                .components
                .iter()
                .map(|c| {
                    (
                        (c.atom.location * 1000.0).round() / 1000.0,
                        (c.atom.scale * 100.0).round() / 100.0,
                    )
                })
                .collect();
            // Count slab sites among true zeros vs true nonzeros.
            let mut on_true = 0usize;
            let mut on_false = 0usize;
            for s in 0..99 {
                for j in 0..9 {
                    let (r, c) = coef_position(3, j);
                    if state.gamma[s][j] == 1 {
                        if truth.support[s][r * 3 + c] {
                            on_true += 1;
                        } else {
                            on_false += 1;
                        }
                    }
                }
            }
            println!(
                "sweep {it}: slab {slab}/891 (nz {on_true}/{nonzero}, zero {on_false}/{}), pi {pi_mean:.3}, lambda {lam_mean:.3}, sigma11 {:.4}, k*={} atoms {:?}",
                891 - nonzero,
                state.sigma[(0, 0)],
                state.chain.len(),
                atoms
            );
        }
    })
    .unwrap();
    println!("slice detail for cells (1,1) and (2,1): s, x=y1[s], incl_11, incl_21");
    for s in (0..99).step_by(7) {
        println!(
            "  s={s:2} x={:+.3} incl(1,1)={:.2} incl(2,1)={:.2}",
            panel.values[(s, 1)],
            slice_on[s][0] as f64 / slice_total as f64,
            slice_on[s][1] as f64 / slice_total as f64
        );
    }
    println!("per-cell slab frequency (row r = equation, col c = source):");
    for j in 0..9 {
        let (r, c) = coef_position(3, j);
        let truth_vals: Vec<f64> = truth
            .coefficients
            .iter()
            .step_by(33)
            .map(|m| m[r * 3 + c])
            .collect();
        println!(
            "  cell ({r},{c}): slab {:.3}, true segment values {truth_vals:?}",
            cell_on[j] as f64 / cell_total[j] as f64
        );
    }
}
// quick data-scale probe appended during development
