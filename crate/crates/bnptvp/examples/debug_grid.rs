// Criterion-style measurement: median inclusion separation and AUROC on the
// synthetic recovery task, with the fitted covariance, across small design
// variations driven by env vars.

use bnptvp::gibbs::{run_chain, McmcSettings, ModelSpec, SpikeVariant};
use bnptvp::var_core::{coef_position, generate_synthetic, SyntheticConfig};

fn auroc(scores: &[f64], truth: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*a].total_cmp(&scores[*b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            ranks[idx] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    let pos = truth.iter().filter(|t| **t).count() as f64;
    let neg = truth.len() as f64 - pos;
    let rank_sum: f64 = ranks.iter().zip(truth).filter(|(_, t)| **t).map(|(r, _)| *r).sum();
    (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg)
}

fn median(v: &mut Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() {
    let seed: u64 = std::env::var("GRID_SEED").ok().and_then(|v| v.parse().ok()).unwrap_or(11);
    let iters: u64 = std::env::var("GRID_ITERS").ok().and_then(|v| v.parse().ok()).unwrap_or(8000);
    let eta: f64 = std::env::var("GRID_ETA").ok().and_then(|v| v.parse().ok()).unwrap_or(1.0);
    let chain_seed: u64 =
        std::env::var("GRID_CHAIN_SEED").ok().and_then(|v| v.parse().ok()).unwrap_or(6);

    let (panel, truth) = generate_synthetic(&SyntheticConfig {
        dim: 3,
        t_len: 100,
        sparsity: 0.8,
        seed,
        allow_explosive: false,
    })
    .unwrap();
    let mut spec = ModelSpec::new(3, 100, SpikeVariant::Dirac);
    spec.hyper.sparsity_shape = eta;
    if let Some(a) = std::env::var("GRID_ALPHA").ok().and_then(|v| v.parse().ok()) {
        spec.hyper.concentration = a;
    }
    if let Some(m) = std::env::var("GRID_M").ok().and_then(|v| v.parse().ok()) {
        spec.hyper.dependence = m;
    }
    if let Some(p) = std::env::var("GRID_PSI").ok().and_then(|v| v.parse::<f64>().ok()) {
        spec.hyper.scale_matrix = nalgebra::DMatrix::identity(3, 3) * p;
    }
    if std::env::var("GRID_MINNESOTA").map_or(false, |v| v == "1") {
        let nu = spec.hyper.dof;
        let pooled = bnptvp::var_core::windowed_ls_noise_floor(&panel);
        let mut psi = nalgebra::DMatrix::zeros(3, 3);
        for i in 0..3 {
            psi[(i, i)] = pooled[(i, i)] * (nu - 4.0);
        }
        spec.hyper.scale_matrix = psi;
    }
    if let Some(nu) = std::env::var("GRID_NU").ok().and_then(|v| v.parse::<f64>().ok()) {
        spec.hyper.dof = nu;
    }
    let draws = run_chain(
        &spec,
        &panel,
        &McmcSettings {
            iters,
            burn_in: iters / 4,
            thin: 5,
            seed: chain_seed,
        },
    )
    .unwrap();
    let inclusion = bnptvp::graphs::inclusion_probabilities(&draws).unwrap();
    let mut on = Vec::new();
    let mut off = Vec::new();
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for s in 0..99 {
        for j in 0..9 {
            let (r, c) = coef_position(3, j);
            let prob = inclusion[s][j];
            scores.push(prob);
            labels.push(truth.support[s][r * 3 + c]);
            if truth.support[s][r * 3 + c] {
                on.push(prob);
            } else {
                off.push(prob);
            }
        }
    }
    let area = auroc(&scores, &labels);
    // Cell-level aggregation: mean inclusion per coefficient cell against
    // any-time support.
    let mut cell_scores = Vec::new();
    let mut cell_labels = Vec::new();
    for j in 0..9 {
        let mean: f64 = (0..99).map(|s| inclusion[s][j]).sum::<f64>() / 99.0;
        let (r, c) = coef_position(3, j);
        cell_scores.push(mean);
        cell_labels.push((0..99).any(|s| truth.support[s][r * 3 + c]));
    }
    let cell_area = auroc(&cell_scores, &cell_labels);
    let mut cell_on: Vec<f64> = cell_scores
        .iter()
        .zip(&cell_labels)
        .filter(|(_, l)| **l)
        .map(|(s, _)| *s)
        .collect();
    let mut cell_off: Vec<f64> = cell_scores
        .iter()
        .zip(&cell_labels)
        .filter(|(_, l)| !**l)
        .map(|(s, _)| *s)
        .collect();
    cell_on.sort_by(f64::total_cmp);
    cell_off.sort_by(f64::total_cmp);
    let cmed = |v: &Vec<f64>| v[v.len() / 2];
    println!(
        "  CELL-LEVEL: sep {:.3} auroc {:.3} (on {:?})",
        cmed(&cell_on) - cmed(&cell_off),
        cell_area,
        cell_on.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
    );
    let mut mean_sigma = vec![0.0; 3];
    for d in 0..draws.n_draws() {
        let sg = draws.sigma_at(d);
        for i in 0..3 {
            mean_sigma[i] += sg[i * 3 + i] / draws.n_draws() as f64;
        }
    }
    println!(
        "seed {seed} iters {iters} eta {eta}: med_on {:.3} med_off {:.3} sep {:.3} auroc {:.3} | sigma_hat [{:.3} {:.3} {:.3}] k* mean {:.1}",
        median(&mut on),
        median(&mut off),
        median(&mut on.clone()) - median(&mut off.clone()),
        area,
        mean_sigma[0],
        mean_sigma[1],
        mean_sigma[2],
        draws.k_star.iter().map(|k| *k as f64).sum::<f64>() / draws.n_draws() as f64,
    );
    // Mean slab beta and mean pi for the true cells, pooled over draws.
    for j in [1usize, 2] {
        let mut beta_sum = 0.0;
        let mut beta_n = 0usize;
        for d in 0..draws.n_draws() {
            let b = draws.beta_at(d);
            let g = draws.gamma_at(d);
            for s in 0..99 {
                if g[s * 9 + j] == 1 {
                    beta_sum += b[s * 9 + j];
                    beta_n += 1;
                }
            }
        }
        println!(
            "  cell j={j}: mean slab beta {:.3} over {} slab draws",
            beta_sum / beta_n.max(1) as f64,
            beta_n
        );
    }
    // Inclusion histograms.
    let hist = |v: &Vec<f64>| -> Vec<usize> {
        let mut h = vec![0usize; 10];
        for x in v {
            h[((x * 10.0) as usize).min(9)] += 1;
        }
        h
    };
    println!("  on-hist  {:?}", hist(&on));
    println!("  off-hist {:?}", hist(&off));
    let mut per_cell: Vec<(usize, f64)> = (0..9)
        .map(|j| {
            let mean: f64 = (0..99).map(|s| inclusion[s][j]).sum::<f64>() / 99.0;
            (j, (mean * 1000.0).round() / 1000.0)
        })
        .collect();
    per_cell.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("  per-cell mean inclusion {:?}", per_cell);
    for j in [2usize, 5] {
        let seg: Vec<f64> = (0..3)
            .map(|g| {
                let lo = g * 33;
                let hi = (g + 1) * 33;
                let v: f64 = (lo..hi).map(|s| inclusion[s][j]).sum::<f64>() / 33.0;
                (v * 100.0).round() / 100.0
            })
            .collect();
        let (r, c) = coef_position(3, j);
        let vals: Vec<f64> = (0..3)
            .map(|g| (truth.coefficients[g * 33][r * 3 + c] * 100.0).round() / 100.0)
            .collect();
        println!("  cell ({r},{c}): per-segment inclusion {seg:?} true values {vals:?}");
    }
    let pi_mean = draws.pi.iter().sum::<f64>() / draws.pi.len() as f64;
    let (mu, tau) = draws.atoms_at(draws.n_draws() - 1);
    println!(
        "  pi mean {:.3}; final atoms mu {:?} tau {:?}",
        pi_mean,
        mu.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>(),
        tau.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
    );
}
