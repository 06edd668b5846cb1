// Scan generator seeds for a structurally rich synthetic draw: persistent
// own-lags plus cross links and a majority of true zeros.

use bnptvp::var_core::{generate_synthetic, SyntheticConfig};

fn main() {
    for seed in 0..60u64 {
        let Ok((panel, truth)) = generate_synthetic(&SyntheticConfig {
            dim: 3,
            t_len: 100,
            sparsity: 0.8,
            seed,
            allow_explosive: false,
        }) else {
            continue;
        };
        let nonzero: usize = truth
            .support
            .iter()
            .map(|s| s.iter().filter(|b| **b).count())
            .sum();
        // Distinct segments and their diagonal richness.
        let mut segs: Vec<&Vec<f64>> = Vec::new();
        for c in &truth.coefficients {
            if !segs.iter().any(|s| *s == c) {
                segs.push(c);
            }
        }
        let diag_counts: Vec<usize> = segs
            .iter()
            .map(|s| (0..3).filter(|i| s[i * 3 + i] != 0.0).count())
            .collect();
        let cross_counts: Vec<usize> = segs
            .iter()
            .map(|s| {
                (0..9)
                    .filter(|j| j % 3 != j / 3 && s[(j % 3) * 3 + j / 3] != 0.0)
                    .count()
            })
            .collect();
        let var_y: Vec<f64> = (0..3)
            .map(|i| {
                let col: Vec<f64> = (0..panel.len()).map(|t| panel.values[(t, i)]).collect();
                let mean = col.iter().sum::<f64>() / col.len() as f64;
                col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64
            })
            .collect();
        let min_diag = diag_counts.iter().min().unwrap();
        let total_cross: usize = cross_counts.iter().sum();
        if *min_diag >= 2 && total_cross >= 2 && nonzero <= 450 {
            println!(
                "seed {seed}: nonzero {nonzero}, diag per segment {diag_counts:?}, cross {cross_counts:?}, var_y {:?}",
                var_y.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
            );
        }
    }
}
