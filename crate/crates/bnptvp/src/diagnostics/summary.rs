//! Per-parameter posterior summary tables.

use crate::io::PosteriorDraws;
use crate::var_core::coef_position;

use super::{ess_initial_monotone, quantile, split_rhat, DiagnosticsError};

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    /// Sum of per-chain effective sample sizes; `None` for degenerate
    /// traces.
    pub ess: Option<f64>,
    /// Split-chain potential scale reduction; present with two or more
    /// chains.
    pub rhat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub n_chains: usize,
    pub draws_per_chain: usize,
    pub rows: Vec<ParameterSummary>,
}

impl SummaryTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,mean,sd,q05,q50,q95,ess,rhat\n");
        for row in &self.rows {
            let ess = row.ess.map(|e| format!("{e:.1}")).unwrap_or_default();
            let rhat = row.rhat.map(|r| format!("{r:.4}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{},{}\n",
                row.name, row.mean, row.sd, row.q05, row.q50, row.q95, ess, rhat
            ));
        }
        out
    }
}

/// Summaries for every coefficient, covariance entry, mixing probability,
/// and the component count, pooled across chains. Chain order does not
/// affect any statistic.
pub fn summarize(chains: &[&PosteriorDraws]) -> Result<SummaryTable, DiagnosticsError> {
    if chains.is_empty() || chains.iter().any(|c| c.n_draws() == 0) {
        return Err(DiagnosticsError::EmptyDraws);
    }
    let first = chains[0];
    for c in chains.iter().skip(1) {
        if c.meta.dim != first.meta.dim || c.meta.t_len != first.meta.t_len {
            return Err(DiagnosticsError::ChainMismatch(format!(
                "{}x{} vs {}x{}",
                c.meta.t_len, c.meta.dim, first.meta.t_len, first.meta.dim
            )));
        }
    }
    let n = first.meta.dim;
    let slices = first.slices();
    let n_coef = first.n_coef();

    let mut rows = Vec::new();
    let mut add = |name: String, traces: Vec<Vec<f64>>| {
        let mut pooled: Vec<f64> = traces.iter().flatten().cloned().collect();
        let count = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / count;
        let sd = (pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
            / (count - 1.0).max(1.0))
        .sqrt();
        pooled.sort_by(f64::total_cmp);
        let ess = traces
            .iter()
            .map(|t| ess_initial_monotone(t))
            .try_fold(0.0, |acc, e| e.map(|e| acc + e));
        let rhat = if traces.len() >= 2 {
            let refs: Vec<&[f64]> = traces.iter().map(|t| t.as_slice()).collect();
            split_rhat(&refs)
        } else {
            None
        };
        rows.push(ParameterSummary {
            name,
            mean,
            sd,
            q05: quantile(&pooled, 0.05),
            q50: quantile(&pooled, 0.50),
            q95: quantile(&pooled, 0.95),
            ess,
            rhat,
        });
    };

    for s in 0..slices {
        for j in 0..n_coef {
            let (row, col) = coef_position(n, j);
            let traces: Vec<Vec<f64>> = chains
                .iter()
                .map(|c| {
                    (0..c.n_draws())
                        .map(|d| c.beta_at(d)[s * n_coef + j])
                        .collect()
                })
                .collect();
            add(format!("beta_t{}_r{}_c{}", s + 2, row + 1, col + 1), traces);
        }
    }
    for r in 0..n {
        for c_idx in 0..n {
            let traces: Vec<Vec<f64>> = chains
                .iter()
                .map(|c| {
                    (0..c.n_draws())
                        .map(|d| c.sigma_at(d)[r * n + c_idx])
                        .collect()
                })
                .collect();
            add(format!("sigma_r{}_c{}", r + 1, c_idx + 1), traces);
        }
    }
    for s in 0..slices {
        let traces: Vec<Vec<f64>> = chains
            .iter()
            .map(|c| (0..c.n_draws()).map(|d| c.pi[d * slices + s]).collect())
            .collect();
        add(format!("pi_t{}", s + 2), traces);
    }
    let traces: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| c.k_star.iter().map(|k| *k as f64).collect())
        .collect();
    add("k_star".to_string(), traces);

    Ok(SummaryTable {
        n_chains: chains.len(),
        draws_per_chain: first.n_draws(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{run_chain, McmcSettings, ModelSpec, SpikeVariant};
    use crate::var_core::{generate_synthetic, SyntheticConfig};

    fn chain(seed: u64) -> PosteriorDraws {
        let (panel, _) = generate_synthetic(&SyntheticConfig {
            dim: 2,
            t_len: 10,
            sparsity: 0.5,
            seed: 2,
            allow_explosive: false,
        })
        .unwrap();
        let spec = ModelSpec::new(2, 10, SpikeVariant::NormalDiffuse);
        run_chain(
            &spec,
            &panel,
            &McmcSettings {
                iters: 120,
                burn_in: 20,
                thin: 1,
                seed,
            },
        )
        .unwrap()
    }

    #[test]
    fn summary_has_expected_rows_and_rhat_only_with_multiple_chains() {
        let a = chain(1);
        let single = summarize(&[&a]).unwrap();
        // 9 slices * 4 coefficients + 4 sigma + 9 pi + 1 k_star
        assert_eq!(single.rows.len(), 9 * 4 + 4 + 9 + 1);
        assert!(single.rows.iter().all(|r| r.rhat.is_none()));
        let b = chain(2);
        let multi = summarize(&[&a, &b]).unwrap();
        assert!(multi.rows.iter().any(|r| r.rhat.is_some()));
        // Permutation invariance.
        let swapped = summarize(&[&b, &a]).unwrap();
        for (x, y) in multi.rows.iter().zip(&swapped.rows) {
            assert_eq!(x.name, y.name);
            assert!((x.mean - y.mean).abs() < 1e-12);
            assert_eq!(x.rhat.is_some(), y.rhat.is_some());
        }
        let csv = multi.to_csv();
        assert!(csv.starts_with("parameter,mean"));
        assert!(csv.lines().count() == multi.rows.len() + 1);
    }

    #[test]
    fn constant_trace_yields_zero_sd_and_no_ess() {
        let mut a = chain(3);
        let slices = a.slices();
        // Force a constant pi trace.
        for d in 0..a.n_draws() {
            a.pi[d * slices] = 0.25;
        }
        let table = summarize(&[&a]).unwrap();
        let row = table.rows.iter().find(|r| r.name == "pi_t2").unwrap();
        assert_eq!(row.sd, 0.0);
        assert!(row.ess.is_none());
    }

    #[test]
    fn empty_draws_rejected() {
        let (panel, _) = generate_synthetic(&SyntheticConfig {
            dim: 2,
            t_len: 10,
            sparsity: 0.5,
            seed: 2,
            allow_explosive: false,
        })
        .unwrap();
        let spec = ModelSpec::new(2, 10, SpikeVariant::Dirac);
        let empty = run_chain(
            &spec,
            &panel,
            &McmcSettings {
                iters: 5,
                burn_in: 5,
                thin: 1,
                seed: 0,
            },
        )
        .unwrap();
        assert!(matches!(
            summarize(&[&empty]),
            Err(DiagnosticsError::EmptyDraws)
        ));
    }
}
