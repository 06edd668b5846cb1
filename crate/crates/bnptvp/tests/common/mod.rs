//! Shared oracles for the integration suites: quadrature CDFs, discrete
//! enumeration distances, AUROC, and a hand-built frozen sampler state.
//! Everything here is independent of the library's sampling path.

use bnptvp::gibbs::{ChainState, ModelSpec, SpikeVariant};
use bnptvp::tsddp::{Atom, BaseMeasureParams, TsddpChain, TsddpComponent};
use bnptvp::var_core::Panel;
use nalgebra::{DMatrix, DVector};

/// Cumulative distribution of the kernel `x^(order-1) exp(-(rate x +
/// inv_rate / x) / 2)`, from Simpson quadrature in log space.
pub struct QuadratureCdf {
    grid: Vec<f64>,
    cumulative: Vec<f64>,
}

impl QuadratureCdf {
    pub fn for_gig(order: f64, rate: f64, inv_rate: f64) -> Self {
        let ln_kernel = |s: f64| order * s - 0.5 * (rate * s.exp() + inv_rate * (-s).exp());
        // Mode of the log-kernel in s = ln x: a w^2/2 - p w - b/2 = 0.
        let mode_x = (order + (order * order + rate * inv_rate).sqrt()) / rate;
        let s_mode = mode_x.ln();
        let peak = ln_kernel(s_mode);
        let mut s_lo = s_mode;
        while ln_kernel(s_lo) > peak - 45.0 {
            s_lo -= 0.25;
        }
        let mut s_hi = s_mode;
        while ln_kernel(s_hi) > peak - 45.0 {
            s_hi += 0.25;
        }
        let n = 16_000usize;
        let h = (s_hi - s_lo) / n as f64;
        let mut grid = Vec::with_capacity(n + 1);
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut prev = (ln_kernel(s_lo) - peak).exp();
        grid.push(s_lo.exp());
        cumulative.push(0.0);
        for i in 1..=n {
            let s = s_lo + i as f64 * h;
            let value = (ln_kernel(s) - peak).exp();
            acc += 0.5 * (prev + value) * h;
            prev = value;
            grid.push(s.exp());
            cumulative.push(acc);
        }
        let total = acc;
        for c in cumulative.iter_mut() {
            *c /= total;
        }
        QuadratureCdf { grid, cumulative }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.grid[0] {
            return 0.0;
        }
        if x >= *self.grid.last().unwrap() {
            return 1.0;
        }
        let idx = self.grid.partition_point(|g| *g < x);
        let (x0, x1) = (self.grid[idx - 1], self.grid[idx]);
        let (c0, c1) = (self.cumulative[idx - 1], self.cumulative[idx]);
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    }

    /// Mean of the normalized density, by the same quadrature.
    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            let mid = 0.5 * (self.grid[i] + self.grid[i - 1]);
            acc += mid * (self.cumulative[i] - self.cumulative[i - 1]);
        }
        acc
    }
}

/// Kolmogorov-Smirnov distance of draws against a discrete distribution
/// given by unnormalized masses over indices `0..k`.
pub fn discrete_ks(draws: &[usize], masses: &[f64]) -> f64 {
    let total: f64 = masses.iter().sum();
    let n = draws.len() as f64;
    let mut counts = vec![0usize; masses.len()];
    for d in draws {
        counts[*d] += 1;
    }
    let mut exact = 0.0;
    let mut empirical = 0.0;
    let mut distance = 0.0f64;
    for (mass, count) in masses.iter().zip(&counts) {
        exact += mass / total;
        empirical += *count as f64 / n;
        distance = distance.max((exact - empirical).abs());
    }
    distance
}

/// Area under the ROC curve with midrank tie handling; `score` higher for
/// predicted positives, `truth` the actual labels.
pub fn auroc(scores: &[f64], truth: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*a].total_cmp(&scores[*b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = midrank;
        }
        i = j + 1;
    }
    let positives = truth.iter().filter(|t| **t).count() as f64;
    let negatives = truth.len() as f64 - positives;
    if positives == 0.0 || negatives == 0.0 {
        return f64::NAN;
    }
    let rank_sum: f64 = ranks
        .iter()
        .zip(truth)
        .filter(|(_, t)| **t)
        .map(|(r, _)| *r)
        .sum();
    (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives)
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn component(sticks: &[f64], aux: &[u32], location: f64, scale: f64) -> TsddpComponent {
    TsddpComponent {
        sticks: sticks.to_vec(),
        aux: aux.to_vec(),
        atom: Atom { location, scale },
    }
}

/// The frozen n = 2, T = 4 configuration used by the full-conditional
/// oracle suite.
pub fn frozen_state(variant: SpikeVariant) -> (ModelSpec, ChainState, Panel) {
    let spec = ModelSpec::new(2, 4, variant);
    let chain = TsddpChain {
        alpha: spec.hyper.concentration,
        dependence: spec.hyper.dependence,
        horizon: 3,
        base: BaseMeasureParams {
            loc_mean: spec.hyper.loc_mean,
            loc_var: spec.hyper.loc_var,
            scale_shape: spec.hyper.scale_shape,
            scale_scale: spec.hyper.scale_scale,
        },
        components: vec![
            component(&[0.5, 0.4, 0.6], &[2, 1], 0.8, 2.0),
            component(&[0.3, 0.5, 0.2], &[1, 3], -0.4, 1.5),
            component(&[0.2, 0.3, 0.4], &[0, 2], 0.1, 3.0),
        ],
    };
    let gamma = vec![vec![1, 0, 1, 1], vec![1, 1, 0, 0], vec![0, 1, 1, 0]];
    let d_alloc = vec![vec![1, 0, 2, 1], vec![2, 1, 0, 0], vec![0, 3, 1, 0]];
    let beta = vec![
        DVector::from_vec(vec![0.7, 0.05, -0.3, 0.9]),
        DVector::from_vec(vec![-0.5, 0.75, 0.02, -0.08]),
        DVector::from_vec(vec![0.01, 0.2, 0.85, 0.03]),
    ];
    let u_slice = vec![
        vec![0.10, 0.30, 0.02, 0.15],
        vec![0.05, 0.20, 0.50, 0.40],
        vec![0.25, 0.01, 0.12, 0.60],
    ];
    let state = ChainState {
        beta,
        sigma: DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.4]),
        lambda: vec![vec![1.0, 0.5, 2.0, 0.8]; 3],
        tau0: 0.8,
        chain,
        gamma,
        d_alloc,
        u_slice,
        pi: vec![0.5, 0.3, 0.7],
    };
    let values = DMatrix::from_row_slice(4, 2, &[0.4, -0.3, 0.6, 0.2, -0.1, 0.5, 0.3, -0.2]);
    let panel = Panel::new(vec!["a".into(), "b".into()], values).unwrap();
    (spec, state, panel)
}
