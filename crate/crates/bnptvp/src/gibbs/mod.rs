//! The seven-step Gibbs sweep over the joint posterior.
//!
//! Each iteration updates, in order: (1) stick-breaking fractions, binomial
//! auxiliaries, and slice variables; (2) the latent coefficient scales; (3)
//! the atoms and the spike scale; (4) the allocation pairs `(d, gamma)`; (5)
//! the coefficient vectors; (6) the innovation covariance; (7) the mixing
//! probabilities. The spike component is dispatched by [`SpikeVariant`]:
//! a point mass at zero, a zero-centred Gaussian, or a zero-centred
//! double exponential.

pub mod steps;

mod init;
mod run;

pub use run::{run_chain, run_chain_with_progress, McmcSettings};

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::distributions::DistributionError;
use crate::io::HyperRecord;
use crate::tsddp::{BaseMeasureParams, TsddpChain};

/// Which spike distribution sits under the slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikeVariant {
    /// Point mass at zero: spiked coefficients are exactly zero.
    Dirac,
    /// Zero-centred Gaussian with its own scale `tau0`.
    NormalDiffuse,
    /// Zero-centred double exponential sharing the coefficient's latent
    /// scale, with rate scale `tau0`.
    DeDiffuse,
}

impl SpikeVariant {
    pub fn parse(text: &str) -> Option<Self> {
        match text.to_ascii_lowercase().as_str() {
            "dirac" => Some(SpikeVariant::Dirac),
            "normal" | "normal_diffuse" => Some(SpikeVariant::NormalDiffuse),
            "de" | "de_diffuse" | "double_exponential" => Some(SpikeVariant::DeDiffuse),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpikeVariant::Dirac => "dirac",
            SpikeVariant::NormalDiffuse => "normal",
            SpikeVariant::DeDiffuse => "de",
        }
    }
}

/// The full fixed hyper-parameter stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    /// Atom location prior mean.
    pub loc_mean: f64,
    /// Atom location prior variance.
    pub loc_var: f64,
    /// Shape of the Gamma prior on atom scales.
    pub scale_shape: f64,
    /// Scale of the Gamma prior on atom scales.
    pub scale_scale: f64,
    /// Spike-scale prior shape (Gamma under the double-exponential spike,
    /// inverse Gamma under the Normal spike; unused under Dirac).
    pub spike_shape: f64,
    /// Spike-scale prior scale.
    pub spike_scale: f64,
    /// Dirichlet-process concentration.
    pub concentration: f64,
    /// Second shape of the Beta(1, eta) prior on the mixing probabilities.
    pub sparsity_shape: f64,
    /// Temporal dependence strength of the weight chains.
    pub dependence: u32,
    /// Inverse-Wishart degrees of freedom.
    pub dof: f64,
    /// Inverse-Wishart scale matrix.
    pub scale_matrix: DMatrix<f64>,
}

impl Hyperparameters {
    /// The elicited defaults: `c = 0, d = 4, a1 = 20, b1 = 0.1, a0 = 0.64,
    /// b0 = 1.25, alpha = 1, eta = 1, m = 5, nu = n + 12, psi = I/n`.
    pub fn defaults(dim: usize) -> Self {
        Hyperparameters {
            loc_mean: 0.0,
            loc_var: 4.0,
            scale_shape: 20.0,
            scale_scale: 0.1,
            spike_shape: 0.64,
            spike_scale: 1.25,
            concentration: 1.0,
            sparsity_shape: 1.0,
            dependence: 5,
            dof: dim as f64 + 12.0,
            scale_matrix: DMatrix::identity(dim, dim) / dim as f64,
        }
    }

    pub fn base_measure(&self) -> BaseMeasureParams {
        BaseMeasureParams {
            loc_mean: self.loc_mean,
            loc_var: self.loc_var,
            scale_shape: self.scale_shape,
            scale_scale: self.scale_scale,
        }
    }

    /// Prior-mean atom scale, used as the rate scale of the latent-scale
    /// factor attached to coefficients with no slab assignment at all.
    pub fn fallback_slab_scale(&self) -> f64 {
        self.scale_shape * self.scale_scale
    }

    /// Prior mean of the spike scale under the given variant (prior mode
    /// when the inverse-Gamma mean does not exist).
    pub fn spike_scale_prior_center(&self, variant: SpikeVariant) -> f64 {
        match variant {
            SpikeVariant::DeDiffuse => self.spike_shape * self.spike_scale,
            SpikeVariant::NormalDiffuse => {
                if self.spike_shape > 1.0 {
                    self.spike_scale / (self.spike_shape - 1.0)
                } else {
                    self.spike_scale / (self.spike_shape + 1.0)
                }
            }
            SpikeVariant::Dirac => 1.0,
        }
    }

    /// Same scalar hyper-parameters, with the dimension-dependent pieces
    /// (degrees of freedom, scale matrix) reset to their defaults for `dim`.
    pub fn rescaled_for_dim(&self, dim: usize) -> Self {
        Hyperparameters {
            dof: dim as f64 + 12.0,
            scale_matrix: DMatrix::identity(dim, dim) / dim as f64,
            ..self.clone()
        }
    }

    pub fn to_record(&self) -> HyperRecord {
        HyperRecord {
            loc_mean: self.loc_mean,
            loc_var: self.loc_var,
            scale_shape: self.scale_shape,
            scale_scale: self.scale_scale,
            spike_shape: self.spike_shape,
            spike_scale: self.spike_scale,
            concentration: self.concentration,
            sparsity_shape: self.sparsity_shape,
            dependence: self.dependence,
            dof: self.dof,
            scale_matrix: self.scale_matrix.iter().cloned().collect(),
        }
    }

    pub fn from_record(record: &HyperRecord, dim: usize) -> Result<Self, GibbsError> {
        if record.scale_matrix.len() != dim * dim {
            return Err(GibbsError::InvalidSpec(format!(
                "scale matrix has {} entries for dimension {dim}",
                record.scale_matrix.len()
            )));
        }
        Ok(Hyperparameters {
            loc_mean: record.loc_mean,
            loc_var: record.loc_var,
            scale_shape: record.scale_shape,
            scale_scale: record.scale_scale,
            spike_shape: record.spike_shape,
            spike_scale: record.spike_scale,
            concentration: record.concentration,
            sparsity_shape: record.sparsity_shape,
            dependence: record.dependence,
            dof: record.dof,
            scale_matrix: DMatrix::from_column_slice(dim, dim, &record.scale_matrix),
        })
    }
}

/// Model dimensions, spike variant, and hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub dim: usize,
    pub t_len: usize,
    pub variant: SpikeVariant,
    pub hyper: Hyperparameters,
}

impl ModelSpec {
    pub fn new(dim: usize, t_len: usize, variant: SpikeVariant) -> Self {
        ModelSpec {
            dim,
            t_len,
            variant,
            hyper: Hyperparameters::defaults(dim),
        }
    }

    /// Coefficient slices: one per time point after the first.
    pub fn slices(&self) -> usize {
        self.t_len - 1
    }

    pub fn n_coef(&self) -> usize {
        self.dim * self.dim
    }

    pub fn validate(&self) -> Result<(), GibbsError> {
        if self.dim == 0 {
            return Err(GibbsError::InvalidSpec("dimension must be positive".into()));
        }
        if self.t_len < 3 {
            return Err(GibbsError::InvalidSpec(format!(
                "t_len must be at least 3 so the weight chains span two slices, got {}",
                self.t_len
            )));
        }
        let h = &self.hyper;
        for (name, value) in [
            ("loc_var", h.loc_var),
            ("scale_shape", h.scale_shape),
            ("scale_scale", h.scale_scale),
            ("spike_shape", h.spike_shape),
            ("spike_scale", h.spike_scale),
            ("concentration", h.concentration),
            ("sparsity_shape", h.sparsity_shape),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GibbsError::InvalidSpec(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !(h.dof > self.dim as f64 - 1.0) {
            return Err(GibbsError::InvalidSpec(format!(
                "dof {} must exceed dim - 1 = {}",
                h.dof,
                self.dim - 1
            )));
        }
        if h.scale_matrix.nrows() != self.dim || h.scale_matrix.ncols() != self.dim {
            return Err(GibbsError::InvalidSpec("scale matrix dimension mismatch".into()));
        }
        if Cholesky::new(h.scale_matrix.clone()).is_none() {
            return Err(GibbsError::InvalidSpec(
                "scale matrix is not positive definite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GibbsError {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("panel does not match the specification: {0}")]
    PanelMismatch(String),
    #[error("invalid sampler settings: {0}")]
    InvalidSettings(String),
    #[error("iteration {iteration}: {source}")]
    Step {
        iteration: u64,
        #[source]
        source: StepError,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error("coefficient posterior precision is singular at time slice {time_index}")]
    SingularPrecision { time_index: usize },
    #[error("covariance posterior scale is not positive definite")]
    NonSpdScale,
    #[error("allocation masses all vanished at slice {time_index}, coefficient {coef}")]
    DegenerateAllocation { time_index: usize, coef: usize },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// One full configuration of every latent variable and parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    /// Coefficient vector per slice, each of length `dim^2`.
    pub beta: Vec<DVector<f64>>,
    pub sigma: DMatrix<f64>,
    /// Latent scale per `[slice][coef]`. The diffuse variants share one
    /// scale per coefficient across time (every slice holds the same
    /// value); the point-mass variant keeps them per slice — the pooled
    /// scale's conditional order `1 - slices/2` drives the scale to zero as
    /// the horizon grows, freezing the coefficients onto their atoms.
    pub lambda: Vec<Vec<f64>>,
    /// Spike scale (unused under the Dirac variant).
    pub tau0: f64,
    /// Sticks, auxiliaries, and atoms; horizon equals the slice count.
    pub chain: TsddpChain,
    /// `[slice][coef]`: 1 = slab, 0 = spike.
    pub gamma: Vec<Vec<u8>>,
    /// `[slice][coef]`: 0 = spike, `k >= 1` points at `chain.components[k-1]`.
    pub d_alloc: Vec<Vec<u32>>,
    /// Slice-sampler uniforms, `[slice][coef]`.
    pub u_slice: Vec<Vec<f64>>,
    /// Mixing probability per slice.
    pub pi: Vec<f64>,
}

impl ChainState {
    /// Number of slices with a slab assignment for coefficient `j`.
    pub fn slab_count(&self, j: usize) -> usize {
        self.gamma.iter().filter(|slice| slice[j] == 1).count()
    }

    /// Same, ignoring slice `skip` — the boundary test in the allocation
    /// update.
    pub fn slab_count_excluding(&self, j: usize, skip: usize) -> usize {
        self.gamma
            .iter()
            .enumerate()
            .filter(|(s, slice)| *s != skip && slice[j] == 1)
            .count()
    }

    /// Largest referenced component label (0 when everything is spiked).
    pub fn max_referenced_label(&self) -> u32 {
        self.d_alloc
            .iter()
            .flat_map(|slice| slice.iter())
            .cloned()
            .max()
            .unwrap_or(0)
    }

    pub fn atom(&self, label: u32) -> &crate::tsddp::Atom {
        &self.chain.components[(label - 1) as usize].atom
    }
}
