//! Bayesian nonparametric time-varying-parameter VAR.
//!
//! A TVP-VAR(1) whose coefficients carry a spike-and-slab prior: the spike is
//! either a point mass at zero or a diffuse distribution centred at zero, and
//! the slab is a nonparametric mixture whose mixing measures evolve over time
//! through a dependent Dirichlet process with binomial auxiliary-variable
//! dynamics. Posterior inference runs a slice-sampled Gibbs sweep; the
//! posterior allocations induce time-varying, cluster-coloured
//! Granger-causality graphs.
//!
//! Crate layout:
//! * [`distributions`] — samplers and densities for the full-conditional
//!   families (generalized inverse Gaussian, inverse Wishart, Gaussians from
//!   precision form, the usual scalar families).
//! * [`tsddp`] — the dependent Dirichlet process: stick-breaking chains,
//!   atom management, and the measure-correlation series.
//! * [`var_core`] — VAR(1) design matrices, forward simulation, the Lyapunov
//!   stationarity diagnostic, and synthetic-data generation.
//! * [`gibbs`] — the seven-step sweep over the joint posterior with three
//!   spike variants.
//! * [`graphs`] — Granger-graph extraction and export.
//! * [`io`] — panel ingestion, run configuration, and draw persistence.
//! * [`diagnostics`] — posterior summaries, ESS / split R-hat, and the
//!   joint-distribution sampler validation harness.

pub mod diagnostics;
pub mod distributions;
pub mod gibbs;
pub mod graphs;
pub mod io;
pub mod tsddp;
pub mod var_core;

pub use gibbs::{ModelSpec, SpikeVariant};
pub use io::PosteriorDraws;
pub use var_core::Panel;
