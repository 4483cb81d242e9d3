//! Bayesian quadrature with Gaussian-process priors that are invariant
//! under axis flips and point reflections.
//!
//! The pieces, bottom up:
//!
//! - [`group`]: sign-flip groups and orbits.
//! - [`kernel`]: RBF kernel and its invariant lift `Σ_g Σ_h k(g x, h y)`.
//! - [`gp`]: conditioning, prediction, marginal likelihood, hyperparameter search.
//! - [`embedding`]: closed-form kernel means and prior variances under
//!   box-Lebesgue and isotropic Gaussian measures.
//! - [`bq`]: integral posterior, IVR acquisition, active loop, Monte Carlo.
//! - [`testbed`]: symmetric test integrands and reference integrals.
//! - [`experiment`]: method grid used by the benchmark runner.
//! - [`quadrature`]: adaptive Gauss–Kronrod oracle.

pub mod bq;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod gp;
pub mod group;
pub mod kernel;
pub mod par;
pub mod quadrature;
pub mod testbed;

pub use bq::{
    acquisition_ivr, bq_posterior, initial_design, mc_estimate, mc_path, run_active_bq,
    run_active_bq_from, select_next, ActiveConfig, BqState, HistoryEntry, HyperMode,
    IntegralPosterior, Integrand, SelectConfig,
};
pub use embedding::{
    build_embedding_table, kernel_mean_base, kernel_mean_transformed, prior_variance_base,
    prior_variance_transformed, EmbeddingTable, Measure,
};
pub use error::{Error, Result};
pub use gp::{
    fit, log_marginal_likelihood, optimize_hyperparameters, Dataset, GpPosterior, SearchConfig,
};
pub use group::{SignFlipGroup, SignVector};
pub use kernel::{gram, invariant_kernel, rbf, KernelSpec, RbfParams};
pub use testbed::{reference_integral, TestFunctionDescriptor};
