//! Batch gradient descent with implicit regularization for linear models.
//!
//! This crate makes the generalization theory of constant-step batch
//! gradient descent executable: alongside the optimizer itself it ships
//! the quantities that theory reasons about — population risks and their
//! gradients, the bias/variance decomposition of the excess risk,
//! per-step inexact-descent inequalities, Rademacher-complexity estimates
//! with their closed-form bounds, the uniform gradient-concentration
//! bound, and the γT schedule balancing the two — so that every claim can
//! be checked numerically on seeded synthetic runs.
//!
//! Modules:
//!
//! * [`losses`] — convex, Lipschitz, smooth losses with interval-local
//!   constants (L, M) and strict label validation.
//! * [`data`] — datasets with a norm bound κ and the Gaussian synthetic
//!   generator (Σ_jj = j⁻², w*_j = j⁻², unit noise).
//! * [`engine`] — the descent loop with full path recording or an O(d)
//!   streaming summary; no projections, no clipping.
//! * [`oracle`] — analytic population risk for the squared loss,
//!   Monte-Carlo estimation with standard errors otherwise.
//! * [`analysis`] — excess-risk decomposition, per-step inequality
//!   residuals, path radius and containment, sample-size condition,
//!   γT schedule and the excess-risk bounds.
//! * [`concentration`] — Rademacher complexities of the scalar and
//!   gradient-composite classes, concentration bounds, and probe-based
//!   suprema of the gradient noise.

pub mod analysis;
pub mod concentration;
pub mod data;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod losses;
pub mod oracle;

#[doc(hidden)]
pub mod testutil;

pub use analysis::{
    check_bounded_path, decompose, excess_risk_bounds, last_iterate_identity, path_radius,
    sample_size_condition, schedule_gamma_t, BoundReport, DecompositionReport, ExcessRiskBounds,
    MeasuredQuantities, PathContainment,
};
pub use concentration::{
    complexity_bounds, concentration_bound, empirical_sup_noise, rademacher_gradient,
    rademacher_scalar, ConcentrationBound, FunctionClass, NoiseProbeConfig, ProbeConfig,
    RademacherEstimate, SignMethod,
};
pub use data::{make_paper_model, Dataset, DatasetSidecar, LabelRule, SyntheticModel};
pub use engine::{
    empirical_gradient, empirical_risk, run, run_streaming, DescentConfig, DescentPath,
    StreamOptions, StreamSummary,
};
pub use error::{Error, Result};
pub use losses::{loss_constants, LossKind, LossModel};
pub use oracle::{ExcessRisk, OracleSummary, PopulationOracle, RiskEstimate};
