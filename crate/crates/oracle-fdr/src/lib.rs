//! Posterior-based oracle multiple testing under multivariate normal
//! dependence.
//!
//! The model: latent states θ_i iid Bernoulli(p) and observations
//! X | θ ~ N(kθ, Σ) with a correlation matrix Σ. The crate provides
//!
//! * [`covariance`] — identity / equicorrelated / block-diagonal / dense
//!   covariance structures, their sampling factors, and closed-form precision
//!   matrices;
//! * [`model`] — seeded replicate generation with per-replicate random
//!   streams;
//! * [`oracle`] — the closed-form posterior-null statistic driven by the
//!   precision columns, the marginal lfdr, and an exact enumeration posterior
//!   for verification at small n;
//! * [`procedures`] — the running-average step-up rule, Benjamini–Hochberg on
//!   one-sided p-values, and the marginal-lfdr procedure;
//! * [`metrics`] — confusion counts and FDR/FNR/mFDR/mFNR aggregation;
//! * [`harness`] — the config-driven simulation driver and CSV reporting
//!   behind the `oracle-fdr` CLI.
//!
//! Numeric kernels are generic over the scalar type (see [`scalar::Real`]);
//! the aliases below fix the `f64` instantiations the harness uses.

pub mod covariance;
pub mod harness;
pub mod linalg;
pub mod math;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod procedures;
pub mod scalar;

pub use covariance::{CholeskyFactor, CovarianceSpec, PrecisionMatrix};
pub use metrics::{ConfusionCounts, ErrorRates};
pub use model::{ModelParams, SampleDraw, SeedSpec};
pub use oracle::{OracleContext, Scale, StatisticVector};
pub use procedures::{DecisionResult, Method};
pub use scalar::Real;

/// f64 instantiations used by the harness and CLI.
pub type CovarianceSpec64 = CovarianceSpec<f64>;
pub type CholeskyFactor64 = CholeskyFactor<f64>;
pub type PrecisionMatrix64 = PrecisionMatrix<f64>;
pub type OracleContext64 = OracleContext<f64>;
pub type StatisticVector64 = StatisticVector<f64>;
pub type ModelParams64 = ModelParams<f64>;
