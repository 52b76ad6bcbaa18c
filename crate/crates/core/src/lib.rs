//! Empirical estimators of convex density level sets and the machinery for
//! studying their cube-root fluctuations.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cylinder;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod limit;
pub mod models;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod selftest;
pub mod stats;

pub use cylinder::{CylinderSet, DriftSpec};
pub use error::{Error, Result};
pub use estimators::{EstimateResult, EstimatorKind, SetClass};
pub use experiments::{ExperimentConfig, RateRecord};
pub use geometry::{BoundaryProjection, ConvexBody, Ellipse, SteinerData};
pub use limit::{LimitDraw, WienerGrid};
pub use models::{builtin_model, DensityModel, LevelSetOracle, ModelKind, Sample};
