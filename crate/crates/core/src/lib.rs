//! Isotonic distributional regression (EasyUQ) and its kernel-smoothed
//! variant: fitting, prediction, scoring, bandwidth tuning, baselines,
//! simulation and an end-to-end evaluation workflow.

pub mod baselines;
pub mod error;
pub mod idr;
pub mod io;
pub mod json;
pub mod kernel;
pub mod pav;
mod quadrature;
pub mod scoring;
pub mod simulation;
pub mod smoothing;
pub mod tuning;
pub mod types;
pub mod workflow;

pub use error::{Error, Result};
pub use scoring::ScoreKind;
pub use types::{
    unique_thresholds, DegreesOfFreedom, IdrModel, KernelSpec, MixtureDistribution, StepCdf, ThresholdSet,
    TrainingData, NU_GRID,
};
