//! Ensemble information dynamics.

// Negated comparisons such as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod grid;
pub mod harness;
pub mod infoflow;
pub mod models;
pub mod rng;

pub use error::{Error, Result};
pub use estimators::{BandwidthPolicy, GaussianRef, SampleSet};
pub use grid::{Axis, Grid, Grid1D, Grid2D, Order};
pub use harness::{run_experiment, ExperimentConfig};
pub use infoflow::{
    EnsembleField, FlowField, InformationField, ReferenceDensity, ReferenceMode, TermBudget,
};
