//! Tabular classification toolkit: ANOVA F-test feature selection, gradient
//! boosted trees on a second-order objective, cross-validation and
//! classification metrics.

pub mod anova;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod gbt;
pub mod matrix;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod synthetic;

pub use dataset::{FeatureTable, LabelEncoding, SplitPlan};
pub use error::{Error, ErrorCategory, Result};
pub use eval::{ConfusionMatrix, MetricsReport};
pub use gbt::{GbtModel, Objective, TrainParams};
pub use matrix::Matrix;
pub use pipeline::{CvReport, RunConfig};
