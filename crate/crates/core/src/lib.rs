//! Symptom index learned from negative-unlabeled data.
//!
//! Infection status stands in for an unobservable post-infection condition:
//! uninfected people are known negatives, infected people are an unlabeled
//! mix. The crate covers
//!
//! - [`theory`]: closed-form odds ratios relating observable infection/feature
//!   associations to the latent risk ratios;
//! - [`datagen`]: simulated cohorts with copula-correlated binary features;
//! - [`glm`]: weighted lasso logistic regression with cross-validation;
//! - [`index`]: the integer index and the symptom-count comparator;
//! - [`metrics`]: selection and discrimination metrics, threshold curves;
//! - [`harness`]: replicated studies and the end-to-end pipeline.

pub mod cohort;
pub mod datagen;
pub mod error;
pub mod glm;
pub mod harness;
pub mod index;
pub mod matrix;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod theory;

pub use cohort::Cohort;
pub use error::{Error, Result};
pub use glm::{cv_fit, CvOptions, LassoFit, SelectionRule};
pub use index::IndexModel;
pub use matrix::BinaryMatrix;
pub use pipeline::{PipelineConfig, Weighting};
