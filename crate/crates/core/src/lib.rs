//! Hermitian Lie algebras given by structure constants.
//!
//! The crate covers real Lie algebras with a complex structure and a compatible
//! metric: unitary frames and their structure tensors, invariant forms and the
//! Chevalley–Eilenberg differential, metric classes, the linear test for
//! Hermitian-symplectic metrics, and the analysis of algebras with a
//! codimension-2 abelian ideal.

pub mod codim2_models;
pub mod complex_frames;
pub mod error;
pub mod lie_core;
pub mod linalg;
pub mod metric_classifier;
pub mod serde_util;
pub mod st_pipeline;

pub use error::{Error, Result};
