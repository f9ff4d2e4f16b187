//! Joint missing-view imputation and unsupervised feature selection for
//! incomplete multi-view data.
//!
//! Given row-aligned feature matrices (views) in which some samples are
//! unobserved in some views, the solver alternates five closed-form or
//! CG-backed updates per view — feature self-representation `W`, an IRLS
//! diagonal for the row-sparsity penalty, the missing block via a
//! generalized Sylvester equation, an adaptive k-sparse similarity graph,
//! and robust per-sample quality weights — so that imputation and feature
//! selection inform each other instead of running as two separate stages.
//! Features are ranked by the row norms of `W`.
//!
//! Modules:
//! - [`data`]: dataset loading, masking protocol, indicator matrices;
//! - [`graph`]: adaptive k-NN similarity rows and Laplacians;
//! - [`sylvester`]: the matrix-equation solver for the missing block;
//! - [`solver`]: the alternating optimization and feature ranking;
//! - [`eval`]: k-means, matched accuracy, and NMI on selected features;
//! - [`synth`]: planted-cluster fixture generator.

pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
mod linalg;
pub mod seeding;
pub mod solver;
pub mod sylvester;
pub mod synth;

pub use error::{Error, Result};
