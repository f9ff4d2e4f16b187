//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, row {row}: {message}")]
    MalformedFile {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("view {view} has {got} rows, expected {expected}")]
    RowCountMismatch {
        view: String,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mask ratio {ratio} cannot be applied to view {view} without leaving a sample unobserved in every view")]
    InfeasibleMask { ratio: f64, view: usize },

    #[error("view {view}: mask leaves no observed sample")]
    EmptyView { view: usize },

    #[error("sample {sample} is observed in no view")]
    UnobservedSample { sample: usize },

    #[error("linear system is singular or indefinite: {context}")]
    Singular { context: String },

    #[error("dense solve of size {size} exceeds cap {cap}")]
    SystemTooLarge { size: usize, cap: usize },

    #[error("non-finite {term} term in view {view}")]
    NonFinite { view: usize, term: String },

    #[error(
        "objective increased at iteration {iteration}, step {step}, view {view}: {before} -> {after}"
    )]
    ObjectiveIncrease {
        iteration: usize,
        step: &'static str,
        view: usize,
        before: f64,
        after: f64,
    },

    #[error("view {view}: {source}")]
    ViewSolve {
        view: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset has no labels; supply a labels file to evaluate")]
    MissingLabels,

    #[error("label vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

impl Error {
    /// True for errors caused by bad inputs (files, shapes, parameters)
    /// rather than by numerical failure inside a solve.
    pub fn is_input(&self) -> bool {
        !matches!(
            self,
            Error::Singular { .. }
                | Error::NonFinite { .. }
                | Error::ObjectiveIncrease { .. }
                | Error::ViewSolve { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
