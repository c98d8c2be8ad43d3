//! Cartesian and recurrent Cartesian genetic programming classifiers for
//! small, imbalanced tabular and sequential datasets.
//!
//! The pipeline: load labelled CSV data ([`dataset`]), split it or fold it
//! ([`dataset::stratified_split`], [`crossval`]), oversample the minority
//! class of the training part ([`imbalance`]), evolve a classifier
//! ([`cgp::evolve`]) and export what was learned ([`report`]). The
//! [`experiment`] module drives whole runs from a JSON manifest and backs the
//! `rcgp` binary.

pub mod cgp;
pub mod crossval;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod imbalance;
pub mod report;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
