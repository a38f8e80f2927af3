//! Weighted kNN classification under posterior drift.
//!
//! A target distribution `Q` shares its covariate law with one or more
//! source distributions but has a different regression function. The
//! crate provides exact neighbor search, fixed-parameter weighted kNN
//! classifiers, pointwise-adaptive neighbor selection whose cost is
//! `max_j n_j` attempts per query, closed-form minimax rates, the two
//! simulation designs and a seeded Monte Carlo harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod geometry;
pub mod io;
pub mod seed;
pub mod synth;
pub mod theory;

pub use adaptive::{
    adaptive_multi_source, adaptive_single_source, adaptive_two_source, attempt_count,
    signal_to_noise_r, stopping_threshold, AdaptiveSelection, StopReason,
};
pub use dataset::{Label, LabeledSample, SourceDataset};
pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{euclidean_distance, k_nearest, FeatureVector, NeighborList, PointSet};
