//! Neuron-level analysis of cortical laminar structure.
//!
//! The crate takes detected neurons (position + soma shape descriptors),
//! derives neighborhood features from exact k-NN queries over a spatial
//! index, tags sparse/average/dense populations and cortical depth, trains
//! per-rater multiclass boosted trees fused by probability summation, and
//! explains predictions with TreeSHAP attributions. A seeded synthetic
//! cortex generator provides ground truth for end-to-end validation.
//!
//! The crate is `no_std`-compatible (with `alloc`); file formats, CSV/JSON
//! handling, and the CLI live in the companion `cortolam` crate. The
//! `parallel` feature (on by default) uses rayon for per-neuron feature
//! extraction and per-feature split search; results are identical to the
//! sequential build.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod attribution;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod regions;
pub mod spatial;
pub mod synth;
pub mod types;

pub use error::{CoreError, Result};
pub use types::{FeatureTable, LabelSet, LayerClass, NeuronRecord};

/// Map `f` over `0..n`, preserving index order in the output.
///
/// Runs on the rayon pool when the `parallel` feature is enabled; the
/// collected result is identical either way.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> alloc::vec::Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> alloc::vec::Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
