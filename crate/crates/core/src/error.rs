//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// An operation received an empty input that requires at least one element.
    EmptyInput(&'static str),
    /// A neuron id was not found in the collection it should refer to.
    UnknownId(u64),
    /// A record violates a domain invariant (message names the field).
    InvalidRecord { id: u64, reason: String },
    /// Fewer than three non-collinear points; no convex hull exists.
    DegenerateHull,
    /// Threshold search impossible (e.g. all values identical).
    DegenerateSplit(String),
    /// Region features cannot be derived (named tag set is empty).
    RegionFeaturesUnavailable(&'static str),
    /// Training input is unusable (single class, NaN feature, missing row).
    InvalidTrainingData(String),
    /// A feature row or model does not match the expected schema.
    SchemaMismatch(String),
    /// Attribution requires per-node coverage counts recorded at train time.
    MissingCoverage,
    /// Generator configuration is inconsistent.
    InvalidConfig(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::EmptyInput(what) => write!(f, "empty input: {what}"),
            CoreError::UnknownId(id) => write!(f, "unknown neuron id {id}"),
            CoreError::InvalidRecord { id, reason } => {
                write!(f, "invalid record (id {id}): {reason}")
            }
            CoreError::DegenerateHull => write!(f, "degenerate hull: fewer than 3 non-collinear points"),
            CoreError::DegenerateSplit(why) => write!(f, "degenerate threshold split: {why}"),
            CoreError::RegionFeaturesUnavailable(set) => {
                write!(f, "region features unavailable: no neurons tagged {set}")
            }
            CoreError::InvalidTrainingData(why) => write!(f, "invalid training data: {why}"),
            CoreError::SchemaMismatch(why) => write!(f, "schema mismatch: {why}"),
            CoreError::MissingCoverage => {
                write!(f, "model lacks per-node coverage counts required for attribution")
            }
            CoreError::InvalidConfig(why) => write!(f, "invalid configuration: {why}"),
        }
    }
}

impl core::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;
