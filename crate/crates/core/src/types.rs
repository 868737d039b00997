//! Domain types shared across the pipeline.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Cortical layer classes with fixed ordinal encoding 0..6.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayerClass {
    I = 0,
    II = 1,
    III = 2,
    IV = 3,
    V = 4,
    VI = 5,
    WM = 6,
}

impl LayerClass {
    pub const COUNT: usize = 7;

    pub const ALL: [LayerClass; 7] = [
        LayerClass::I,
        LayerClass::II,
        LayerClass::III,
        LayerClass::IV,
        LayerClass::V,
        LayerClass::VI,
        LayerClass::WM,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(ord: usize) -> Option<LayerClass> {
        LayerClass::ALL.get(ord).copied()
    }

    /// Parse a layer token, case-insensitively, from {I..VI, WM}.
    pub fn parse_token(token: &str) -> Option<LayerClass> {
        let t = token.trim();
        LayerClass::ALL
            .iter()
            .copied()
            .find(|c| c.token().eq_ignore_ascii_case(t))
    }

    pub fn token(self) -> &'static str {
        match self {
            LayerClass::I => "I",
            LayerClass::II => "II",
            LayerClass::III => "III",
            LayerClass::IV => "IV",
            LayerClass::V => "V",
            LayerClass::VI => "VI",
            LayerClass::WM => "WM",
        }
    }
}

impl fmt::Display for LayerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// One detected neuron: position in micrometers plus soma shape descriptors.
#[derive(Clone, Debug, PartialEq)]
pub struct NeuronRecord {
    pub id: u64,
    pub x_um: f64,
    pub y_um: f64,
    pub area_um2: f64,
    pub perimeter_um: f64,
    /// Dimensionless, in [0, 1].
    pub circularity: f64,
    /// Dimensionless, in [0, 1].
    pub roundness: f64,
    /// Mean gray level in [0, 255], when measured.
    pub gray_mean: Option<f64>,
    /// Median gray level in [0, 255], when measured.
    pub gray_median: Option<f64>,
}

impl NeuronRecord {
    /// Check the per-record invariants; `Err` names the violated field.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(CoreError::InvalidRecord {
                id: self.id,
                reason,
            })
        };
        if !self.x_um.is_finite() || !self.y_um.is_finite() {
            return fail("non-finite position".into());
        }
        if !(self.area_um2 > 0.0) {
            return fail("area_um2 must be > 0".into());
        }
        if !(self.perimeter_um > 0.0) {
            return fail("perimeter_um must be > 0".into());
        }
        if !(0.0..=1.0).contains(&self.circularity) {
            return fail("circularity must be in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.roundness) {
            return fail("roundness must be in [0, 1]".into());
        }
        for (name, v) in [("gray_mean", self.gray_mean), ("gray_median", self.gray_median)] {
            if let Some(v) = v {
                if !(0.0..=255.0).contains(&v) {
                    return fail(alloc::format!("{name} must be in [0, 255]"));
                }
            }
        }
        Ok(())
    }
}

/// Per-rater mapping of neuron id to layer class.
///
/// Iteration is in ascending id order, which keeps every downstream
/// computation independent of insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelSet {
    pub rater_id: String,
    labels: BTreeMap<u64, LayerClass>,
}

impl LabelSet {
    pub fn new(rater_id: impl Into<String>) -> Self {
        LabelSet {
            rater_id: rater_id.into(),
            labels: BTreeMap::new(),
        }
    }

    pub fn from_pairs(
        rater_id: impl Into<String>,
        pairs: impl IntoIterator<Item = (u64, LayerClass)>,
    ) -> Self {
        LabelSet {
            rater_id: rater_id.into(),
            labels: pairs.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, id: u64, class: LayerClass) {
        self.labels.insert(id, class);
    }

    pub fn get(&self, id: u64) -> Option<LayerClass> {
        self.labels.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, LayerClass)> + '_ {
        self.labels.iter().map(|(&id, &c)| (id, c))
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.labels.keys().copied()
    }
}

/// Per-neuron status flags carried alongside feature values.
///
/// Flags mark substituted degenerate values; they are diagnostics, not
/// model inputs, and are never serialized into the feature CSV.
pub mod flags {
    /// k exceeded n-1 and was clamped.
    pub const CLAMPED_K: u32 = 1 << 0;
    /// Fewer than 3 effective neighbors; higher-order stats zeroed.
    pub const FEW_NEIGHBORS: u32 = 1 << 1;
    /// Neighbor hull was degenerate; hull block and density zeroed.
    pub const DEGENERATE_HULL: u32 = 1 << 2;
    /// gray_mean was absent and imputed with the column median.
    pub const IMPUTED_GRAY_MEAN: u32 = 1 << 3;
    /// gray_median was absent and imputed with the column median.
    pub const IMPUTED_GRAY_MEDIAN: u32 = 1 << 4;
    /// Sparse split was degenerate; neuron conservatively tagged white matter.
    pub const SPARSE_SPLIT_DEGENERATE: u32 = 1 << 5;
}

/// A fixed-schema table of per-neuron feature vectors (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    /// Ordered column names, identical for training and inference.
    pub schema: Vec<String>,
    /// Neuron id per row.
    pub ids: Vec<u64>,
    /// Row-major values, `ids.len() * schema.len()` entries.
    pub values: Vec<f64>,
    /// Status flags per row (see [`flags`]).
    pub flags: Vec<u32>,
}

impl FeatureTable {
    pub fn new(schema: Vec<String>) -> Self {
        FeatureTable {
            schema,
            ids: Vec::new(),
            values: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn push_row(&mut self, id: u64, row: Vec<f64>, row_flags: u32) {
        debug_assert_eq!(row.len(), self.schema.len());
        self.ids.push(id);
        self.values.extend(row);
        self.flags.push(row_flags);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.schema.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c == name)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.schema.len() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        let w = self.schema.len();
        self.values[row * w + col] = v;
    }

    /// Row index of a neuron id, or an `UnknownId` error.
    pub fn row_of(&self, id: u64) -> Result<usize> {
        self.ids
            .iter()
            .position(|&x| x == id)
            .ok_or(CoreError::UnknownId(id))
    }
}
