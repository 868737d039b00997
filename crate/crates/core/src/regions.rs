//! Population tagging and cortical depth features.
//!
//! Local density separates neurons into sparse / average / dense
//! populations via 3-class Otsu thresholding; the sparse class splits into
//! layer I vs white matter on the hull-area feature; distances to the
//! tagged sets yield per-neuron cortical depth and thickness.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::features::REGION_COLUMNS;
use crate::map_indexed;
use crate::spatial::{PointUm, SpatialIndex};
use crate::types::{flags, FeatureTable, NeuronRecord};

/// Histogram resolution for threshold search.
pub const OTSU_BINS: usize = 256;

/// Ascending thresholds minimizing total within-class variance on a
/// fixed-width histogram of the input values.
#[derive(Clone, Debug, PartialEq)]
pub struct OtsuSplit {
    pub thresholds: Vec<f64>,
}

impl OtsuSplit {
    /// Class of a value: the number of thresholds at or below it.
    pub fn assign(&self, v: f64) -> usize {
        self.thresholds.iter().filter(|&&t| v >= t).count()
    }
}

/// Exhaustive Otsu threshold search over `n_bins` histogram bins.
///
/// Minimizes the summed within-class variance over every threshold tuple;
/// ties resolve to the lexicographically lowest tuple. Requires at least
/// `n_classes` distinct values.
pub fn otsu_thresholds(values: &[f64], n_classes: usize, n_bins: usize) -> Result<OtsuSplit> {
    if !(2..=3).contains(&n_classes) {
        return Err(CoreError::InvalidConfig(format!(
            "otsu supports 2 or 3 classes, got {n_classes}"
        )));
    }
    if n_bins < n_classes {
        return Err(CoreError::InvalidConfig("n_bins < n_classes".into()));
    }
    if values.is_empty() {
        return Err(CoreError::EmptyInput("otsu values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidConfig("otsu values must be finite".into()));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    if sorted.len() < n_classes {
        return Err(CoreError::DegenerateSplit(format!(
            "need at least {n_classes} distinct values, found {}",
            sorted.len()
        )));
    }

    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let width = (max - min) / n_bins as f64;

    let mut counts = alloc::vec![0u64; n_bins];
    for &v in values {
        let bin = (((v - min) / (max - min) * n_bins as f64) as usize).min(n_bins - 1);
        counts[bin] += 1;
    }

    // Prefix sums over bin centers for O(1) within-class variance.
    let mut c0 = alloc::vec![0.0f64; n_bins + 1];
    let mut c1 = alloc::vec![0.0f64; n_bins + 1];
    let mut c2 = alloc::vec![0.0f64; n_bins + 1];
    for (i, &cnt) in counts.iter().enumerate() {
        let center = min + (i as f64 + 0.5) * width;
        let w = cnt as f64;
        c0[i + 1] = c0[i] + w;
        c1[i + 1] = c1[i] + w * center;
        c2[i + 1] = c2[i] + w * center * center;
    }
    // Weighted within-class variance of bins [a, b].
    let within = |a: usize, b: usize| -> f64 {
        let w = c0[b + 1] - c0[a];
        if w == 0.0 {
            return 0.0;
        }
        let s1 = c1[b + 1] - c1[a];
        let s2 = c2[b + 1] - c2[a];
        let v = s2 - s1 * s1 / w;
        v.max(0.0)
    };

    let mut best_cost = f64::INFINITY;
    let mut best: Vec<usize> = Vec::new();
    if n_classes == 2 {
        for t in 0..n_bins - 1 {
            let cost = within(0, t) + within(t + 1, n_bins - 1);
            if cost < best_cost {
                best_cost = cost;
                best = alloc::vec![t];
            }
        }
    } else {
        for t1 in 0..n_bins - 2 {
            let head = within(0, t1);
            if head >= best_cost {
                continue;
            }
            for t2 in t1 + 1..n_bins - 1 {
                let cost = head + within(t1 + 1, t2) + within(t2 + 1, n_bins - 1);
                if cost < best_cost {
                    best_cost = cost;
                    best = alloc::vec![t1, t2];
                }
            }
        }
    }

    Ok(OtsuSplit {
        thresholds: best.iter().map(|&t| min + (t + 1) as f64 * width).collect(),
    })
}

/// Density population of a neuron's surroundings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Population {
    Sparse,
    Average,
    Dense,
}

impl Population {
    pub fn token(self) -> &'static str {
        match self {
            Population::Sparse => "sparse",
            Population::Average => "average",
            Population::Dense => "dense",
        }
    }

    pub fn parse_token(s: &str) -> Option<Population> {
        match s {
            "sparse" => Some(Population::Sparse),
            "average" => Some(Population::Average),
            "dense" => Some(Population::Dense),
            _ => None,
        }
    }
}

/// Refinement of the sparse population.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SparseKind {
    LayerI,
    WhiteMatter,
    None,
}

impl SparseKind {
    pub fn token(self) -> &'static str {
        match self {
            SparseKind::LayerI => "layer_I",
            SparseKind::WhiteMatter => "white_matter",
            SparseKind::None => "none",
        }
    }

    pub fn parse_token(s: &str) -> Option<SparseKind> {
        match s {
            "layer_I" => Some(SparseKind::LayerI),
            "white_matter" => Some(SparseKind::WhiteMatter),
            "none" => Some(SparseKind::None),
            _ => None,
        }
    }
}

/// Assign sparse / average / dense by 3-class Otsu on local density.
pub fn classify_population(densities: &[f64]) -> Result<Vec<Population>> {
    let split = otsu_thresholds(densities, 3, OTSU_BINS)?;
    Ok(densities
        .iter()
        .map(|&d| match split.assign(d) {
            0 => Population::Sparse,
            1 => Population::Average,
            _ => Population::Dense,
        })
        .collect())
}

/// Split sparse neurons into layer I vs white matter on hull area.
///
/// White matter neurons see large neighbor hulls; layer I hulls are bound
/// between the tissue border and dense layer II. A degenerate split tags
/// everything white matter and reports it, which avoids fabricating a
/// layer I out of noise.
pub fn split_sparse(sparse_hull_areas: &[f64]) -> (Vec<SparseKind>, bool) {
    match otsu_thresholds(sparse_hull_areas, 2, OTSU_BINS) {
        Ok(split) => (
            sparse_hull_areas
                .iter()
                .map(|&a| {
                    if split.assign(a) == 0 {
                        SparseKind::LayerI
                    } else {
                        SparseKind::WhiteMatter
                    }
                })
                .collect(),
            false,
        ),
        Err(_) => (
            alloc::vec![SparseKind::WhiteMatter; sparse_hull_areas.len()],
            true,
        ),
    }
}

/// Per-neuron region tags and location features.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionTag {
    pub population: Population,
    pub sparse_kind: SparseKind,
    pub depth_um: f64,
    pub thickness_um: f64,
    pub depth_norm: f64,
    pub dist_to_dense_um: f64,
}

/// Region tags for a whole section, aligned with the input neuron order.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionTags {
    pub tags: Vec<RegionTag>,
    /// Set when the sparse split was degenerate.
    pub sparse_split_degenerate: bool,
}

/// Configuration for the region derivation.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionConfig {
    /// k whose density column drives the population split.
    pub density_k: usize,
    /// k whose hull-area column drives the sparse split.
    pub hull_k: usize,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig {
            density_k: 500,
            hull_k: 500,
        }
    }
}

/// Distance features of one point against tagged sets.
///
/// Depth is the distance to the nearest layer-I neuron, thickness adds the
/// distance to the nearest white-matter neuron along the same reading, and
/// depth_norm locates the neuron between the two (0 at layer I).
pub fn depth_thickness(
    point: PointUm,
    layer_i: &SpatialIndex,
    white_matter: &SpatialIndex,
    dense: &SpatialIndex,
) -> (f64, f64, f64, f64) {
    let depth = layer_i.nearest(point).dist_um;
    let to_wm = white_matter.nearest(point).dist_um;
    let thickness = depth + to_wm;
    let depth_norm = if thickness > 0.0 { depth / thickness } else { 0.0 };
    let dist_to_dense = dense.nearest(point).dist_um;
    (depth, thickness, depth_norm, dist_to_dense)
}

/// Derive the full region block from an assembled feature table.
///
/// Reads the density and hull-area columns named by `cfg`, tags
/// populations, splits the sparse class, and computes distance features
/// against the tagged sets. Errors when any required tag set ends up
/// empty; the caller reports and skips the region block.
pub fn derive_regions(
    neurons: &[NeuronRecord],
    table: &FeatureTable,
    cfg: &RegionConfig,
) -> Result<RegionTags> {
    let density_col = format!("density_{}", cfg.density_k);
    let hull_col = format!("hull_area_{}", cfg.hull_k);
    let density_idx = table
        .column_index(&density_col)
        .ok_or_else(|| CoreError::SchemaMismatch(format!("missing column {density_col}")))?;
    let hull_idx = table
        .column_index(&hull_col)
        .ok_or_else(|| CoreError::SchemaMismatch(format!("missing column {hull_col}")))?;
    if neurons.len() != table.n_rows() {
        return Err(CoreError::SchemaMismatch(
            "neuron collection and feature table differ in length".into(),
        ));
    }

    let densities: Vec<f64> = (0..table.n_rows()).map(|i| table.get(i, density_idx)).collect();
    let populations = classify_population(&densities)?;

    let sparse_rows: Vec<usize> = (0..neurons.len())
        .filter(|&i| populations[i] == Population::Sparse)
        .collect();
    let sparse_areas: Vec<f64> = sparse_rows.iter().map(|&i| table.get(i, hull_idx)).collect();
    let (kinds, degenerate) = split_sparse(&sparse_areas);
    let mut sparse_kind = alloc::vec![SparseKind::None; neurons.len()];
    for (&row, &kind) in sparse_rows.iter().zip(kinds.iter()) {
        sparse_kind[row] = kind;
    }

    let set_index = |pred: &dyn Fn(usize) -> bool, name: &'static str| -> Result<SpatialIndex> {
        let mut pts = Vec::new();
        let mut ids = Vec::new();
        for (i, n) in neurons.iter().enumerate() {
            if pred(i) {
                pts.push(PointUm::new(n.x_um, n.y_um));
                ids.push(n.id);
            }
        }
        SpatialIndex::from_points(pts, ids).map_err(|_| CoreError::RegionFeaturesUnavailable(name))
    };
    let layer_i = set_index(&|i| sparse_kind[i] == SparseKind::LayerI, "layer_I")?;
    let wm = set_index(&|i| sparse_kind[i] == SparseKind::WhiteMatter, "white_matter")?;
    let dense = set_index(&|i| populations[i] == Population::Dense, "dense")?;

    let dists = map_indexed(neurons.len(), |i| {
        depth_thickness(
            PointUm::new(neurons[i].x_um, neurons[i].y_um),
            &layer_i,
            &wm,
            &dense,
        )
    });

    let tags = (0..neurons.len())
        .map(|i| {
            let (depth_um, thickness_um, depth_norm, dist_to_dense_um) = dists[i];
            RegionTag {
                population: populations[i],
                sparse_kind: sparse_kind[i],
                depth_um,
                thickness_um,
                depth_norm,
                dist_to_dense_um,
            }
        })
        .collect();
    Ok(RegionTags {
        tags,
        sparse_split_degenerate: degenerate,
    })
}

/// Write the region block columns into an assembled feature table.
pub fn apply_to_table(tags: &RegionTags, table: &mut FeatureTable) -> Result<()> {
    if tags.tags.len() != table.n_rows() {
        return Err(CoreError::SchemaMismatch(
            "region tags and feature table differ in length".into(),
        ));
    }
    let cols: Vec<usize> = REGION_COLUMNS
        .iter()
        .map(|name| {
            table
                .column_index(name)
                .ok_or_else(|| CoreError::SchemaMismatch(format!("missing column {name}")))
        })
        .collect::<Result<_>>()?;
    for (i, tag) in tags.tags.iter().enumerate() {
        table.set(i, cols[0], (tag.population == Population::Sparse) as u8 as f64);
        table.set(i, cols[1], (tag.population == Population::Dense) as u8 as f64);
        table.set(i, cols[2], tag.depth_um);
        table.set(i, cols[3], tag.thickness_um);
        table.set(i, cols[4], tag.depth_norm);
        table.set(i, cols[5], tag.dist_to_dense_um);
        if tags.sparse_split_degenerate && tag.population == Population::Sparse {
            table.flags[i] |= flags::SPARSE_SPLIT_DEGENERATE;
        }
    }
    Ok(())
}
