//! Per-neuron feature extraction over k-neighborhoods.
//!
//! Every feature is a pure function of the neuron's k nearest neighbors
//! (plus its own soma descriptors), assembled into a fixed-schema table
//! whose column order is shared by training and inference. Degenerate
//! neighborhoods substitute zeros and set a flag; emitted vectors never
//! contain NaN or infinities.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::map_indexed;
use crate::spatial::{convex_hull, Neighbor, PointUm, SpatialIndex};
use crate::types::{flags, FeatureTable, NeuronRecord};

/// Angular sector configuration for direction-resolved measurements.
///
/// Sectors partition [0, 2π) evenly; sector 0 starts at angle 0 (east)
/// and indices advance counter-clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceConfig {
    /// Number of angular sectors R.
    pub sectors: usize,
    /// Neighborhood size used for slicing.
    pub k_slice: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig {
            sectors: 8,
            k_slice: 500,
        }
    }
}

/// Which numerator the nearest-neighbor-index ratio uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NniMode {
    /// Mean of each member's nearest-neighbor distance within the member
    /// set (Clark-Evans style). Default.
    MemberNearest,
    /// Mean distance from the central neuron to its k members.
    CentralMean,
}

/// Feature-extraction configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureConfig {
    /// Neighborhood sizes; one feature block per k.
    pub k_set: Vec<usize>,
    pub slice: SliceConfig,
    pub nni_mode: NniMode,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            k_set: vec![50, 100, 250, 500, 1000],
            slice: SliceConfig::default(),
            nni_mode: NniMode::MemberNearest,
        }
    }
}

/// Number of bins for the per-neuron distance-entropy histogram.
const ENTROPY_BINS: usize = 16;

/// Names of the region block appended by the regions module, in order.
pub const REGION_COLUMNS: [&str; 6] = [
    "sparse_flag",
    "dense_flag",
    "depth_um",
    "thickness_um",
    "depth_norm",
    "dist_to_dense_um",
];

/// The fixed, ordered column names of the feature table.
pub fn feature_schema(cfg: &FeatureConfig) -> Vec<String> {
    let mut cols: Vec<String> = vec![
        "area_um2".into(),
        "perimeter_um".into(),
        "circularity".into(),
        "roundness".into(),
        "gray_mean".into(),
        "gray_median".into(),
    ];
    for &k in &cfg.k_set {
        for stem in [
            "mean", "std", "skew", "kurt", "entropy", "hull_area", "hull_perimeter",
            "hull_mean_nnd", "hull_std_nnd", "density", "nni",
        ] {
            cols.push(format!("{stem}_{k}"));
        }
    }
    cols.push(format!("shannon_{}_{}", cfg.slice.k_slice, cfg.slice.sectors));
    cols.push(format!("simpson_{}_{}", cfg.slice.k_slice, cfg.slice.sectors));
    cols.push("slice_min_frac".into());
    cols.push("slice_max_frac".into());
    cols.extend(REGION_COLUMNS.iter().map(|&c| String::from(c)));
    cols
}

/// Descriptive statistics of the k nearest-neighbor distances.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DistanceStats {
    pub mean: f64,
    pub std: f64,
    pub skew: f64,
    pub kurt: f64,
    pub entropy: f64,
}

/// Statistics over the k-NN distances of one neuron.
///
/// `skew` is moment skewness g1, `kurt` excess kurtosis g2, and `entropy`
/// the natural-log Shannon entropy of a 16-bin histogram spanning
/// [0, max distance]. Zero-variance sets yield skew = kurt = 0; fewer than
/// 3 effective neighbors zero everything past the mean and set a flag.
pub fn distance_stats(
    index: &SpatialIndex,
    neuron_id: u64,
    k: usize,
) -> Result<(DistanceStats, u32)> {
    let res = index.knn(neuron_id, k)?;
    let dists: Vec<f64> = res.neighbors.iter().map(|n| n.dist_um).collect();
    let mut f = if res.clamped { flags::CLAMPED_K } else { 0 };
    let stats = stats_from_distances(&dists, &mut f);
    Ok((stats, f))
}

fn stats_from_distances(dists: &[f64], f: &mut u32) -> DistanceStats {
    let n = dists.len();
    if n == 0 {
        *f |= flags::FEW_NEIGHBORS;
        return DistanceStats::default();
    }
    let nf = n as f64;
    let mean = dists.iter().sum::<f64>() / nf;
    if n < 3 {
        *f |= flags::FEW_NEIGHBORS;
        return DistanceStats {
            mean,
            ..DistanceStats::default()
        };
    }
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &d in dists {
        let c = d - mean;
        let c2 = c * c;
        m2 += c2;
        m3 += c2 * c;
        m4 += c2 * c2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let std = m2.sqrt();
    // Spread at the level of representation noise counts as zero variance.
    let (skew, kurt) = if std > mean.abs() * 1e-12 {
        (m3 / (m2 * std), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    DistanceStats {
        mean,
        std,
        skew,
        kurt,
        entropy: distance_entropy(dists),
    }
}

/// Natural-log entropy of a fixed 16-bin histogram over [0, max distance].
fn distance_entropy(dists: &[f64]) -> f64 {
    let max = dists.iter().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 0.0;
    }
    let mut counts = [0usize; ENTROPY_BINS];
    for &d in dists {
        let bin = ((d / max * ENTROPY_BINS as f64) as usize).min(ENTROPY_BINS - 1);
        counts[bin] += 1;
    }
    let n = dists.len() as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Convex-hull descriptors of a neuron's k-neighbor set.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HullFeatures {
    pub hull_area_um2: f64,
    pub hull_perimeter_um: f64,
    /// Mean of each member's 1-NN distance within the member set.
    pub hull_mean_nnd_um: f64,
    pub hull_std_nnd_um: f64,
}

/// Hull of the k neighbors (query excluded) plus nearest-distance stats
/// over the enclosed members. Degenerate hulls zero all four values and
/// set a flag.
pub fn hull_features(
    index: &SpatialIndex,
    neuron_id: u64,
    k: usize,
) -> Result<(HullFeatures, u32)> {
    let res = index.knn(neuron_id, k)?;
    let pts = member_points(index, &res.neighbors)?;
    let mut f = if res.clamped { flags::CLAMPED_K } else { 0 };
    let feats = hull_block(&pts, &mut f);
    Ok((feats, f))
}

fn member_points(index: &SpatialIndex, members: &[Neighbor]) -> Result<Vec<PointUm>> {
    members.iter().map(|n| index.point_of(n.id)).collect()
}

fn hull_block(member_pts: &[PointUm], f: &mut u32) -> HullFeatures {
    match convex_hull(member_pts) {
        Ok(hull) => {
            let nnd = member_nnd(member_pts);
            let n = nnd.len() as f64;
            let mean = nnd.iter().sum::<f64>() / n;
            let var = nnd.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
            HullFeatures {
                hull_area_um2: hull.area_um2,
                hull_perimeter_um: hull.perimeter_um,
                hull_mean_nnd_um: mean,
                hull_std_nnd_um: var.sqrt(),
            }
        }
        Err(_) => {
            *f |= flags::DEGENERATE_HULL;
            HullFeatures::default()
        }
    }
}

/// Each member's nearest-neighbor distance within the member set.
fn member_nnd(member_pts: &[PointUm]) -> Vec<f64> {
    let ids: Vec<u64> = (0..member_pts.len() as u64).collect();
    let tree =
        SpatialIndex::from_points(member_pts.to_vec(), ids).expect("member set is non-empty");
    member_pts
        .iter()
        .enumerate()
        .map(|(i, p)| tree.knn_at(*p, 1, Some(i as u64))[0].dist_um)
        .collect()
}

/// Local neuron density: k divided by the k-neighbor hull area, in
/// neurons per mm². Degenerate hull yields 0 with a flag.
pub fn local_density(index: &SpatialIndex, neuron_id: u64, k: usize) -> Result<(f64, u32)> {
    let res = index.knn(neuron_id, k)?;
    let pts = member_points(index, &res.neighbors)?;
    let mut f = if res.clamped { flags::CLAMPED_K } else { 0 };
    let hull = hull_block(&pts, &mut f);
    Ok((density_from_hull(pts.len(), hull.hull_area_um2), f))
}

fn density_from_hull(k: usize, hull_area_um2: f64) -> f64 {
    if hull_area_um2 > 0.0 {
        k as f64 / (hull_area_um2 * 1e-6)
    } else {
        0.0
    }
}

/// Nearest-neighbor index of the k-member neighborhood.
///
/// Ratio of the mean observed nearest-neighbor distance to the distance
/// expected under a random distribution of the same number of points over
/// the member hull area: `mean_nnd / (0.5 * sqrt(hull_area / k))`.
/// Values below 1 indicate clustering, near 1 randomness, above 1 regular
/// dispersion. `mode` selects the numerator reading.
pub fn nni(index: &SpatialIndex, neuron_id: u64, k: usize, mode: NniMode) -> Result<(f64, u32)> {
    let res = index.knn(neuron_id, k)?;
    let pts = member_points(index, &res.neighbors)?;
    let mut f = if res.clamped { flags::CLAMPED_K } else { 0 };
    let value = match convex_hull(&pts) {
        Ok(hull) => {
            let numerator = match mode {
                NniMode::MemberNearest => {
                    let nnd = member_nnd(&pts);
                    nnd.iter().sum::<f64>() / nnd.len() as f64
                }
                NniMode::CentralMean => {
                    res.neighbors.iter().map(|n| n.dist_um).sum::<f64>()
                        / res.neighbors.len() as f64
                }
            };
            numerator / (0.5 * (hull.area_um2 / pts.len() as f64).sqrt())
        }
        Err(_) => {
            f |= flags::DEGENERATE_HULL;
            0.0
        }
    };
    Ok((value, f))
}

/// Proportion of the k_slice nearest neighbors falling in each of the R
/// angular sectors anchored at the neuron. Proportions sum to 1.
pub fn slice_partition(
    index: &SpatialIndex,
    neuron_id: u64,
    cfg: &SliceConfig,
) -> Result<(Vec<f64>, u32)> {
    if cfg.sectors < 2 {
        return Err(CoreError::InvalidConfig("slice sectors must be >= 2".into()));
    }
    let res = index.knn(neuron_id, cfg.k_slice)?;
    let query = index.point_of(neuron_id)?;
    let pts = member_points(index, &res.neighbors)?;
    let mut f = if res.clamped { flags::CLAMPED_K } else { 0 };
    let p = slice_proportions(query, &pts, cfg.sectors, &mut f);
    Ok((p, f))
}

fn slice_proportions(
    query: PointUm,
    member_pts: &[PointUm],
    sectors: usize,
    f: &mut u32,
) -> Vec<f64> {
    let mut counts = vec![0usize; sectors];
    if member_pts.is_empty() {
        *f |= flags::FEW_NEIGHBORS;
        return vec![0.0; sectors];
    }
    let sector_width = core::f64::consts::TAU / sectors as f64;
    for p in member_pts {
        let mut theta = (p.y - query.y).atan2(p.x - query.x);
        if theta < 0.0 {
            theta += core::f64::consts::TAU;
        }
        let idx = ((theta / sector_width) as usize) % sectors;
        counts[idx] += 1;
    }
    let n = member_pts.len() as f64;
    counts.iter().map(|&c| c as f64 / n).collect()
}

/// Shannon diversity index, −Σ pᵢ ln pᵢ. Zero proportions contribute 0;
/// maximal at ln R for uniform proportions, 0 when one sector holds all.
pub fn shannon_index(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&pi| pi > 0.0)
        .map(|&pi| pi * pi.ln())
        .sum::<f64>()
}

/// Simpson index, Σ pᵢ²: the probability two members drawn with
/// replacement share a sector. 1/R for uniform, 1 for a single sector.
pub fn simpson_index(p: &[f64]) -> f64 {
    p.iter().map(|&pi| pi * pi).sum()
}

/// Compute the full feature table: one fixed-schema row per neuron.
///
/// The region block columns are initialized to zero; the regions module
/// fills them. Rows are computed independently per neuron (parallel when
/// enabled) and the output is identical to a sequential run.
pub fn assemble_features(
    neurons: &[NeuronRecord],
    index: &SpatialIndex,
    cfg: &FeatureConfig,
) -> Result<FeatureTable> {
    if neurons.is_empty() {
        return Err(CoreError::EmptyInput("feature assembly"));
    }
    if cfg.k_set.is_empty() {
        return Err(CoreError::InvalidConfig("k_set must be non-empty".into()));
    }
    if cfg.slice.sectors < 2 {
        return Err(CoreError::InvalidConfig("slice sectors must be >= 2".into()));
    }
    let schema = feature_schema(cfg);
    let n_cols = schema.len();

    let gray_mean_med = column_median(neurons.iter().filter_map(|n| n.gray_mean));
    let gray_median_med = column_median(neurons.iter().filter_map(|n| n.gray_median));

    let k_max = cfg
        .k_set
        .iter()
        .copied()
        .chain(core::iter::once(cfg.slice.k_slice))
        .max()
        .unwrap();

    let rows = map_indexed(neurons.len(), |i| {
        neuron_row(
            &neurons[i],
            index,
            cfg,
            k_max,
            n_cols,
            gray_mean_med,
            gray_median_med,
        )
    });

    let mut table = FeatureTable::new(schema);
    for (neuron, (row, row_flags)) in neurons.iter().zip(rows) {
        debug_assert!(row.iter().all(|v| v.is_finite()));
        table.push_row(neuron.id, row, row_flags);
    }
    Ok(table)
}

fn column_median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn neuron_row(
    neuron: &NeuronRecord,
    index: &SpatialIndex,
    cfg: &FeatureConfig,
    k_max: usize,
    n_cols: usize,
    gray_mean_med: f64,
    gray_median_med: f64,
) -> (Vec<f64>, u32) {
    let mut row = Vec::with_capacity(n_cols);
    let mut f = 0u32;

    row.push(neuron.area_um2);
    row.push(neuron.perimeter_um);
    row.push(neuron.circularity);
    row.push(neuron.roundness);
    row.push(neuron.gray_mean.unwrap_or_else(|| {
        f |= flags::IMPUTED_GRAY_MEAN;
        gray_mean_med
    }));
    row.push(neuron.gray_median.unwrap_or_else(|| {
        f |= flags::IMPUTED_GRAY_MEDIAN;
        gray_median_med
    }));

    let all = index
        .knn(neuron.id, k_max)
        .expect("assemble queries ids from the same collection");
    if all.clamped {
        f |= flags::CLAMPED_K;
    }
    let query = index
        .point_of(neuron.id)
        .expect("assemble queries ids from the same collection");
    let all_pts: Vec<PointUm> = all
        .neighbors
        .iter()
        .map(|n| index.point_of(n.id).expect("neighbor id exists"))
        .collect();

    for &k in &cfg.k_set {
        let k_eff = k.min(all.neighbors.len());
        let dists: Vec<f64> = all.neighbors[..k_eff].iter().map(|n| n.dist_um).collect();
        let stats = stats_from_distances(&dists, &mut f);
        row.push(stats.mean);
        row.push(stats.std);
        row.push(stats.skew);
        row.push(stats.kurt);
        row.push(stats.entropy);

        let pts = &all_pts[..k_eff];
        let hull = hull_block(pts, &mut f);
        row.push(hull.hull_area_um2);
        row.push(hull.hull_perimeter_um);
        row.push(hull.hull_mean_nnd_um);
        row.push(hull.hull_std_nnd_um);
        row.push(density_from_hull(k_eff, hull.hull_area_um2));
        let nni_v = if hull.hull_area_um2 > 0.0 {
            let numerator = match cfg.nni_mode {
                NniMode::MemberNearest => hull.hull_mean_nnd_um,
                NniMode::CentralMean => stats.mean,
            };
            numerator / (0.5 * (hull.hull_area_um2 / k_eff as f64).sqrt())
        } else {
            0.0
        };
        row.push(nni_v);
    }

    let k_slice_eff = cfg.slice.k_slice.min(all.neighbors.len());
    let p = slice_proportions(query, &all_pts[..k_slice_eff], cfg.slice.sectors, &mut f);
    if k_slice_eff == 0 {
        row.extend([0.0, 0.0, 0.0, 0.0]);
    } else {
        row.push(shannon_index(&p));
        row.push(simpson_index(&p));
        row.push(p.iter().copied().fold(f64::INFINITY, f64::min));
        row.push(p.iter().copied().fold(0.0f64, f64::max));
    }

    // Region block, filled by the regions module.
    row.extend(core::iter::repeat(0.0).take(REGION_COLUMNS.len()));
    debug_assert_eq!(row.len(), n_cols);
    (row, f)
}
