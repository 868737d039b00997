//! Multiclass gradient boosting over decision trees.
//!
//! One model is trained per rater with a softmax objective: each round
//! fits one regression tree per class to the first-order gradients, with
//! second-order (Newton) leaf values -G/(H+λ). Splits are exact greedy
//! over presorted feature columns; equal gains resolve to the lowest
//! feature index, then the lowest threshold, so training is bit-for-bit
//! deterministic. Rater fusion sums member probability vectors.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::map_indexed;
use crate::types::{FeatureTable, LabelSet, LayerClass};

/// Training hyperparameters; the seed fixes every stochastic choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l2_leaf_reg: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            rounds: 200,
            max_depth: 6,
            learning_rate: 0.1,
            l2_leaf_reg: 1.0,
            min_samples_leaf: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(CoreError::InvalidConfig(
                "rounds, max_depth and min_samples_leaf must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0) || !(self.l2_leaf_reg > 0.0) {
            return Err(CoreError::InvalidConfig(
                "learning_rate and l2_leaf_reg must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A regression tree in flat-array form.
///
/// `feature_idx[i] < 0` marks node i as a leaf; internal nodes carry the
/// split feature/threshold and child indices. `covers` records the number
/// of training rows routed through each node, which attribution needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub feature_idx: Vec<i32>,
    pub threshold: Vec<f64>,
    pub left: Vec<i32>,
    pub right: Vec<i32>,
    pub leaf_values: Vec<f64>,
    pub covers: Vec<f64>,
}

impl Tree {
    pub fn n_nodes(&self) -> usize {
        self.feature_idx.len()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.feature_idx[node] < 0
    }

    /// Index of the leaf a feature row routes to.
    pub fn leaf_of(&self, row: &[f64]) -> usize {
        let mut idx = 0usize;
        while self.feature_idx[idx] >= 0 {
            let f = self.feature_idx[idx] as usize;
            idx = if row[f] <= self.threshold[idx] {
                self.left[idx] as usize
            } else {
                self.right[idx] as usize
            };
        }
        idx
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.leaf_values[self.leaf_of(row)]
    }

    /// Cover-weighted mean leaf value (the tree's expected output).
    pub fn expected_value(&self) -> f64 {
        let root_cover = self.covers[0];
        if root_cover == 0.0 {
            return 0.0;
        }
        (0..self.n_nodes())
            .filter(|&i| self.is_leaf(i))
            .map(|i| self.leaf_values[i] * self.covers[i])
            .sum::<f64>()
            / root_cover
    }
}

/// Boosted multiclass model for one rater.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsembleModel {
    pub rater_id: String,
    /// Feature schema; must match the table used at prediction time.
    pub schema: Vec<String>,
    pub n_classes: usize,
    pub base_scores: Vec<f64>,
    /// Round-major: tree t belongs to class `t % n_classes`.
    pub trees: Vec<Tree>,
    pub config: TrainConfig,
}

impl TreeEnsembleModel {
    /// Pre-softmax margin per class.
    pub fn margins(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.schema.len() {
            return Err(CoreError::SchemaMismatch(alloc::format!(
                "row has {} features, model expects {}",
                row.len(),
                self.schema.len()
            )));
        }
        let mut scores = self.base_scores.clone();
        for (t, tree) in self.trees.iter().enumerate() {
            scores[t % self.n_classes] += tree.predict(row);
        }
        Ok(scores)
    }

    /// Class probabilities: softmax over accumulated margins.
    pub fn predict_proba(&self, row: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.margins(row)?))
    }

    /// Most probable class; probability ties resolve to the lowest ordinal.
    pub fn predict_class(&self, row: &[f64]) -> Result<LayerClass> {
        let proba = self.predict_proba(row)?;
        Ok(LayerClass::from_ordinal(argmax(&proba)).expect("n_classes <= 7"))
    }
}

/// Per-rater models fused by probability summation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaterEnsemble {
    pub models: Vec<TreeEnsembleModel>,
}

impl RaterEnsemble {
    pub fn new(models: Vec<TreeEnsembleModel>) -> Self {
        RaterEnsemble { models }
    }
}

/// Element-wise sum of member probability vectors; the class is the
/// argmax of the summed mass, ties broken by lowest ordinal.
pub fn ensemble_predict(ensemble: &RaterEnsemble, row: &[f64]) -> Result<(LayerClass, Vec<f64>)> {
    let first = ensemble
        .models
        .first()
        .ok_or(CoreError::EmptyInput("ensemble has no member models"))?;
    for m in &ensemble.models[1..] {
        if m.schema != first.schema {
            return Err(CoreError::SchemaMismatch(
                "ensemble members disagree on feature schema".into(),
            ));
        }
    }
    let mut summed = alloc::vec![0.0; first.n_classes];
    for m in &ensemble.models {
        for (s, p) in summed.iter_mut().zip(m.predict_proba(row)?) {
            *s += p;
        }
    }
    let class = LayerClass::from_ordinal(argmax(&summed)).expect("n_classes <= 7");
    Ok((class, summed))
}

pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Stratified train/test id split.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainTestSplit {
    pub train_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
    /// Classes with fewer than 2 members, assigned without stratification.
    pub unstratified: Vec<LayerClass>,
}

/// Split labeled ids into train/test, stratified by class.
///
/// Deterministic for a fixed seed; the returned id lists are disjoint,
/// exhaustive and sorted. Classes with fewer than 2 members cannot be
/// stratified and are pooled, with a warning entry in the result.
pub fn split_train_test(labels: &LabelSet, fraction: f64, seed: u64) -> Result<TrainTestSplit> {
    if labels.len() < 4 {
        return Err(CoreError::InvalidTrainingData(
            "need at least 4 labeled neurons to split".into(),
        ));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CoreError::InvalidConfig("fraction must be in (0, 1)".into()));
    }
    let mut by_class: alloc::collections::BTreeMap<LayerClass, Vec<u64>> =
        alloc::collections::BTreeMap::new();
    for (id, class) in labels.iter() {
        by_class.entry(class).or_default().push(id);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_ids = Vec::new();
    let mut test_ids = Vec::new();
    let mut pooled: Vec<u64> = Vec::new();
    let mut unstratified = Vec::new();
    let mut stratified: Vec<(LayerClass, Vec<u64>)> = Vec::new();
    for (class, mut ids) in by_class {
        if ids.len() < 2 {
            unstratified.push(class);
            pooled.extend(ids);
            continue;
        }
        ids.shuffle(&mut rng);
        stratified.push((class, ids));
    }

    // Largest-remainder allocation: per-class counts stay within one of
    // `fraction * n_c` while the overall train size hits the rounded total.
    if !stratified.is_empty() {
        let total: usize = stratified.iter().map(|(_, ids)| ids.len()).sum();
        let target = (fraction * total as f64).round() as usize;
        let mut take: Vec<usize> = Vec::with_capacity(stratified.len());
        let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(stratified.len());
        for (slot, (_, ids)) in stratified.iter().enumerate() {
            let exact = fraction * ids.len() as f64;
            let floor = exact as usize;
            take.push(floor);
            remainders.push((exact - floor as f64, slot));
        }
        let mut extra = target.saturating_sub(take.iter().sum::<usize>());
        remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        for &(_, slot) in &remainders {
            if extra == 0 {
                break;
            }
            if take[slot] < stratified[slot].1.len() {
                take[slot] += 1;
                extra -= 1;
            }
        }
        for (n_train, (_, ids)) in take.into_iter().zip(stratified) {
            train_ids.extend(&ids[..n_train]);
            test_ids.extend(&ids[n_train..]);
        }
    }
    if !pooled.is_empty() {
        pooled.shuffle(&mut rng);
        let n_train = (fraction * pooled.len() as f64).round() as usize;
        train_ids.extend(&pooled[..n_train]);
        test_ids.extend(&pooled[n_train..]);
    }
    train_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok(TrainTestSplit {
        train_ids,
        test_ids,
        unstratified,
    })
}

/// Training result: the model plus the per-round training loss curve
/// (multiclass cross-entropy; index 0 is the pre-training loss).
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: TreeEnsembleModel,
    pub train_loss: Vec<f64>,
}

/// Train one boosted model on the labeled subset of a feature table.
pub fn train(
    features: &FeatureTable,
    labels: &LabelSet,
    cfg: &TrainConfig,
    rater_id: &str,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let n_feat = features.n_cols();
    let n_classes = LayerClass::COUNT;

    // Gather training rows in ascending id order.
    let mut rows: Vec<usize> = Vec::with_capacity(labels.len());
    let mut y: Vec<u8> = Vec::with_capacity(labels.len());
    for (id, class) in labels.iter() {
        let row = features.row_of(id).map_err(|_| {
            CoreError::InvalidTrainingData(alloc::format!("labeled id {id} has no feature row"))
        })?;
        rows.push(row);
        y.push(class.ordinal() as u8);
    }
    if rows.is_empty() {
        return Err(CoreError::InvalidTrainingData("no labeled rows".into()));
    }
    {
        let mut seen = [false; LayerClass::COUNT];
        for &c in &y {
            seen[c as usize] = true;
        }
        if seen.iter().filter(|&&s| s).count() < 2 {
            return Err(CoreError::InvalidTrainingData(
                "training requires at least 2 classes".into(),
            ));
        }
    }

    let n = rows.len();
    let mut x = alloc::vec![0.0f64; n * n_feat];
    for (i, &row) in rows.iter().enumerate() {
        let src = features.row(row);
        if src.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidTrainingData(alloc::format!(
                "non-finite feature value in row of id {}",
                features.ids[row]
            )));
        }
        x[i * n_feat..(i + 1) * n_feat].copy_from_slice(src);
    }

    // Presorted column order, shared by every tree.
    let sorted: Vec<(Vec<u32>, Vec<f64>)> = map_indexed(n_feat, |f| {
        let mut idx: Vec<u32> = (0..n as u32).collect();
        idx.sort_unstable_by(|&a, &b| {
            x[a as usize * n_feat + f]
                .total_cmp(&x[b as usize * n_feat + f])
                .then_with(|| a.cmp(&b))
        });
        let vals: Vec<f64> = idx.iter().map(|&r| x[r as usize * n_feat + f]).collect();
        (idx, vals)
    });

    let base_scores = alloc::vec![0.0f64; n_classes];
    let mut margins = alloc::vec![0.0f64; n * n_classes];
    let mut trees: Vec<Tree> = Vec::with_capacity(cfg.rounds * n_classes);
    let mut train_loss = Vec::with_capacity(cfg.rounds + 1);
    train_loss.push(cross_entropy(&margins, &y, n_classes));

    // Gradient/hessian pairs interleaved per row for cache locality.
    let mut gh = alloc::vec![0.0f64; 2 * n];
    let mut probs = alloc::vec![0.0f64; n * n_classes];

    for _round in 0..cfg.rounds {
        for i in 0..n {
            let p = softmax(&margins[i * n_classes..(i + 1) * n_classes]);
            probs[i * n_classes..(i + 1) * n_classes].copy_from_slice(&p);
        }
        for class in 0..n_classes {
            for i in 0..n {
                let p = probs[i * n_classes + class];
                let target = (y[i] as usize == class) as u8 as f64;
                gh[2 * i] = p - target;
                gh[2 * i + 1] = p * (1.0 - p);
            }
            let (tree, leaf_of_row) = grow_tree(&x, n_feat, &sorted, &gh, cfg);
            for i in 0..n {
                margins[i * n_classes + class] += tree.leaf_values[leaf_of_row[i] as usize];
            }
            trees.push(tree);
        }
        train_loss.push(cross_entropy(&margins, &y, n_classes));
    }

    Ok(TrainOutcome {
        model: TreeEnsembleModel {
            rater_id: rater_id.into(),
            schema: features.schema.clone(),
            n_classes,
            base_scores,
            trees,
            config: cfg.clone(),
        },
        train_loss,
    })
}

fn cross_entropy(margins: &[f64], y: &[u8], n_classes: usize) -> f64 {
    let n = y.len();
    let mut loss = 0.0;
    for i in 0..n {
        let p = softmax(&margins[i * n_classes..(i + 1) * n_classes]);
        loss -= p[y[i] as usize].max(1e-15).ln();
    }
    loss / n as f64
}

#[derive(Clone, Copy)]
struct SplitCandidate {
    gain: f64,
    feature: u32,
    threshold: f64,
    left_g: f64,
    left_h: f64,
    left_count: u32,
}

#[derive(Clone, Copy)]
struct BuildNode {
    g: f64,
    h: f64,
    count: u32,
}

const NO_SLOT: u16 = u16::MAX;

/// Grow one regression tree, level-wise, with exact greedy splits.
///
/// Returns the tree and each training row's final leaf index. Leaf values
/// are Newton steps already scaled by the learning rate.
fn grow_tree(
    x: &[f64],
    n_feat: usize,
    sorted: &[(Vec<u32>, Vec<f64>)],
    gh: &[f64],
    cfg: &TrainConfig,
) -> (Tree, Vec<u32>) {
    let n = gh.len() / 2;
    let lambda = cfg.l2_leaf_reg;
    let msl = cfg.min_samples_leaf as u32;

    let mut feature_idx: Vec<i32> = alloc::vec![-1];
    let mut threshold: Vec<f64> = alloc::vec![0.0];
    let mut left: Vec<i32> = alloc::vec![-1];
    let mut right: Vec<i32> = alloc::vec![-1];
    let (root_g, root_h) = {
        let mut g = 0.0;
        let mut h = 0.0;
        for i in 0..n {
            g += gh[2 * i];
            h += gh[2 * i + 1];
        }
        (g, h)
    };
    let mut stats: Vec<BuildNode> = alloc::vec![BuildNode {
        g: root_g,
        h: root_h,
        count: n as u32,
    }];

    let mut node_of_row: Vec<u32> = alloc::vec![0; n];
    // Per-level slot of each row; NO_SLOT once its node is finalized.
    let mut slot_of_row: Vec<u16> = alloc::vec![0; n];
    let mut level: Vec<u32> = alloc::vec![0];

    for depth in 0..cfg.max_depth {
        if level.is_empty() {
            break;
        }
        let n_slots = level.len();
        let level_stats: Vec<BuildNode> = level.iter().map(|&nd| stats[nd as usize]).collect();
        let parent_scores: Vec<f64> = level_stats
            .iter()
            .map(|s| s.g * s.g / (s.h + lambda))
            .collect();

        // Best candidate per (feature, slot); features scan independently.
        let per_feature: Vec<Vec<Option<SplitCandidate>>> = map_indexed(n_feat, |f| {
            scan_feature(
                f,
                &sorted[f],
                &slot_of_row,
                &level_stats,
                &parent_scores,
                gh,
                msl,
                lambda,
            )
        });

        // Deterministic reduce: strictly greater gain wins, so the lowest
        // feature index (then lowest threshold) takes ties.
        let mut best: Vec<Option<SplitCandidate>> = alloc::vec![None; n_slots];
        for cands in &per_feature {
            for (slot, cand) in cands.iter().enumerate() {
                if let Some(c) = cand {
                    let better = match &best[slot] {
                        None => c.gain > 0.0,
                        Some(b) => c.gain > b.gain,
                    };
                    if better {
                        best[slot] = Some(*c);
                    }
                }
            }
        }

        let mut next_level: Vec<u32> = Vec::new();
        // Per-slot routing for the partition pass: (feature, threshold,
        // left/right node, left/right slot).
        let mut route: Vec<Option<(u32, f64, u32, u32, u16, u16)>> = alloc::vec![None; n_slots];
        for (slot, &nd) in level.iter().enumerate() {
            let ndu = nd as usize;
            if let Some(c) = best[slot] {
                if c.gain > 0.0 {
                    let parent = stats[ndu];
                    let l = feature_idx.len() as u32;
                    let r = l + 1;
                    feature_idx[ndu] = c.feature as i32;
                    threshold[ndu] = c.threshold;
                    left[ndu] = l as i32;
                    right[ndu] = r as i32;
                    for (child_g, child_h, child_cnt) in [
                        (c.left_g, c.left_h, c.left_count),
                        (
                            parent.g - c.left_g,
                            parent.h - c.left_h,
                            parent.count - c.left_count,
                        ),
                    ] {
                        feature_idx.push(-1);
                        threshold.push(0.0);
                        left.push(-1);
                        right.push(-1);
                        stats.push(BuildNode {
                            g: child_g,
                            h: child_h,
                            count: child_cnt,
                        });
                    }
                    let lslot = next_level.len() as u16;
                    next_level.push(l);
                    let rslot = next_level.len() as u16;
                    next_level.push(r);
                    route[slot] = Some((c.feature, c.threshold, l, r, lslot, rslot));
                }
            }
        }

        if next_level.is_empty() {
            break;
        }
        // Route rows of split nodes to their children.
        let last_level = depth + 1 == cfg.max_depth;
        for row in 0..n {
            let slot = slot_of_row[row];
            if slot == NO_SLOT {
                continue;
            }
            match route[slot as usize] {
                Some((f, thr, l, r, lslot, rslot)) => {
                    if x[row * n_feat + f as usize] <= thr {
                        node_of_row[row] = l;
                        slot_of_row[row] = if last_level { NO_SLOT } else { lslot };
                    } else {
                        node_of_row[row] = r;
                        slot_of_row[row] = if last_level { NO_SLOT } else { rslot };
                    }
                }
                None => slot_of_row[row] = NO_SLOT,
            }
        }
        level = next_level;
    }

    let n_nodes = feature_idx.len();
    let mut leaf_values = alloc::vec![0.0f64; n_nodes];
    let mut covers = alloc::vec![0.0f64; n_nodes];
    for i in 0..n_nodes {
        covers[i] = stats[i].count as f64;
        if feature_idx[i] < 0 {
            leaf_values[i] = -cfg.learning_rate * stats[i].g / (stats[i].h + lambda);
        }
    }

    (
        Tree {
            feature_idx,
            threshold,
            left,
            right,
            leaf_values,
            covers,
        },
        node_of_row,
    )
}

#[allow(clippy::too_many_arguments)]
fn scan_feature(
    feature: usize,
    sorted: &(Vec<u32>, Vec<f64>),
    slot_of_row: &[u16],
    level_stats: &[BuildNode],
    parent_scores: &[f64],
    gh: &[f64],
    msl: u32,
    lambda: f64,
) -> Vec<Option<SplitCandidate>> {
    #[derive(Clone, Copy)]
    struct Acc {
        g: f64,
        h: f64,
        count: u32,
        last_val: f64,
        started: bool,
    }
    let n_slots = level_stats.len();
    let mut accs = alloc::vec![
        Acc {
            g: 0.0,
            h: 0.0,
            count: 0,
            last_val: 0.0,
            started: false,
        };
        n_slots
    ];
    let mut best: Vec<Option<SplitCandidate>> = alloc::vec![None; n_slots];

    let (ref idx, ref vals) = *sorted;
    for (pos, &rowu) in idx.iter().enumerate() {
        let row = rowu as usize;
        let slot = slot_of_row[row];
        if slot == NO_SLOT {
            continue;
        }
        let slot = slot as usize;
        let v = vals[pos];
        let acc = &mut accs[slot];
        let parent = level_stats[slot];
        if acc.started && v != acc.last_val && acc.count >= msl && parent.count - acc.count >= msl
        {
            let right_g = parent.g - acc.g;
            let right_h = parent.h - acc.h;
            let gain = 0.5
                * (acc.g * acc.g / (acc.h + lambda) + right_g * right_g / (right_h + lambda)
                    - parent_scores[slot]);
            let better = match &best[slot] {
                None => gain > 0.0,
                Some(b) => gain > b.gain,
            };
            if better {
                best[slot] = Some(SplitCandidate {
                    gain,
                    feature: feature as u32,
                    threshold: midpoint(acc.last_val, v),
                    left_g: acc.g,
                    left_h: acc.h,
                    left_count: acc.count,
                });
            }
        }
        acc.g += gh[2 * row];
        acc.h += gh[2 * row + 1];
        acc.count += 1;
        acc.last_val = v;
        acc.started = true;
    }
    best
}

/// Midpoint split threshold; falls back to the lower value when rounding
/// would land on the upper one, so `x <= t` routes exactly the scanned
/// prefix left.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::prelude::*;
    use rand_distr::{Distribution, Normal};

    /// Two separable Gaussian blobs over 2 features, labeled I and II.
    fn toy_blobs(n_per: usize, seed: u64) -> (FeatureTable, LabelSet) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = FeatureTable::new(vec!["f0".into(), "f1".into()]);
        let mut labels = LabelSet::new("toy");
        let da = Normal::new(0.0, 1.0).unwrap();
        let db = Normal::new(8.0, 1.0).unwrap();
        for i in 0..n_per {
            let id = i as u64;
            table.push_row(id, vec![da.sample(&mut rng), da.sample(&mut rng)], 0);
            labels.insert(id, LayerClass::I);
        }
        for i in 0..n_per {
            let id = (n_per + i) as u64;
            table.push_row(id, vec![db.sample(&mut rng), db.sample(&mut rng)], 0);
            labels.insert(id, LayerClass::II);
        }
        (table, labels)
    }

    fn labels_100() -> LabelSet {
        let mut labels = LabelSet::new("r1");
        for i in 0..100u64 {
            let class = match i % 4 {
                0 => LayerClass::I,
                1 => LayerClass::III,
                2 => LayerClass::V,
                _ => LayerClass::WM,
            };
            labels.insert(i, class);
        }
        labels
    }

    #[test]
    fn split_is_75_25() {
        let split = split_train_test(&labels_100(), 0.75, 7).unwrap();
        assert_eq!(split.train_ids.len(), 75);
        assert_eq!(split.test_ids.len(), 25);
        assert!(split.unstratified.is_empty());
    }

    #[test]
    fn split_is_deterministic_and_a_partition() {
        let a = split_train_test(&labels_100(), 0.75, 42).unwrap();
        let b = split_train_test(&labels_100(), 0.75, 42).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<u64> = a.train_ids.iter().chain(a.test_ids.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<u64>>());
        let c = split_train_test(&labels_100(), 0.75, 43).unwrap();
        assert_ne!(a.train_ids, c.train_ids);
    }

    #[test]
    fn split_preserves_class_proportions_within_one() {
        let labels = labels_100();
        let split = split_train_test(&labels, 0.75, 3).unwrap();
        for class in [LayerClass::I, LayerClass::III, LayerClass::V, LayerClass::WM] {
            let total = labels.iter().filter(|&(_, c)| c == class).count() as f64;
            let in_train = split
                .train_ids
                .iter()
                .filter(|&&id| labels.get(id) == Some(class))
                .count() as f64;
            assert!((in_train - 0.75 * total).abs() <= 1.0);
        }
    }

    #[test]
    fn split_pools_singleton_classes_with_warning() {
        let mut labels = labels_100();
        labels.insert(1000, LayerClass::VI);
        let split = split_train_test(&labels, 0.75, 9).unwrap();
        assert_eq!(split.unstratified, vec![LayerClass::VI]);
        assert_eq!(split.train_ids.len() + split.test_ids.len(), 101);
    }

    #[test]
    fn toy_blobs_reach_perfect_training_accuracy() {
        let (table, labels) = toy_blobs(100, 5);
        let cfg = TrainConfig {
            rounds: 50,
            min_samples_leaf: 5,
            ..TrainConfig::default()
        };
        let out = train(&table, &labels, &cfg, "toy").unwrap();
        let mut correct = 0;
        for (i, &id) in table.ids.iter().enumerate() {
            let class = out.model.predict_class(table.row(i)).unwrap();
            if labels.get(id) == Some(class) {
                correct += 1;
            }
        }
        assert_eq!(correct, 200, "training accuracy must reach 1.0");
    }

    #[test]
    fn training_loss_never_increases() {
        let (table, labels) = toy_blobs(60, 8);
        let cfg = TrainConfig {
            rounds: 40,
            min_samples_leaf: 5,
            ..TrainConfig::default()
        };
        let out = train(&table, &labels, &cfg, "toy").unwrap();
        assert_eq!(out.train_loss.len(), 41);
        for w in out.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "loss increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (table, labels) = toy_blobs(50, 2);
        let cfg = TrainConfig {
            rounds: 10,
            min_samples_leaf: 5,
            ..TrainConfig::default()
        };
        let out = train(&table, &labels, &cfg, "toy").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let row = [rng.gen_range(-5.0..12.0), rng.gen_range(-5.0..12.0)];
            let p = out.model.predict_proba(&row).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&pi| pi > 0.0 && pi < 1.0));
        }
    }

    #[test]
    fn constant_feature_is_never_split() {
        let (mut table, labels) = toy_blobs(80, 3);
        // Append a constant third feature.
        table.schema.push("const".into());
        let mut values = Vec::new();
        for i in 0..table.ids.len() {
            let start = i * 2;
            values.extend_from_slice(&table.values[start..start + 2]);
            values.push(42.0);
        }
        table.values = values;
        let cfg = TrainConfig {
            rounds: 20,
            min_samples_leaf: 5,
            ..TrainConfig::default()
        };
        let out = train(&table, &labels, &cfg, "toy").unwrap();
        for tree in &out.model.trees {
            assert!(tree.feature_idx.iter().all(|&f| f != 2));
        }
    }

    #[test]
    fn zero_trees_yield_uniform_probabilities() {
        let model = TreeEnsembleModel {
            rater_id: "empty".into(),
            schema: vec!["a".into(), "b".into()],
            n_classes: 7,
            base_scores: vec![0.0; 7],
            trees: vec![],
            config: TrainConfig::default(),
        };
        let p = model.predict_proba(&[1.0, 2.0]).unwrap();
        for pi in p {
            assert!((pi - 1.0 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let (table, labels) = toy_blobs(50, 2);
        let cfg = TrainConfig {
            rounds: 2,
            min_samples_leaf: 5,
            ..TrainConfig::default()
        };
        let out = train(&table, &labels, &cfg, "toy").unwrap();
        assert!(matches!(
            out.model.predict_proba(&[1.0, 2.0, 3.0]),
            Err(CoreError::SchemaMismatch(_))
        ));
    }

    #[test]
    fn single_class_training_is_rejected() {
        let mut table = FeatureTable::new(vec!["f0".into()]);
        let mut labels = LabelSet::new("r");
        for i in 0..50u64 {
            table.push_row(i, vec![i as f64], 0);
            labels.insert(i, LayerClass::IV);
        }
        assert!(matches!(
            train(&table, &labels, &TrainConfig::default(), "r"),
            Err(CoreError::InvalidTrainingData(_))
        ));
    }

    #[test]
    fn nan_feature_is_rejected() {
        let mut table = FeatureTable::new(vec!["f0".into()]);
        let mut labels = LabelSet::new("r");
        for i in 0..10u64 {
            let v = if i == 3 { f64::NAN } else { i as f64 };
            table.push_row(i, vec![v], 0);
            labels.insert(i, if i < 5 { LayerClass::I } else { LayerClass::II });
        }
        assert!(matches!(
            train(&table, &labels, &TrainConfig::default(), "r"),
            Err(CoreError::InvalidTrainingData(_))
        ));
    }

    #[test]
    fn training_is_bit_identical_for_fixed_inputs() {
        let (table, labels) = toy_blobs(80, 6);
        let cfg = TrainConfig {
            rounds: 15,
            min_samples_leaf: 5,
            ..TrainConfig::default()
        };
        let a = train(&table, &labels, &cfg, "toy").unwrap();
        let b = train(&table, &labels, &cfg, "toy").unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.train_loss, b.train_loss);
    }

    #[test]
    fn prediction_invariant_under_monotone_feature_transform() {
        let (table, labels) = toy_blobs(100, 9);
        let cfg = TrainConfig {
            rounds: 20,
            min_samples_leaf: 5,
            ..TrainConfig::default()
        };
        let out = train(&table, &labels, &cfg, "toy").unwrap();

        // Strictly increasing transform of feature 0, train and predict.
        let mut transformed = table.clone();
        for i in 0..transformed.ids.len() {
            let v = transformed.get(i, 0);
            transformed.set(i, 0, (v * 0.3).exp());
        }
        let out_t = train(&transformed, &labels, &cfg, "toy").unwrap();
        for i in 0..table.ids.len() {
            let a = out.model.predict_class(table.row(i)).unwrap();
            let b = out_t.model.predict_class(transformed.row(i)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ensemble_of_identical_members_matches_single_model() {
        let (table, labels) = toy_blobs(60, 4);
        let cfg = TrainConfig {
            rounds: 10,
            min_samples_leaf: 5,
            ..TrainConfig::default()
        };
        let out = train(&table, &labels, &cfg, "toy").unwrap();
        let ensemble = RaterEnsemble::new(vec![
            out.model.clone(),
            out.model.clone(),
            out.model.clone(),
        ]);
        for i in 0..table.ids.len() {
            let single = out.model.predict_class(table.row(i)).unwrap();
            let (fused, _) = ensemble_predict(&ensemble, table.row(i)).unwrap();
            assert_eq!(single, fused);
        }
    }

    /// Member with fixed output probabilities, for fusion arithmetic tests.
    fn constant_model(probs: &[f64; 7]) -> TreeEnsembleModel {
        // A single-leaf tree per class reproduces ln(p) margins.
        let mut trees = Vec::new();
        for c in 0..7 {
            trees.push(Tree {
                feature_idx: vec![-1],
                threshold: vec![0.0],
                left: vec![-1],
                right: vec![-1],
                leaf_values: vec![probs[c].ln()],
                covers: vec![1.0],
            });
        }
        TreeEnsembleModel {
            rater_id: "const".into(),
            schema: vec!["f0".into()],
            n_classes: 7,
            base_scores: vec![0.0; 7],
            trees,
            config: TrainConfig::default(),
        }
    }

    #[test]
    fn ensemble_sums_probability_mass() {
        // One member favors I (0.6); two members favor II (0.6 each).
        // Summed mass: I gets 0.6 + 2*0.05 = 0.7, II gets 0.05 + 1.2 = 1.25.
        let mut a = [0.05f64; 7];
        a[0] = 0.7;
        let mut b = [0.05f64; 7];
        b[1] = 0.7;
        // Normalize to exact distributions.
        let norm = |v: &mut [f64; 7]| {
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
        };
        norm(&mut a);
        norm(&mut b);
        let ensemble = RaterEnsemble::new(vec![
            constant_model(&a),
            constant_model(&b),
            constant_model(&b),
        ]);
        let (class, summed) = ensemble_predict(&ensemble, &[0.0]).unwrap();
        assert_eq!(class, LayerClass::II);
        let expected: Vec<f64> = (0..7).map(|c| a[c] + 2.0 * b[c]).collect();
        for (s, e) in summed.iter().zip(expected.iter()) {
            assert!((s - e).abs() < 1e-9);
        }
    }

    #[test]
    fn ensemble_tie_resolves_to_lower_ordinal() {
        let mut a = [0.1f64; 7];
        a[2] = 0.4;
        a[5] = 0.4;
        a[0] = 0.1;
        let norm_sum: f64 = a.iter().sum();
        a.iter_mut().for_each(|x| *x /= norm_sum);
        let ensemble = RaterEnsemble::new(vec![constant_model(&a)]);
        let (class, summed) = ensemble_predict(&ensemble, &[0.0]).unwrap();
        assert_eq!(summed[2], summed[5]);
        assert_eq!(class, LayerClass::III);
    }

    #[test]
    fn ensemble_argmax_invariant_to_member_order() {
        let (table, labels) = toy_blobs(60, 10);
        let cfg = TrainConfig {
            rounds: 8,
            min_samples_leaf: 5,
            ..TrainConfig::default()
        };
        let m1 = train(&table, &labels, &cfg, "a").unwrap().model;
        let cfg2 = TrainConfig { rounds: 12, ..cfg };
        let m2 = train(&table, &labels, &cfg2, "b").unwrap().model;
        let e1 = RaterEnsemble::new(vec![m1.clone(), m2.clone()]);
        let e2 = RaterEnsemble::new(vec![m2, m1]);
        for i in 0..table.ids.len() {
            let (c1, _) = ensemble_predict(&e1, table.row(i)).unwrap();
            let (c2, _) = ensemble_predict(&e2, table.row(i)).unwrap();
            assert_eq!(c1, c2);
        }
    }

    #[test]
    fn empty_ensemble_is_an_error() {
        let ensemble = RaterEnsemble::new(vec![]);
        assert!(ensemble_predict(&ensemble, &[0.0]).is_err());
    }
}
