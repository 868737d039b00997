//! TreeSHAP feature attribution for boosted-tree models.
//!
//! Computes per-neuron, per-class Shapley values on the margin
//! (pre-softmax) scale using the path-dependent polynomial-time tree
//! algorithm, weighted by the per-node training coverage recorded at
//! train time. Local accuracy holds exactly: the class base value plus
//! the per-feature attributions reconstructs the model margin.
//!
//! Explanations are computed per rater model; summation after softmax has
//! no exact Shapley decomposition, so ensemble output is explained as the
//! set of member explanations.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{CoreError, Result};
use crate::map_indexed;
use crate::model::{ensemble_predict, RaterEnsemble, Tree, TreeEnsembleModel};
use crate::types::{FeatureTable, LayerClass};

/// Per-class feature attributions for one neuron.
///
/// `base[c] + phi[c].sum()` equals the model margin for class c on this
/// neuron within 1e-6.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapExplanation {
    pub neuron_id: u64,
    pub rater_id: String,
    /// Expected margin per class (base score + expected tree outputs).
    pub base: Vec<f64>,
    /// `phi[class][feature]` margin-scale attributions.
    pub phi: Vec<Vec<f64>>,
}

fn ensure_coverage(model: &TreeEnsembleModel) -> Result<()> {
    for tree in &model.trees {
        if tree.covers.len() != tree.n_nodes() || tree.covers.first().copied().unwrap_or(0.0) <= 0.0
        {
            return Err(CoreError::MissingCoverage);
        }
    }
    Ok(())
}

/// Path-dependent TreeSHAP attribution of one feature row.
pub fn tree_shap(model: &TreeEnsembleModel, row: &[f64], neuron_id: u64) -> Result<ShapExplanation> {
    if row.len() != model.schema.len() {
        return Err(CoreError::SchemaMismatch(alloc::format!(
            "row has {} features, model expects {}",
            row.len(),
            model.schema.len()
        )));
    }
    ensure_coverage(model)?;
    let n_feat = model.schema.len();
    let mut base = model.base_scores.clone();
    let mut phi = alloc::vec![alloc::vec![0.0f64; n_feat]; model.n_classes];
    for (t, tree) in model.trees.iter().enumerate() {
        let class = t % model.n_classes;
        base[class] += tree.expected_value();
        shap_one_tree(tree, row, &mut phi[class]);
    }
    Ok(ShapExplanation {
        neuron_id,
        rater_id: model.rater_id.clone(),
        base,
        phi,
    })
}

#[derive(Clone, Copy, Debug)]
struct PathElement {
    feature: usize,
    zero: f64,
    one: f64,
    weight: f64,
}

const ROOT_FEATURE: usize = usize::MAX;

fn extend(path: &mut Vec<PathElement>, zero: f64, one: f64, feature: usize) {
    let l = path.len();
    path.push(PathElement {
        feature,
        zero,
        one,
        weight: if l == 0 { 1.0 } else { 0.0 },
    });
    for j in (0..l).rev() {
        path[j + 1].weight += one * path[j].weight * (j + 1) as f64 / (l + 1) as f64;
        path[j].weight = zero * path[j].weight * (l - j) as f64 / (l + 1) as f64;
    }
}

fn unwind(path: &mut Vec<PathElement>, i: usize) {
    let l = path.len() - 1;
    let one = path[i].one;
    let zero = path[i].zero;
    let mut next = path[l].weight;
    for j in (0..l).rev() {
        if one != 0.0 {
            let tmp = path[j].weight;
            path[j].weight = next * (l + 1) as f64 / ((j + 1) as f64 * one);
            next = tmp - path[j].weight * zero * (l - j) as f64 / (l + 1) as f64;
        } else {
            path[j].weight = path[j].weight * (l + 1) as f64 / (zero * (l - j) as f64);
        }
    }
    for j in i..l {
        path[j].feature = path[j + 1].feature;
        path[j].zero = path[j + 1].zero;
        path[j].one = path[j + 1].one;
    }
    path.pop();
}

fn unwound_sum(path: &[PathElement], i: usize) -> f64 {
    let l = path.len() - 1;
    let one = path[i].one;
    let zero = path[i].zero;
    let mut next = path[l].weight;
    let mut total = 0.0;
    for j in (0..l).rev() {
        if one != 0.0 {
            let tmp = next * (l + 1) as f64 / ((j + 1) as f64 * one);
            total += tmp;
            next = path[j].weight - tmp * zero * (l - j) as f64 / (l + 1) as f64;
        } else {
            total += path[j].weight * (l + 1) as f64 / (zero * (l - j) as f64);
        }
    }
    total
}

fn shap_one_tree(tree: &Tree, row: &[f64], phi: &mut [f64]) {
    shap_recurse(tree, row, phi, 0, Vec::new(), 1.0, 1.0, ROOT_FEATURE);
}

#[allow(clippy::too_many_arguments)]
fn shap_recurse(
    tree: &Tree,
    row: &[f64],
    phi: &mut [f64],
    node: usize,
    mut path: Vec<PathElement>,
    parent_zero: f64,
    parent_one: f64,
    parent_feature: usize,
) {
    extend(&mut path, parent_zero, parent_one, parent_feature);
    if tree.is_leaf(node) {
        let l = path.len() - 1;
        for i in 1..=l {
            let w = unwound_sum(&path, i);
            phi[path[i].feature] += w * (path[i].one - path[i].zero) * tree.leaf_values[node];
        }
        return;
    }

    let d = tree.feature_idx[node] as usize;
    let (hot, cold) = if row[d] <= tree.threshold[node] {
        (tree.left[node] as usize, tree.right[node] as usize)
    } else {
        (tree.right[node] as usize, tree.left[node] as usize)
    };
    let mut incoming_zero = 1.0;
    let mut incoming_one = 1.0;
    let l = path.len() - 1;
    if let Some(k) = (1..=l).find(|&j| path[j].feature == d) {
        incoming_zero = path[k].zero;
        incoming_one = path[k].one;
        unwind(&mut path, k);
    }
    let cover = tree.covers[node];
    shap_recurse(
        tree,
        row,
        phi,
        hot,
        path.clone(),
        incoming_zero * tree.covers[hot] / cover,
        incoming_one,
        d,
    );
    shap_recurse(
        tree,
        row,
        phi,
        cold,
        path,
        incoming_zero * tree.covers[cold] / cover,
        0.0,
        d,
    );
}

/// One feature's global importance: mean |φ| over rows and classes.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureImportance {
    pub feature_index: usize,
    pub name: String,
    pub mean_abs_phi: f64,
}

/// Rank features by mean absolute attribution over a feature table.
///
/// Descending by importance; equal importances keep ascending feature
/// index, so the ranking is stable and independent of row order.
pub fn global_importance(
    model: &TreeEnsembleModel,
    table: &FeatureTable,
) -> Result<Vec<FeatureImportance>> {
    if table.n_rows() == 0 {
        return Err(CoreError::EmptyInput("importance table"));
    }
    if table.schema != model.schema {
        return Err(CoreError::SchemaMismatch(
            "feature table schema differs from model schema".into(),
        ));
    }
    ensure_coverage(model)?;
    let n_feat = model.schema.len();
    let per_row: Vec<Vec<f64>> = map_indexed(table.n_rows(), |i| {
        let exp = tree_shap(model, table.row(i), table.ids[i]).expect("schema checked");
        let mut acc = alloc::vec![0.0f64; n_feat];
        for class_phi in &exp.phi {
            for (a, p) in acc.iter_mut().zip(class_phi) {
                *a += p.abs();
            }
        }
        acc
    });
    let denom = (table.n_rows() * model.n_classes) as f64;
    let mut totals = alloc::vec![0.0f64; n_feat];
    for row in per_row {
        for (t, v) in totals.iter_mut().zip(row) {
            *t += v;
        }
    }
    let mut ranked: Vec<FeatureImportance> = totals
        .into_iter()
        .enumerate()
        .map(|(i, t)| FeatureImportance {
            feature_index: i,
            name: model.schema[i].clone(),
            mean_abs_phi: t / denom,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.mean_abs_phi
            .total_cmp(&a.mean_abs_phi)
            .then_with(|| a.feature_index.cmp(&b.feature_index))
    });
    Ok(ranked)
}

/// Signed contribution breakdown for one rater model and class.
#[derive(Clone, Debug, PartialEq)]
pub struct ContributionTable {
    pub rater_id: String,
    pub class: LayerClass,
    pub base: f64,
    pub margin: f64,
    /// Features pushing the margin up, sorted by |φ| descending.
    pub positive: Vec<(String, f64)>,
    /// Features pushing the margin down, sorted by |φ| descending.
    pub negative: Vec<(String, f64)>,
    /// Features with exactly zero attribution.
    pub zero: Vec<String>,
}

impl fmt::Display for ContributionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rater {} / class {}: margin {:.6} = base {:.6} + contributions",
            self.rater_id, self.class, self.margin, self.base
        )?;
        writeln!(f, "  increased:")?;
        for (name, phi) in &self.positive {
            writeln!(f, "    {name:<24} {phi:+.6}")?;
        }
        writeln!(f, "  decreased:")?;
        for (name, phi) in &self.negative {
            writeln!(f, "    {name:<24} {phi:+.6}")?;
        }
        writeln!(f, "  no contribution: {} features", self.zero.len())
    }
}

/// Full per-rater explanation of one ensemble prediction.
#[derive(Clone, Debug)]
pub struct PredictionExplanation {
    pub predicted: LayerClass,
    pub summed_probabilities: Vec<f64>,
    pub explanations: Vec<ShapExplanation>,
    /// One table per rater for the predicted class.
    pub tables: Vec<ContributionTable>,
}

/// Explain an ensemble prediction: per-rater attributions plus rendered
/// contribution tables for the fused predicted class.
pub fn explain_prediction(
    ensemble: &RaterEnsemble,
    row: &[f64],
    neuron_id: u64,
) -> Result<PredictionExplanation> {
    let (predicted, summed) = ensemble_predict(ensemble, row)?;
    let mut explanations = Vec::with_capacity(ensemble.models.len());
    let mut tables = Vec::with_capacity(ensemble.models.len());
    for model in &ensemble.models {
        let exp = tree_shap(model, row, neuron_id)?;
        tables.push(contribution_table(model, &exp, predicted)?);
        explanations.push(exp);
    }
    Ok(PredictionExplanation {
        predicted,
        summed_probabilities: summed,
        explanations,
        tables,
    })
}

fn contribution_table(
    model: &TreeEnsembleModel,
    exp: &ShapExplanation,
    class: LayerClass,
) -> Result<ContributionTable> {
    let c = class.ordinal();
    let phi = &exp.phi[c];
    let mut positive: Vec<(String, f64)> = Vec::new();
    let mut negative: Vec<(String, f64)> = Vec::new();
    let mut zero: Vec<String> = Vec::new();
    for (name, &p) in model.schema.iter().zip(phi.iter()) {
        if p > 0.0 {
            positive.push((name.clone(), p));
        } else if p < 0.0 {
            negative.push((name.clone(), p));
        } else {
            zero.push(name.clone());
        }
    }
    let by_magnitude =
        |a: &(String, f64), b: &(String, f64)| b.1.abs().total_cmp(&a.1.abs());
    positive.sort_by(by_magnitude);
    negative.sort_by(by_magnitude);
    Ok(ContributionTable {
        rater_id: exp.rater_id.clone(),
        class,
        base: exp.base[c],
        margin: exp.base[c] + phi.iter().sum::<f64>(),
        positive,
        negative,
        zero,
    })
}
