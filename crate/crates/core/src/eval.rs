//! Agreement, accuracy, confusion, and composition analyses.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::types::{LabelSet, LayerClass, NeuronRecord};

/// Fraction of commonly labeled ids assigned the same class.
pub fn agreement(a: &LabelSet, b: &LabelSet) -> Result<f64> {
    let mut common = 0usize;
    let mut same = 0usize;
    for (id, ca) in a.iter() {
        if let Some(cb) = b.get(id) {
            common += 1;
            if ca == cb {
                same += 1;
            }
        }
    }
    if common == 0 {
        return Err(CoreError::EmptyInput("no commonly labeled ids"));
    }
    Ok(same as f64 / common as f64)
}

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MeanStd {
        mean,
        std: var.sqrt(),
    }
}

/// Per-rater agreement of predictions on the test ids, summarized as
/// mean ± population std over raters.
pub fn accuracy_vs_raters(
    predictions: &LabelSet,
    raters: &[LabelSet],
    test_ids: &[u64],
) -> Result<(MeanStd, Vec<f64>)> {
    if raters.is_empty() {
        return Err(CoreError::EmptyInput("no raters"));
    }
    let mut per_rater = Vec::with_capacity(raters.len());
    for rater in raters {
        let mut common = 0usize;
        let mut same = 0usize;
        for &id in test_ids {
            let (Some(p), Some(r)) = (predictions.get(id), rater.get(id)) else {
                continue;
            };
            common += 1;
            if p == r {
                same += 1;
            }
        }
        if common == 0 {
            return Err(CoreError::EmptyInput("no test ids labeled by a rater"));
        }
        per_rater.push(same as f64 / common as f64);
    }
    Ok((mean_std(&per_rater), per_rater))
}

/// Class tally among the n largest labeled neurons by a feature.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionReport {
    pub n: usize,
    pub counts: [usize; LayerClass::COUNT],
    pub percentages: [f64; LayerClass::COUNT],
}

impl CompositionReport {
    /// Class with the largest share; count ties resolve to the lower
    /// ordinal.
    pub fn plurality(&self) -> LayerClass {
        let mut best = 0usize;
        for (i, &c) in self.counts.iter().enumerate().skip(1) {
            if c > self.counts[best] {
                best = i;
            }
        }
        LayerClass::from_ordinal(best).expect("7 classes")
    }
}

/// Tally classes among the n labeled neurons largest by `feature`
/// (descending, ties by ascending id).
pub fn top_n_composition(
    neurons: &[NeuronRecord],
    labels: &LabelSet,
    n: usize,
    feature: impl Fn(&NeuronRecord) -> f64,
) -> Result<CompositionReport> {
    let mut labeled: Vec<(&NeuronRecord, LayerClass)> = neurons
        .iter()
        .filter_map(|r| labels.get(r.id).map(|c| (r, c)))
        .collect();
    if n > labeled.len() {
        return Err(CoreError::InvalidConfig(alloc::format!(
            "requested top {n} of only {} labeled neurons",
            labeled.len()
        )));
    }
    labeled.sort_by(|a, b| {
        feature(b.0)
            .total_cmp(&feature(a.0))
            .then_with(|| a.0.id.cmp(&b.0.id))
    });
    let mut counts = [0usize; LayerClass::COUNT];
    for (_, class) in &labeled[..n] {
        counts[class.ordinal()] += 1;
    }
    let mut percentages = [0.0; LayerClass::COUNT];
    for (p, &c) in percentages.iter_mut().zip(counts.iter()) {
        *p = 100.0 * c as f64 / n as f64;
    }
    Ok(CompositionReport {
        n,
        counts,
        percentages,
    })
}

/// 7x7 confusion counts of `predicted` against `reference` over their
/// common ids; rows are reference classes.
pub fn confusion_matrix(
    reference: &LabelSet,
    predicted: &LabelSet,
) -> Result<[[u64; LayerClass::COUNT]; LayerClass::COUNT]> {
    let mut m = [[0u64; LayerClass::COUNT]; LayerClass::COUNT];
    let mut common = 0usize;
    for (id, r) in reference.iter() {
        if let Some(p) = predicted.get(id) {
            m[r.ordinal()][p.ordinal()] += 1;
            common += 1;
        }
    }
    if common == 0 {
        return Err(CoreError::EmptyInput("no commonly labeled ids"));
    }
    Ok(m)
}

/// Cohen's kappa from a confusion matrix.
pub fn cohen_kappa(m: &[[u64; LayerClass::COUNT]; LayerClass::COUNT]) -> f64 {
    let total: u64 = m.iter().flatten().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let po: f64 = (0..LayerClass::COUNT).map(|i| m[i][i] as f64).sum::<f64>() / t;
    let pe: f64 = (0..LayerClass::COUNT)
        .map(|i| {
            let row: u64 = m[i].iter().sum();
            let col: u64 = m.iter().map(|r| r[i]).sum();
            (row as f64 / t) * (col as f64 / t)
        })
        .sum();
    if (1.0 - pe).abs() < 1e-15 {
        return 1.0;
    }
    (po - pe) / (1.0 - pe)
}

/// Per-class precision, recall, and F1 of predictions vs a reference.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassScores {
    pub precision: [f64; LayerClass::COUNT],
    pub recall: [f64; LayerClass::COUNT],
    pub f1: [f64; LayerClass::COUNT],
    pub support: [u64; LayerClass::COUNT],
}

pub fn class_scores(m: &[[u64; LayerClass::COUNT]; LayerClass::COUNT]) -> ClassScores {
    let mut s = ClassScores {
        precision: [0.0; LayerClass::COUNT],
        recall: [0.0; LayerClass::COUNT],
        f1: [0.0; LayerClass::COUNT],
        support: [0; LayerClass::COUNT],
    };
    for c in 0..LayerClass::COUNT {
        let tp = m[c][c] as f64;
        let row: u64 = m[c].iter().sum();
        let col: u64 = m.iter().map(|r| r[c]).sum();
        s.support[c] = row;
        s.precision[c] = if col > 0 { tp / col as f64 } else { 0.0 };
        s.recall[c] = if row > 0 { tp / row as f64 } else { 0.0 };
        s.f1[c] = if s.precision[c] + s.recall[c] > 0.0 {
            2.0 * s.precision[c] * s.recall[c] / (s.precision[c] + s.recall[c])
        } else {
            0.0
        };
    }
    s
}

/// Pairwise agreement over label sources, with confusion and per-class
/// scores of every other source against the first (the reference).
#[derive(Clone, Debug)]
pub struct AgreementReport {
    pub sources: Vec<String>,
    /// Symmetric pairwise fraction-agree matrix; diagonal is 1.
    pub pairwise: Vec<Vec<f64>>,
    /// Mean ± population std over distinct source pairs.
    pub over_pairs: MeanStd,
    /// Cohen's kappa per distinct pair, same order as the mean.
    pub kappa_over_pairs: Vec<f64>,
    /// Confusion of each non-reference source vs the reference.
    pub confusion_vs_reference: Vec<[[u64; LayerClass::COUNT]; LayerClass::COUNT]>,
    pub scores_vs_reference: Vec<ClassScores>,
}

/// Build the full report. `sources[0]` acts as the reference for the
/// confusion matrices and per-class scores.
pub fn agreement_report(sources: &[LabelSet]) -> Result<AgreementReport> {
    if sources.len() < 2 {
        return Err(CoreError::EmptyInput("need at least two label sources"));
    }
    let n = sources.len();
    let mut pairwise = alloc::vec![alloc::vec![1.0f64; n]; n];
    let mut flat = Vec::new();
    let mut kappas = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let a = agreement(&sources[i], &sources[j])?;
            pairwise[i][j] = a;
            pairwise[j][i] = a;
            flat.push(a);
            kappas.push(cohen_kappa(&confusion_matrix(&sources[i], &sources[j])?));
        }
    }
    let mut confusion = Vec::new();
    let mut scores = Vec::new();
    for other in &sources[1..] {
        let m = confusion_matrix(&sources[0], other)?;
        scores.push(class_scores(&m));
        confusion.push(m);
    }
    Ok(AgreementReport {
        sources: sources.iter().map(|s| s.rater_id.clone()).collect(),
        pairwise,
        over_pairs: mean_std(&flat),
        kappa_over_pairs: kappas,
        confusion_vs_reference: confusion,
        scores_vs_reference: scores,
    })
}
