//! Pipeline subcommands. Each command reads and writes only its
//! documented files, never mutates inputs, and is byte-reproducible for a
//! fixed seed.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use cortolam_core::attribution::{explain_prediction, global_importance, tree_shap};
use cortolam_core::eval::{
    accuracy_vs_raters, agreement_report, top_n_composition, CompositionReport,
};
use cortolam_core::features::assemble_features;
use cortolam_core::model::{ensemble_predict, split_train_test, train, RaterEnsemble};
use cortolam_core::regions::{apply_to_table, derive_regions, otsu_thresholds, OTSU_BINS};
use cortolam_core::spatial::SpatialIndex;
use cortolam_core::synth::generate;
use cortolam_core::types::{FeatureTable, LabelSet, LayerClass, NeuronRecord};

use crate::config::{seeds, sub_seed, PipelineConfig};
use crate::data;
use crate::plot::{render_layer_map, Coloring, Panel};

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

/// Generate a synthetic section: neurons, ground truth, and one label
/// file per simulated rater, plus generation metadata.
pub fn cmd_synth(out_dir: &Path, cfg: &PipelineConfig) -> Result<()> {
    ensure_dir(out_dir)?;
    let synth_cfg = cfg.synth_config();
    let section = generate(&synth_cfg).context("generating synthetic section")?;
    data::write_neurons(&section.neurons, &out_dir.join("neurons.csv"))?;
    data::write_labels(
        &section.truth.to_label_set("truth"),
        &out_dir.join("truth.csv"),
    )?;

    let (amplitude, achieved) = if cfg.synth.rater_disagreement_um >= 0.0 {
        (cfg.synth.rater_disagreement_um, f64::NAN)
    } else {
        section.calibrate_disagreement(
            cfg.synth.target_agreement,
            sub_seed(cfg.seed, seeds::CALIBRATE),
        )
    };
    for r in 0..cfg.synth.raters {
        let rater_id = format!("rater{}", r + 1);
        let labels = section.rater_labels(
            &rater_id,
            amplitude,
            sub_seed(cfg.seed, seeds::RATER_BASE + r as u64),
        );
        data::write_labels(&labels, &out_dir.join(format!("labels_{rater_id}.csv")))?;
    }

    #[derive(Serialize)]
    struct SynthMeta {
        seed: u64,
        neurons: usize,
        raters: usize,
        disagreement_amplitude_um: f64,
        calibration_agreement: Option<f64>,
    }
    let meta = SynthMeta {
        seed: cfg.seed,
        neurons: section.neurons.len(),
        raters: cfg.synth.raters,
        disagreement_amplitude_um: amplitude,
        calibration_agreement: if achieved.is_nan() { None } else { Some(achieved) },
    };
    write_json(&meta, &out_dir.join("synth_meta.json"))?;
    println!(
        "synth: {} neurons, {} raters, disagreement amplitude {:.1} um",
        section.neurons.len(),
        cfg.synth.raters,
        amplitude
    );
    Ok(())
}

/// Compute the full fixed-schema feature table (region block included)
/// and its schema sidecar.
pub fn cmd_features(
    neurons_path: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    resolution: Option<f64>,
) -> Result<()> {
    ensure_dir(out_dir)?;
    let neurons = data::load_neurons(neurons_path, resolution)
        .with_context(|| format!("loading {}", neurons_path.display()))?;
    println!("features: loaded {} neurons", neurons.len());
    let table = build_feature_table(&neurons, cfg)?;
    data::write_feature_table(&table, &out_dir.join("features.csv"))?;
    data::write_schema_json(&table.schema, &out_dir.join("features_schema.json"))?;
    println!(
        "features: wrote {} rows x {} columns",
        table.n_rows(),
        table.n_cols()
    );
    Ok(())
}

/// Shared features+regions computation.
pub fn build_feature_table(neurons: &[NeuronRecord], cfg: &PipelineConfig) -> Result<FeatureTable> {
    let feature_cfg = cfg.feature_config()?;
    let index = SpatialIndex::build(neurons).context("building spatial index")?;
    let mut table =
        assemble_features(neurons, &index, &feature_cfg).context("assembling features")?;
    match derive_regions(neurons, &table, &cfg.region_config()) {
        Ok(tags) => apply_to_table(&tags, &mut table).context("filling region block")?,
        Err(e) => bail!("region block unavailable: {e}"),
    }
    Ok(table)
}

/// Derive region tags from an existing feature table and write the region
/// CSV plus a summary with the soma-size split.
pub fn cmd_regions(
    neurons_path: &Path,
    features_path: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
) -> Result<()> {
    ensure_dir(out_dir)?;
    let neurons = data::load_neurons(neurons_path, None)
        .with_context(|| format!("loading {}", neurons_path.display()))?;
    let table = data::read_feature_table(features_path)
        .with_context(|| format!("loading {}", features_path.display()))?;
    let tags = derive_regions(&neurons, &table, &cfg.region_config())
        .context("deriving region tags")?;
    let ids: Vec<u64> = neurons.iter().map(|n| n.id).collect();
    data::write_regions(&ids, &tags, &out_dir.join("regions.csv"))?;

    // Soma-size split of the section (two populations by area).
    let areas: Vec<f64> = neurons.iter().map(|n| n.area_um2).collect();
    let size_split = otsu_thresholds(&areas, 2, OTSU_BINS).context("splitting soma sizes")?;
    let threshold = size_split.thresholds[0];
    let larger = areas.iter().filter(|&&a| a >= threshold).count();

    #[derive(Serialize)]
    struct RegionSummary {
        sparse: usize,
        average: usize,
        dense: usize,
        layer_i: usize,
        white_matter: usize,
        sparse_split_degenerate: bool,
        soma_area_threshold_um2: f64,
        larger_somata: usize,
        smaller_somata: usize,
    }
    use cortolam_core::regions::{Population, SparseKind};
    let count_pop = |p: Population| tags.tags.iter().filter(|t| t.population == p).count();
    let count_kind = |k: SparseKind| tags.tags.iter().filter(|t| t.sparse_kind == k).count();
    let summary = RegionSummary {
        sparse: count_pop(Population::Sparse),
        average: count_pop(Population::Average),
        dense: count_pop(Population::Dense),
        layer_i: count_kind(SparseKind::LayerI),
        white_matter: count_kind(SparseKind::WhiteMatter),
        sparse_split_degenerate: tags.sparse_split_degenerate,
        soma_area_threshold_um2: threshold,
        larger_somata: larger,
        smaller_somata: areas.len() - larger,
    };
    write_json(&summary, &out_dir.join("regions_summary.json"))?;
    println!(
        "regions: sparse {} / average {} / dense {}; layer_I {}, white_matter {}; soma-size threshold {:.1} um2 ({} larger / {} smaller)",
        summary.sparse,
        summary.average,
        summary.dense,
        summary.layer_i,
        summary.white_matter,
        threshold,
        larger,
        areas.len() - larger
    );
    Ok(())
}

/// Train one model per rater label file and write the fused ensemble plus
/// the train/test split.
pub fn cmd_train(
    features_path: &Path,
    label_paths: &[PathBuf],
    out_dir: &Path,
    cfg: &PipelineConfig,
) -> Result<()> {
    if label_paths.is_empty() {
        bail!("at least one rater label file is required");
    }
    ensure_dir(out_dir)?;
    let table = data::read_feature_table(features_path)
        .with_context(|| format!("loading {}", features_path.display()))?;
    let table_ids: BTreeSet<u64> = table.ids.iter().copied().collect();

    let mut raters = Vec::new();
    for path in label_paths {
        let rater_id = rater_id_from_path(path);
        let labels = load_labels_against_table(path, &rater_id, &table_ids)?;
        raters.push(labels);
    }

    // One split, stratified by the first rater's classes.
    let split_seed = sub_seed(cfg.seed, seeds::SPLIT);
    let split = split_train_test(&raters[0], cfg.split.fraction, split_seed)
        .context("splitting train/test ids")?;
    if !split.unstratified.is_empty() {
        eprintln!(
            "warning: classes {:?} had fewer than 2 members and were not stratified",
            split.unstratified.iter().map(|c| c.token()).collect::<Vec<_>>()
        );
    }
    data::write_split(
        &split,
        split_seed,
        cfg.split.fraction,
        &raters[0].rater_id,
        &out_dir.join("split.json"),
    )?;
    let train_ids: BTreeSet<u64> = split.train_ids.iter().copied().collect();

    let train_cfg = cfg.train_config();
    let mut models = Vec::new();
    for rater in &raters {
        let subset = LabelSet::from_pairs(
            rater.rater_id.clone(),
            rater.iter().filter(|(id, _)| train_ids.contains(id)),
        );
        let out = train(&table, &subset, &train_cfg, &rater.rater_id)
            .with_context(|| format!("training model for {}", rater.rater_id))?;
        println!(
            "train: {} on {} rows, loss {:.4} -> {:.4} over {} rounds",
            rater.rater_id,
            subset.len(),
            out.train_loss.first().unwrap(),
            out.train_loss.last().unwrap(),
            train_cfg.rounds
        );
        data::save_model(&out.model, &out_dir.join(format!("model_{}.json", rater.rater_id)))?;
        write_json(
            &out.train_loss,
            &out_dir.join(format!("train_loss_{}.json", rater.rater_id)),
        )?;
        models.push(out.model);
    }
    data::save_ensemble(&RaterEnsemble::new(models), &out_dir.join("ensemble.json"))?;
    println!(
        "train: wrote ensemble of {} models ({} train / {} test ids)",
        raters.len(),
        split.train_ids.len(),
        split.test_ids.len()
    );
    Ok(())
}

fn rater_id_from_path(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("rater");
    stem.strip_prefix("labels_").unwrap_or(stem).to_string()
}

fn load_labels_against_table(
    path: &Path,
    rater_id: &str,
    table_ids: &BTreeSet<u64>,
) -> Result<LabelSet> {
    // Reuse the CSV reader by synthesizing a minimal neuron list is
    // wasteful; parse directly and validate ids against the table.
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("loading {}", path.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let id_col = headers
        .iter()
        .position(|h| h == "neuron_id")
        .ok_or_else(|| anyhow::anyhow!("{}: missing column neuron_id", path.display()))?;
    let layer_col = headers
        .iter()
        .position(|h| h == "layer")
        .ok_or_else(|| anyhow::anyhow!("{}: missing column layer", path.display()))?;
    let mut labels = LabelSet::new(rater_id);
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let id: u64 = row
            .get(id_col)
            .unwrap_or("")
            .trim()
            .parse()
            .with_context(|| format!("{}: row {}: bad neuron_id", path.display(), i + 1))?;
        let token = row.get(layer_col).unwrap_or("").trim();
        let class = LayerClass::parse_token(token).ok_or_else(|| {
            anyhow::anyhow!("{}: row {}: unknown layer token `{token}`", path.display(), i + 1)
        })?;
        if !table_ids.contains(&id) {
            bail!("{}: label references id {id} with no feature row", path.display());
        }
        labels.insert(id, class);
    }
    Ok(labels)
}

/// Predict every row of a feature table with a stored ensemble.
pub fn cmd_predict(features_path: &Path, model_path: &Path, out_path: &Path) -> Result<()> {
    let ensemble = data::load_ensemble(model_path)?;
    let table = data::read_feature_table(features_path)
        .with_context(|| format!("loading {}", features_path.display()))?;
    let mut classes = Vec::with_capacity(table.n_rows());
    let mut probs = Vec::with_capacity(table.n_rows());
    for i in 0..table.n_rows() {
        let (class, summed) =
            ensemble_predict(&ensemble, table.row(i)).context("predicting")?;
        classes.push(class);
        probs.push(summed);
    }
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    data::write_predictions(&table.ids, &classes, &probs, out_path)?;
    println!("predict: wrote {} predictions", table.n_rows());
    Ok(())
}

/// Per-neuron SHAP explanations and global importance rankings.
pub fn cmd_explain(
    features_path: &Path,
    model_path: &Path,
    out_dir: &Path,
    ids: &[u64],
    limit: usize,
    importance_rows: usize,
) -> Result<()> {
    ensure_dir(out_dir)?;
    let ensemble = data::load_ensemble(model_path)?;
    let table = data::read_feature_table(features_path)
        .with_context(|| format!("loading {}", features_path.display()))?;

    let rows: Vec<usize> = if ids.is_empty() {
        (0..table.n_rows().min(limit)).collect()
    } else {
        ids.iter()
            .map(|&id| table.row_of(id).map_err(anyhow::Error::from))
            .collect::<Result<_>>()?
    };

    // Explanations CSV: one row per (neuron, rater, class).
    let path = out_dir.join("explanations.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["id".to_string(), "rater".to_string(), "class".to_string(), "base".to_string()];
    header.extend(table.schema.iter().map(|c| format!("phi_{c}")));
    w.write_record(&header)?;
    for &row in &rows {
        let id = table.ids[row];
        for model in &ensemble.models {
            let exp = tree_shap(model, table.row(row), id).context("attribution")?;
            for class in LayerClass::ALL {
                let c = class.ordinal();
                let mut record = vec![
                    id.to_string(),
                    model.rater_id.clone(),
                    class.token().to_string(),
                    format!("{}", exp.base[c]),
                ];
                record.extend(exp.phi[c].iter().map(|p| format!("{p}")));
                w.write_record(&record)?;
            }
        }
    }
    w.flush()?;

    // Rendered contribution tables for explicitly requested neurons.
    if !ids.is_empty() {
        for &id in ids {
            let row = table.row_of(id)?;
            let explained = explain_prediction(&ensemble, table.row(row), id)
                .context("explaining prediction")?;
            println!(
                "neuron {id}: predicted {} (summed probabilities {:?})",
                explained.predicted,
                explained
                    .summed_probabilities
                    .iter()
                    .map(|p| (p * 1000.0).round() / 1000.0)
                    .collect::<Vec<_>>()
            );
            for tab in &explained.tables {
                println!("{tab}");
            }
        }
    }

    // Global importance per rater model plus the mean over raters.
    let sample = sample_rows(&table, importance_rows);
    #[derive(Serialize)]
    struct ImportanceFile {
        rows_used: usize,
        per_rater: Vec<RaterImportance>,
        mean_over_raters: Vec<(String, f64)>,
    }
    #[derive(Serialize)]
    struct RaterImportance {
        rater_id: String,
        ranking: Vec<(String, f64)>,
    }
    let mut per_rater = Vec::new();
    let mut mean = vec![0.0f64; table.n_cols()];
    for model in &ensemble.models {
        let ranked = global_importance(model, &sample).context("global importance")?;
        for fi in &ranked {
            mean[fi.feature_index] += fi.mean_abs_phi / ensemble.models.len() as f64;
        }
        per_rater.push(RaterImportance {
            rater_id: model.rater_id.clone(),
            ranking: ranked
                .into_iter()
                .map(|fi| (fi.name, fi.mean_abs_phi))
                .collect(),
        });
    }
    let mut mean_ranked: Vec<(String, f64)> = table
        .schema
        .iter()
        .cloned()
        .zip(mean)
        .collect();
    mean_ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let file = ImportanceFile {
        rows_used: sample.n_rows(),
        per_rater,
        mean_over_raters: mean_ranked,
    };
    write_json(&file, &out_dir.join("importance.json"))?;
    println!(
        "explain: wrote {} explanation rows and importance over {} rows",
        rows.len(),
        sample.n_rows()
    );
    Ok(())
}

fn sample_rows(table: &FeatureTable, n: usize) -> FeatureTable {
    let step = (table.n_rows() / n.max(1)).max(1);
    let mut out = FeatureTable::new(table.schema.clone());
    for i in (0..table.n_rows()).step_by(step).take(n) {
        out.push_row(table.ids[i], table.row(i).to_vec(), table.flags[i]);
    }
    out
}

/// Agreement, accuracy, and composition report.
#[allow(clippy::too_many_arguments)]
pub fn cmd_eval(
    predictions_path: &Path,
    split_path: &Path,
    label_paths: &[PathBuf],
    truth_path: Option<&Path>,
    neurons_path: &Path,
    out_dir: &Path,
    top_n: usize,
) -> Result<()> {
    ensure_dir(out_dir)?;
    let neurons = data::load_neurons(neurons_path, None)
        .with_context(|| format!("loading {}", neurons_path.display()))?;
    let predictions = data::read_predictions(predictions_path, "model")?;
    let split = data::read_split(split_path)?;
    let mut raters = Vec::new();
    for path in label_paths {
        let rater_id = rater_id_from_path(path);
        raters.push(data::load_labels(path, &rater_id, &neurons)?);
    }
    if raters.is_empty() {
        bail!("at least one rater label file is required");
    }
    let truth = truth_path
        .map(|p| data::load_labels(p, "truth", &neurons))
        .transpose()?;

    // Test-set predictions only, for accuracy metrics.
    let test_ids: Vec<u64> = split.test_ids.clone();
    let (vs_raters, per_rater) = accuracy_vs_raters(&predictions, &raters, &test_ids)
        .context("computing accuracy vs raters")?;
    let vs_truth = truth
        .as_ref()
        .map(|t| {
            let test_pred = LabelSet::from_pairs(
                "model",
                test_ids.iter().filter_map(|&id| predictions.get(id).map(|c| (id, c))),
            );
            cortolam_core::eval::agreement(&test_pred, t)
        })
        .transpose()
        .context("computing accuracy vs truth")?;

    // Pairwise agreement over sources: predictions first (the reference),
    // then raters, then truth when present.
    let mut sources = vec![predictions.clone()];
    sources.extend(raters.iter().cloned());
    if let Some(t) = &truth {
        sources.push(t.clone());
    }
    let report = agreement_report(&sources).context("building agreement report")?;

    // Mutual agreement over rater pairs only.
    let mut rater_pairs = Vec::new();
    for i in 0..raters.len() {
        for j in i + 1..raters.len() {
            rater_pairs.push(cortolam_core::eval::agreement(&raters[i], &raters[j])?);
        }
    }

    let composition_labels = truth.as_ref().unwrap_or(&raters[0]);
    let n = top_n.min(composition_labels.len());
    let composition = top_n_composition(&neurons, composition_labels, n, |r| r.area_um2)
        .context("top-n composition")?;

    #[derive(Serialize)]
    struct EvalFile {
        test_ids: usize,
        accuracy_vs_truth: Option<f64>,
        accuracy_vs_raters_mean: f64,
        accuracy_vs_raters_std: f64,
        accuracy_per_rater: Vec<f64>,
        rater_pairwise_agreement: Vec<f64>,
        sources: Vec<String>,
        pairwise_agreement: Vec<Vec<f64>>,
        pairwise_kappa: Vec<f64>,
        composition_top_n: usize,
        composition_counts: Vec<usize>,
        composition_percentages: Vec<f64>,
        composition_plurality: String,
    }
    let file = EvalFile {
        test_ids: test_ids.len(),
        accuracy_vs_truth: vs_truth,
        accuracy_vs_raters_mean: vs_raters.mean,
        accuracy_vs_raters_std: vs_raters.std,
        accuracy_per_rater: per_rater.clone(),
        rater_pairwise_agreement: rater_pairs.clone(),
        sources: report.sources.clone(),
        pairwise_agreement: report.pairwise.clone(),
        pairwise_kappa: report.kappa_over_pairs.clone(),
        composition_top_n: composition.n,
        composition_counts: composition.counts.to_vec(),
        composition_percentages: composition.percentages.to_vec(),
        composition_plurality: composition.plurality().token().to_string(),
    };
    write_json(&file, &out_dir.join("eval.json"))?;
    write_eval_text(&file, &report.sources, &composition, &out_dir.join("eval.txt"))?;
    println!(
        "eval: accuracy vs raters {:.4} ± {:.4}{}; top-{} plurality {}",
        vs_raters.mean,
        vs_raters.std,
        vs_truth
            .map(|v| format!(", vs truth {v:.4}"))
            .unwrap_or_default(),
        composition.n,
        composition.plurality()
    );
    Ok(())
}

fn write_eval_text(
    file: &impl Serialize,
    _sources: &[String],
    composition: &CompositionReport,
    path: &Path,
) -> Result<()> {
    let value = serde_json::to_value(file).map_err(|e| anyhow::anyhow!(e))?;
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "evaluation summary")?;
    writeln!(f, "==================")?;
    let get = |k: &str| value.get(k).cloned().unwrap_or(serde_json::Value::Null);
    writeln!(f, "test ids:               {}", get("test_ids"))?;
    if let Some(v) = get("accuracy_vs_truth").as_f64() {
        writeln!(f, "accuracy vs truth:      {v:.4}")?;
    }
    writeln!(
        f,
        "accuracy vs raters:     {:.4} ± {:.4}",
        get("accuracy_vs_raters_mean").as_f64().unwrap_or(f64::NAN),
        get("accuracy_vs_raters_std").as_f64().unwrap_or(f64::NAN)
    )?;
    writeln!(f, "rater pairwise:         {}", get("rater_pairwise_agreement"))?;
    writeln!(f)?;
    writeln!(f, "largest {} neurons by soma area:", composition.n)?;
    for class in LayerClass::ALL {
        let c = class.ordinal();
        if composition.counts[c] > 0 {
            writeln!(
                f,
                "  {:>3}: {:5} ({:.1}%)",
                class.token(),
                composition.counts[c],
                composition.percentages[c]
            )?;
        }
    }
    Ok(())
}

/// Render an SVG layer map from one or more label files, or from a
/// continuous feature column.
pub fn cmd_plot(
    neurons_path: &Path,
    label_paths: &[PathBuf],
    features_path: Option<&Path>,
    column: Option<&str>,
    out_path: &Path,
) -> Result<()> {
    let neurons = data::load_neurons(neurons_path, None)
        .with_context(|| format!("loading {}", neurons_path.display()))?;

    let mut label_sets = Vec::new();
    for path in label_paths {
        let rater_id = rater_id_from_path(path);
        // Accept either a labels CSV or a predictions CSV.
        let labels = match data::load_labels(path, &rater_id, &neurons) {
            Ok(l) => l,
            Err(data::DataError::MissingColumn(_)) => data::read_predictions(path, &rater_id)?,
            Err(e) => return Err(e.into()),
        };
        label_sets.push((rater_id, labels));
    }

    let values: Option<Vec<f64>> = match (features_path, column) {
        (Some(fp), Some(col)) => {
            let table = data::read_feature_table(fp)?;
            let idx = table
                .column_index(col)
                .ok_or_else(|| anyhow::anyhow!("feature column `{col}` not found"))?;
            let mut by_id: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
            for i in 0..table.n_rows() {
                by_id.insert(table.ids[i], table.get(i, idx));
            }
            Some(
                neurons
                    .iter()
                    .map(|n| {
                        by_id
                            .get(&n.id)
                            .copied()
                            .ok_or_else(|| anyhow::anyhow!("no feature row for id {}", n.id))
                    })
                    .collect::<Result<_>>()?,
            )
        }
        (None, None) => None,
        _ => bail!("--features and --column must be given together"),
    };
    if label_sets.is_empty() && values.is_none() {
        bail!("nothing to plot: give --labels files or --features with --column");
    }

    let mut panels = Vec::new();
    for (rater_id, labels) in &label_sets {
        panels.push(Panel {
            title: rater_id.clone(),
            coloring: Coloring::Classes(labels),
        });
    }
    if let Some(vals) = &values {
        panels.push(Panel {
            title: column.unwrap_or("value").to_string(),
            coloring: Coloring::Values(vals),
        });
    }
    let svg = render_layer_map(&neurons, &panels);
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    std::fs::write(out_path, svg)?;
    println!("plot: wrote {} ({} panels)", out_path.display(), panels.len());
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| anyhow::anyhow!(e))?;
    f.write_all(b"\n")?;
    Ok(())
}
