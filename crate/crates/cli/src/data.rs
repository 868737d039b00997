//! CSV and JSON interchange.
//!
//! Neurons and labels arrive as CSV with fixed headers; the pipeline
//! writes feature tables, region tags, predictions, splits, and versioned
//! model files. Floating-point values are serialized in Rust's shortest
//! round-trip form, so every table reloads to bit-identical values and
//! repeated runs produce byte-identical files.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use cortolam_core::model::{RaterEnsemble, TreeEnsembleModel, TrainTestSplit};
use cortolam_core::regions::RegionTags;
use cortolam_core::types::{FeatureTable, LabelSet, LayerClass, NeuronRecord};
use cortolam_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("schema error: missing required column `{0}`")]
    MissingColumn(String),
    #[error("{path}: row {row}: {message}")]
    Row {
        path: String,
        row: usize,
        message: String,
    },
    #[error("duplicate neuron id {0}")]
    DuplicateId(u64),
    #[error("unknown layer token `{token}` (row {row})")]
    UnknownToken { token: String, row: usize },
    #[error("label references unknown neuron id {0}")]
    UnknownNeuron(u64),
    #[error("model not found: {0}")]
    ModelNotFound(String),
    #[error("malformed model file: {0}")]
    MalformedModel(String),
    #[error(
        "model file version {found} unsupported (expected {expected})"
    )]
    ModelVersion { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, DataError>;

/// Required neuron CSV columns, in canonical order.
pub const NEURON_COLUMNS: [&str; 7] = [
    "id",
    "x_um",
    "y_um",
    "area_um2",
    "perimeter_um",
    "circularity",
    "roundness",
];
/// Optional trailing gray-level columns.
pub const GRAY_COLUMNS: [&str; 2] = ["gray_mean", "gray_median"];

fn fmt_f64(v: f64) -> String {
    // Shortest representation that parses back to the same f64.
    format!("{v}")
}

fn parse_f64(s: &str, path: &str, row: usize, col: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| DataError::Row {
        path: path.into(),
        row,
        message: format!("column `{col}`: cannot parse `{s}` as a number"),
    })
}

/// Load a neuron table.
///
/// With `resolution_um_per_px` set, coordinates are taken as pixels and
/// multiplied by the resolution; otherwise they are micrometers already.
pub fn load_neurons(path: &Path, resolution_um_per_px: Option<f64>) -> Result<Vec<NeuronRecord>> {
    if let Some(r) = resolution_um_per_px {
        if !(r > 0.0) {
            return Err(DataError::Row {
                path: path.display().to_string(),
                row: 0,
                message: "resolution must be positive".into(),
            });
        }
    }
    let pathstr = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.into()))
    };
    let idx: Vec<usize> = NEURON_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let gray_idx: Vec<Option<usize>> = GRAY_COLUMNS
        .iter()
        .map(|c| headers.iter().position(|h| h == c))
        .collect();

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let rownum = i + 1;
        let field = |j: usize| row.get(j).unwrap_or("");
        let id: u64 = field(idx[0]).trim().parse().map_err(|_| DataError::Row {
            path: pathstr.clone(),
            row: rownum,
            message: format!("column `id`: cannot parse `{}`", field(idx[0])),
        })?;
        if !seen.insert(id) {
            return Err(DataError::DuplicateId(id));
        }
        let scale = resolution_um_per_px.unwrap_or(1.0);
        let gray = |j: Option<usize>, name: &str| -> Result<Option<f64>> {
            match j {
                Some(j) if !field(j).trim().is_empty() => {
                    Ok(Some(parse_f64(field(j), &pathstr, rownum, name)?))
                }
                _ => Ok(None),
            }
        };
        let record = NeuronRecord {
            id,
            x_um: parse_f64(field(idx[1]), &pathstr, rownum, "x_um")? * scale,
            y_um: parse_f64(field(idx[2]), &pathstr, rownum, "y_um")? * scale,
            area_um2: parse_f64(field(idx[3]), &pathstr, rownum, "area_um2")?,
            perimeter_um: parse_f64(field(idx[4]), &pathstr, rownum, "perimeter_um")?,
            circularity: parse_f64(field(idx[5]), &pathstr, rownum, "circularity")?,
            roundness: parse_f64(field(idx[6]), &pathstr, rownum, "roundness")?,
            gray_mean: gray(gray_idx[0], "gray_mean")?,
            gray_median: gray(gray_idx[1], "gray_median")?,
        };
        record.validate().map_err(|e| DataError::Row {
            path: pathstr.clone(),
            row: rownum,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Write a neuron table with the canonical header.
pub fn write_neurons(records: &[NeuronRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<&str> = NEURON_COLUMNS.iter().chain(GRAY_COLUMNS.iter()).copied().collect();
    w.write_record(&header)?;
    for r in records {
        w.write_record(&[
            r.id.to_string(),
            fmt_f64(r.x_um),
            fmt_f64(r.y_um),
            fmt_f64(r.area_um2),
            fmt_f64(r.perimeter_um),
            fmt_f64(r.circularity),
            fmt_f64(r.roundness),
            r.gray_mean.map(fmt_f64).unwrap_or_default(),
            r.gray_median.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Load per-rater labels (`neuron_id,layer`), validating every id against
/// the neuron collection. Unlabeled neurons are permitted.
pub fn load_labels(path: &Path, rater_id: &str, neurons: &[NeuronRecord]) -> Result<LabelSet> {
    let known: BTreeSet<u64> = neurons.iter().map(|n| n.id).collect();
    let pathstr = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let id_col = headers
        .iter()
        .position(|h| h == "neuron_id")
        .ok_or_else(|| DataError::MissingColumn("neuron_id".into()))?;
    let layer_col = headers
        .iter()
        .position(|h| h == "layer")
        .ok_or_else(|| DataError::MissingColumn("layer".into()))?;

    let mut labels = LabelSet::new(rater_id);
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let rownum = i + 1;
        let id: u64 = row
            .get(id_col)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| DataError::Row {
                path: pathstr.clone(),
                row: rownum,
                message: format!("cannot parse neuron_id `{}`", row.get(id_col).unwrap_or("")),
            })?;
        let token = row.get(layer_col).unwrap_or("").trim();
        let class = LayerClass::parse_token(token).ok_or_else(|| DataError::UnknownToken {
            token: token.into(),
            row: rownum,
        })?;
        if !known.contains(&id) {
            return Err(DataError::UnknownNeuron(id));
        }
        labels.insert(id, class);
    }
    Ok(labels)
}

/// Write labels sorted by neuron id.
pub fn write_labels(labels: &LabelSet, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["neuron_id", "layer"])?;
    for (id, class) in labels.iter() {
        w.write_record(&[id.to_string(), class.token().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Write a feature table: `id` column then the schema columns in order.
pub fn write_feature_table(table: &FeatureTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["id".to_string()];
    header.extend(table.schema.iter().cloned());
    w.write_record(&header)?;
    for i in 0..table.n_rows() {
        let mut record = vec![table.ids[i].to_string()];
        record.extend(table.row(i).iter().map(|&v| fmt_f64(v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reload a feature table; status flags are not serialized and read as 0.
pub fn read_feature_table(path: &Path) -> Result<FeatureTable> {
    let pathstr = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    if headers.first().map(String::as_str) != Some("id") {
        return Err(DataError::MissingColumn("id".into()));
    }
    let schema: Vec<String> = headers[1..].to_vec();
    let mut table = FeatureTable::new(schema);
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let rownum = i + 1;
        let id: u64 = row.get(0).unwrap_or("").parse().map_err(|_| DataError::Row {
            path: pathstr.clone(),
            row: rownum,
            message: format!("cannot parse id `{}`", row.get(0).unwrap_or("")),
        })?;
        let mut values = Vec::with_capacity(table.n_cols());
        for (j, name) in table.schema.iter().enumerate() {
            values.push(parse_f64(row.get(j + 1).unwrap_or(""), &pathstr, rownum, name)?);
        }
        table.push_row(id, values, 0);
    }
    Ok(table)
}

/// Write the schema sidecar: a JSON list of column names.
pub fn write_schema_json(schema: &[String], path: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, schema).map_err(io_json)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Write the region tag table.
pub fn write_regions(ids: &[u64], tags: &RegionTags, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "id",
        "population",
        "sparse_kind",
        "depth_um",
        "thickness_um",
        "depth_norm",
        "dist_to_dense_um",
    ])?;
    for (id, tag) in ids.iter().zip(tags.tags.iter()) {
        w.write_record(&[
            id.to_string(),
            tag.population.token().to_string(),
            tag.sparse_kind.token().to_string(),
            fmt_f64(tag.depth_um),
            fmt_f64(tag.thickness_um),
            fmt_f64(tag.depth_norm),
            fmt_f64(tag.dist_to_dense_um),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write ensemble predictions: class plus the summed probability vector.
pub fn write_predictions(
    ids: &[u64],
    classes: &[LayerClass],
    summed: &[Vec<f64>],
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["id".to_string(), "layer".to_string()];
    header.extend(LayerClass::ALL.iter().map(|c| format!("p_{c}")));
    w.write_record(&header)?;
    for ((id, class), probs) in ids.iter().zip(classes).zip(summed) {
        let mut record = vec![id.to_string(), class.token().to_string()];
        record.extend(probs.iter().map(|&p| fmt_f64(p)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read predictions back as a label set.
pub fn read_predictions(path: &Path, source_id: &str) -> Result<LabelSet> {
    let pathstr = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    let id_col = headers
        .iter()
        .position(|h| h == "id")
        .ok_or_else(|| DataError::MissingColumn("id".into()))?;
    let layer_col = headers
        .iter()
        .position(|h| h == "layer")
        .ok_or_else(|| DataError::MissingColumn("layer".into()))?;
    let mut labels = LabelSet::new(source_id);
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let rownum = i + 1;
        let id: u64 = row.get(id_col).unwrap_or("").parse().map_err(|_| DataError::Row {
            path: pathstr.clone(),
            row: rownum,
            message: "cannot parse id".into(),
        })?;
        let token = row.get(layer_col).unwrap_or("");
        let class = LayerClass::parse_token(token).ok_or_else(|| DataError::UnknownToken {
            token: token.into(),
            row: rownum,
        })?;
        labels.insert(id, class);
    }
    Ok(labels)
}

fn io_json(e: serde_json::Error) -> DataError {
    DataError::Io(std::io::Error::other(e))
}

const MODEL_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    kind: String,
    model: TreeEnsembleModel,
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    version: u32,
    kind: String,
    models: Vec<TreeEnsembleModel>,
}

/// Save one rater model as a versioned JSON document.
pub fn save_model(model: &TreeEnsembleModel, path: &Path) -> Result<()> {
    let file = ModelFile {
        version: MODEL_FILE_VERSION,
        kind: "cortolam-model".into(),
        model: model.clone(),
    };
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut f, &file).map_err(io_json)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Load a rater model, checking version and document kind.
pub fn load_model(path: &Path) -> Result<TreeEnsembleModel> {
    let f = File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            DataError::ModelNotFound(path.display().to_string())
        } else {
            DataError::Io(e)
        }
    })?;
    let file: ModelFile = serde_json::from_reader(BufReader::new(f))
        .map_err(|e| DataError::MalformedModel(e.to_string()))?;
    if file.kind != "cortolam-model" {
        return Err(DataError::MalformedModel(format!(
            "unexpected document kind `{}`",
            file.kind
        )));
    }
    if file.version != MODEL_FILE_VERSION {
        return Err(DataError::ModelVersion {
            found: file.version,
            expected: MODEL_FILE_VERSION,
        });
    }
    Ok(file.model)
}

/// Save a rater ensemble as one self-contained JSON document.
pub fn save_ensemble(ensemble: &RaterEnsemble, path: &Path) -> Result<()> {
    let file = EnsembleFile {
        version: MODEL_FILE_VERSION,
        kind: "cortolam-ensemble".into(),
        models: ensemble.models.clone(),
    };
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut f, &file).map_err(io_json)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn load_ensemble(path: &Path) -> Result<RaterEnsemble> {
    let f = File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            DataError::ModelNotFound(path.display().to_string())
        } else {
            DataError::Io(e)
        }
    })?;
    let file: EnsembleFile = serde_json::from_reader(BufReader::new(f))
        .map_err(|e| DataError::MalformedModel(e.to_string()))?;
    if file.kind != "cortolam-ensemble" {
        return Err(DataError::MalformedModel(format!(
            "unexpected document kind `{}`",
            file.kind
        )));
    }
    if file.version != MODEL_FILE_VERSION {
        return Err(DataError::ModelVersion {
            found: file.version,
            expected: MODEL_FILE_VERSION,
        });
    }
    Ok(RaterEnsemble::new(file.models))
}

#[derive(Serialize, Deserialize)]
pub struct SplitFile {
    pub seed: u64,
    pub fraction: f64,
    pub stratified_by: String,
    pub unstratified_classes: Vec<String>,
    pub train_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
}

pub fn write_split(split: &TrainTestSplit, seed: u64, fraction: f64, by: &str, path: &Path) -> Result<()> {
    let file = SplitFile {
        seed,
        fraction,
        stratified_by: by.into(),
        unstratified_classes: split.unstratified.iter().map(|c| c.token().into()).collect(),
        train_ids: split.train_ids.clone(),
        test_ids: split.test_ids.clone(),
    };
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut f, &file).map_err(io_json)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_split(path: &Path) -> Result<SplitFile> {
    let f = File::open(path)?;
    serde_json::from_reader(BufReader::new(f)).map_err(io_json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cortolam_core::features::{assemble_features, FeatureConfig, SliceConfig};
    use cortolam_core::features::NniMode;
    use cortolam_core::spatial::SpatialIndex;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("cortolam-data-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn one_row_csv_roundtrip_in_micrometers() {
        let path = tmp("one.csv");
        std::fs::write(
            &path,
            "id,x_um,y_um,area_um2,perimeter_um,circularity,roundness,gray_mean,gray_median\n\
             1,10,20,50,30,0.7,0.6,,\n",
        )
        .unwrap();
        let records = load_neurons(&path, None).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!((r.id, r.x_um, r.y_um), (1, 10.0, 20.0));
        assert_eq!(r.area_um2, 50.0);
        assert_eq!(r.gray_mean, None);
    }

    #[test]
    fn pixel_coordinates_are_scaled_by_resolution() {
        let path = tmp("pixels.csv");
        std::fs::write(
            &path,
            "id,x_um,y_um,area_um2,perimeter_um,circularity,roundness\n1,10,20,50,30,0.7,0.6\n",
        )
        .unwrap();
        let records = load_neurons(&path, Some(0.226)).unwrap();
        assert!((records[0].x_um - 2.26).abs() < 1e-12);
        assert!((records[0].y_um - 4.52).abs() < 1e-12);
    }

    #[test]
    fn pixel_loading_equals_premultiplied_micrometers_exactly() {
        let px = tmp("linear_px.csv");
        let um = tmp("linear_um.csv");
        let r = 0.226;
        let (x, y) = (137.0, 911.0);
        std::fs::write(
            &px,
            format!(
                "id,x_um,y_um,area_um2,perimeter_um,circularity,roundness\n1,{x},{y},50,30,0.7,0.6\n"
            ),
        )
        .unwrap();
        std::fs::write(
            &um,
            format!(
                "id,x_um,y_um,area_um2,perimeter_um,circularity,roundness\n1,{},{},50,30,0.7,0.6\n",
                x * r,
                y * r
            ),
        )
        .unwrap();
        let from_px = load_neurons(&px, Some(r)).unwrap();
        let from_um = load_neurons(&um, None).unwrap();
        assert_eq!(from_px[0].x_um, from_um[0].x_um);
        assert_eq!(from_px[0].y_um, from_um[0].y_um);
    }

    #[test]
    fn missing_area_column_names_the_column() {
        let path = tmp("noarea.csv");
        std::fs::write(
            &path,
            "id,x_um,y_um,perimeter_um,circularity,roundness\n1,10,20,30,0.7,0.6\n",
        )
        .unwrap();
        match load_neurons(&path, None) {
            Err(DataError::MissingColumn(c)) => assert_eq!(c, "area_um2"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let path = tmp("dup.csv");
        std::fs::write(
            &path,
            "id,x_um,y_um,area_um2,perimeter_um,circularity,roundness\n\
             1,0,0,50,30,0.7,0.6\n1,5,5,50,30,0.7,0.6\n",
        )
        .unwrap();
        assert!(matches!(load_neurons(&path, None), Err(DataError::DuplicateId(1))));
    }

    #[test]
    fn non_positive_area_reports_the_row() {
        let path = tmp("badarea.csv");
        std::fs::write(
            &path,
            "id,x_um,y_um,area_um2,perimeter_um,circularity,roundness\n\
             1,0,0,50,30,0.7,0.6\n2,5,5,-3,30,0.7,0.6\n",
        )
        .unwrap();
        match load_neurons(&path, None) {
            Err(DataError::Row { row, message, .. }) => {
                assert_eq!(row, 2);
                assert!(message.contains("area_um2"));
            }
            other => panic!("expected row error, got {other:?}"),
        }
    }

    fn sample_neurons() -> Vec<NeuronRecord> {
        (1..=4u64)
            .map(|id| NeuronRecord {
                id,
                x_um: id as f64,
                y_um: 0.0,
                area_um2: 50.0,
                perimeter_um: 30.0,
                circularity: 0.7,
                roundness: 0.6,
                gray_mean: None,
                gray_median: None,
            })
            .collect()
    }

    #[test]
    fn labels_parse_case_insensitively() {
        let path = tmp("labels.csv");
        std::fs::write(&path, "neuron_id,layer\n1,iii\n2,WM\n").unwrap();
        let labels = load_labels(&path, "r1", &sample_neurons()).unwrap();
        assert_eq!(labels.len(), 2);
        assert_eq!(labels.get(1), Some(LayerClass::III));
        assert_eq!(labels.get(2), Some(LayerClass::WM));
    }

    #[test]
    fn unknown_layer_token_is_an_error() {
        let path = tmp("badtoken.csv");
        std::fs::write(&path, "neuron_id,layer\n3,VIII\n").unwrap();
        match load_labels(&path, "r1", &sample_neurons()) {
            Err(DataError::UnknownToken { token, .. }) => assert_eq!(token, "VIII"),
            other => panic!("expected UnknownToken, got {other:?}"),
        }
    }

    #[test]
    fn label_for_unknown_neuron_is_an_error() {
        let path = tmp("badref.csv");
        std::fs::write(&path, "neuron_id,layer\n99,I\n").unwrap();
        assert!(matches!(
            load_labels(&path, "r1", &sample_neurons()),
            Err(DataError::UnknownNeuron(99))
        ));
    }

    #[test]
    fn feature_table_roundtrips_exactly() {
        let neurons: Vec<NeuronRecord> = (0..40u64)
            .map(|id| NeuronRecord {
                id,
                x_um: (id as f64 * 37.0) % 199.0,
                y_um: (id as f64 * 61.0) % 157.0,
                area_um2: 20.0 + id as f64 / 3.0,
                perimeter_um: 30.0,
                circularity: 0.7,
                roundness: 0.6,
                gray_mean: Some(120.5),
                gray_median: None,
            })
            .collect();
        let index = SpatialIndex::build(&neurons).unwrap();
        let cfg = FeatureConfig {
            k_set: vec![5, 10],
            slice: SliceConfig { sectors: 8, k_slice: 10 },
            nni_mode: NniMode::MemberNearest,
        };
        let table = assemble_features(&neurons, &index, &cfg).unwrap();
        let path = tmp("features.csv");
        write_feature_table(&table, &path).unwrap();
        let back = read_feature_table(&path).unwrap();
        assert_eq!(back.schema, table.schema);
        assert_eq!(back.ids, table.ids);
        // Shortest round-trip formatting reloads bit-identical values.
        assert_eq!(back.values, table.values);

        // Writing the reloaded table reproduces the file byte for byte.
        let path2 = tmp("features2.csv");
        write_feature_table(&back, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn empty_table_writes_header_only() {
        let table = FeatureTable::new(vec!["a".into(), "b".into()]);
        let path = tmp("empty.csv");
        write_feature_table(&table, &path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert_eq!(content, "id,a,b\n");
    }

    #[test]
    fn ten_thousand_rows_write_that_many_lines() {
        let mut table = FeatureTable::new(vec!["v".into()]);
        for i in 0..10_000u64 {
            table.push_row(i, vec![i as f64 * 0.1], 0);
        }
        let path = tmp("tenk.csv");
        write_feature_table(&table, &path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert_eq!(content.lines().count(), 10_001);
    }
}
