//! Command-line entry point for the cortical-layer analysis pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cortolam::commands;
use cortolam::config::PipelineConfig;

#[derive(Parser)]
#[command(
    name = "cortolam",
    version,
    about = "Neuron-level cortical layer analysis: synthetic sections, features, regions, boosted-tree training, SHAP explanations, and SVG layer maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonConfig {
    /// Pipeline configuration file (TOML); defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the seed from the configuration file.
    #[arg(long)]
    seed: Option<u64>,
}

impl CommonConfig {
    fn load(&self) -> anyhow::Result<PipelineConfig> {
        let mut cfg = PipelineConfig::load_or_default(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic laminar section with ground truth and
    /// simulated rater labels.
    Synth {
        #[command(flatten)]
        common: CommonConfig,
        /// Output directory for neurons.csv, truth.csv, labels_*.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the per-neuron feature table (region block included).
    Features {
        #[command(flatten)]
        common: CommonConfig,
        /// Neuron table (CSV).
        #[arg(long)]
        neurons: PathBuf,
        /// Output directory for features.csv and features_schema.json.
        #[arg(long)]
        out: PathBuf,
        /// Input coordinates are pixels at this resolution (µm/pixel).
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Derive population and depth tags from a feature table.
    Regions {
        #[command(flatten)]
        common: CommonConfig,
        #[arg(long)]
        neurons: PathBuf,
        /// Feature table produced by `features`.
        #[arg(long)]
        features: PathBuf,
        /// Output directory for regions.csv and regions_summary.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one boosted model per rater label file and fuse them.
    Train {
        #[command(flatten)]
        common: CommonConfig,
        #[arg(long)]
        features: PathBuf,
        /// Rater label files; one model is trained per file.
        #[arg(long = "labels", required = true)]
        labels: Vec<PathBuf>,
        /// Output directory for ensemble.json, model_*.json, split.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict layers for every row of a feature table.
    Predict {
        #[arg(long)]
        features: PathBuf,
        /// Ensemble file written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Output predictions CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// SHAP attributions per neuron and global feature importance.
    Explain {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Output directory for explanations.csv and importance.json.
        #[arg(long)]
        out: PathBuf,
        /// Explain these neuron ids (comma separated) and print their
        /// contribution tables.
        #[arg(long, value_delimiter = ',')]
        ids: Vec<u64>,
        /// Without --ids, explain the first N table rows.
        #[arg(long, default_value_t = 100)]
        limit: usize,
        /// Rows sampled for the global importance ranking.
        #[arg(long, default_value_t = 1000)]
        importance_rows: usize,
    },
    /// Agreement, accuracy, and composition report.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        /// split.json written by `train`.
        #[arg(long)]
        split: PathBuf,
        #[arg(long = "labels", required = true)]
        labels: Vec<PathBuf>,
        /// Ground-truth labels, when available (synthetic runs).
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        neurons: PathBuf,
        /// Output directory for eval.json and eval.txt.
        #[arg(long)]
        out: PathBuf,
        /// Composition size: the N largest neurons by soma area.
        #[arg(long, default_value_t = 500)]
        top_n: usize,
    },
    /// Render an SVG layer map (one panel per label source).
    Plot {
        #[arg(long)]
        neurons: PathBuf,
        /// Label or prediction CSVs; one panel each.
        #[arg(long = "labels")]
        labels: Vec<PathBuf>,
        /// Feature table for continuous coloring (with --column).
        #[arg(long)]
        features: Option<PathBuf>,
        /// Feature column to color by.
        #[arg(long)]
        column: Option<String>,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth { common, out } => commands::cmd_synth(&out, &common.load()?),
        Command::Features {
            common,
            neurons,
            out,
            resolution,
        } => commands::cmd_features(&neurons, &out, &common.load()?, resolution),
        Command::Regions {
            common,
            neurons,
            features,
            out,
        } => commands::cmd_regions(&neurons, &features, &out, &common.load()?),
        Command::Train {
            common,
            features,
            labels,
            out,
        } => commands::cmd_train(&features, &labels, &out, &common.load()?),
        Command::Predict {
            features,
            model,
            out,
        } => commands::cmd_predict(&features, &model, &out),
        Command::Explain {
            features,
            model,
            out,
            ids,
            limit,
            importance_rows,
        } => commands::cmd_explain(&features, &model, &out, &ids, limit, importance_rows),
        Command::Eval {
            predictions,
            split,
            labels,
            truth,
            neurons,
            out,
            top_n,
        } => commands::cmd_eval(
            &predictions,
            &split,
            &labels,
            truth.as_deref(),
            &neurons,
            &out,
            top_n,
        ),
        Command::Plot {
            neurons,
            labels,
            features,
            column,
            out,
        } => commands::cmd_plot(&neurons, &labels, features.as_deref(), column.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
