//! Pipeline configuration: a flat TOML file with CLI-flag overrides.
//!
//! Every field has a default, so an empty (or absent) file runs the
//! standard pipeline. A single seed governs all randomness; component
//! seeds are derived from it deterministically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use cortolam_core::features::{FeatureConfig, NniMode, SliceConfig};
use cortolam_core::model::TrainConfig;
use cortolam_core::regions::RegionConfig;
use cortolam_core::synth::SynthConfig;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; every stochastic component derives its own from it.
    pub seed: u64,
    pub features: FeatureSection,
    pub regions: RegionSection,
    pub train: TrainSection,
    pub split: SplitSection,
    pub synth: SynthSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            features: FeatureSection::default(),
            regions: RegionSection::default(),
            train: TrainSection::default(),
            split: SplitSection::default(),
            synth: SynthSection::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSection {
    pub k_set: Vec<usize>,
    pub slice_sectors: usize,
    pub slice_k: usize,
    /// `member` (mean member nearest-neighbor distance) or `central`
    /// (mean distance from the central neuron).
    pub nni_mode: String,
}

impl Default for FeatureSection {
    fn default() -> Self {
        let f = FeatureConfig::default();
        FeatureSection {
            k_set: f.k_set,
            slice_sectors: f.slice.sectors,
            slice_k: f.slice.k_slice,
            nni_mode: "member".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionSection {
    pub density_k: usize,
    pub hull_k: usize,
}

impl Default for RegionSection {
    fn default() -> Self {
        let r = RegionConfig::default();
        RegionSection {
            density_k: r.density_k,
            hull_k: r.hull_k,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l2_leaf_reg: f64,
    pub min_samples_leaf: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            rounds: t.rounds,
            max_depth: t.max_depth,
            learning_rate: t.learning_rate,
            l2_leaf_reg: t.l2_leaf_reg,
            min_samples_leaf: t.min_samples_leaf,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub fraction: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection { fraction: 0.75 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    /// Number of simulated raters to emit.
    pub raters: usize,
    /// Boundary jitter amplitude per rater (µm); negative means calibrate
    /// to `target_agreement`.
    pub rater_disagreement_um: f64,
    /// Pairwise agreement target used when calibrating.
    pub target_agreement: f64,
    /// Generator geometry and band distributions.
    #[serde(flatten)]
    pub generator: SynthConfig,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            raters: 3,
            rater_disagreement_um: -1.0,
            target_agreement: 0.80,
            generator: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: PipelineConfig = toml::from_str(&text)?;
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn feature_config(&self) -> anyhow::Result<FeatureConfig> {
        let nni_mode = match self.features.nni_mode.as_str() {
            "member" => NniMode::MemberNearest,
            "central" => NniMode::CentralMean,
            other => anyhow::bail!("nni_mode must be `member` or `central`, got `{other}`"),
        };
        Ok(FeatureConfig {
            k_set: self.features.k_set.clone(),
            slice: SliceConfig {
                sectors: self.features.slice_sectors,
                k_slice: self.features.slice_k,
            },
            nni_mode,
        })
    }

    pub fn region_config(&self) -> RegionConfig {
        RegionConfig {
            density_k: self.regions.density_k,
            hull_k: self.regions.hull_k,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            rounds: self.train.rounds,
            max_depth: self.train.max_depth,
            learning_rate: self.train.learning_rate,
            l2_leaf_reg: self.train.l2_leaf_reg,
            min_samples_leaf: self.train.min_samples_leaf,
            seed: sub_seed(self.seed, seeds::TRAIN),
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        let mut g = self.synth.generator.clone();
        g.seed = sub_seed(self.seed, seeds::SYNTH);
        g
    }
}

/// Fixed tags for deriving per-component seeds from the master seed.
pub mod seeds {
    pub const SYNTH: u64 = 1;
    pub const RATER_BASE: u64 = 100;
    pub const SPLIT: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const CALIBRATE: u64 = 4;
}

/// Mix a component tag into the master seed (splitmix-style constant).
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_gives_defaults() {
        let cfg: PipelineConfig = toml::from_str("").unwrap();
        assert_eq!(cfg.train.rounds, 200);
        assert_eq!(cfg.features.k_set, vec![50, 100, 250, 500, 1000]);
        assert_eq!(cfg.split.fraction, 0.75);
        assert_eq!(cfg.synth.raters, 3);
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let cfg: PipelineConfig = toml::from_str(
            "seed = 9\n[train]\nrounds = 10\n[features]\nnni_mode = \"central\"\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.train.rounds, 10);
        assert_eq!(cfg.train.max_depth, 6);
        assert!(matches!(
            cfg.feature_config().unwrap().nni_mode,
            NniMode::CentralMean
        ));
    }

    #[test]
    fn full_config_roundtrips_through_toml() {
        let cfg = PipelineConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: PipelineConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.synth.generator, cfg.synth.generator);
        assert_eq!(back.train.rounds, cfg.train.rounds);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("bogus_key = 1\n").is_err());
    }

    #[test]
    fn bad_nni_mode_is_an_error() {
        let cfg: PipelineConfig =
            toml::from_str("[features]\nnni_mode = \"sideways\"\n").unwrap();
        assert!(cfg.feature_config().is_err());
    }
}
