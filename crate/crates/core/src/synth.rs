//! Seeded synthetic laminar cortex generator.
//!
//! Produces a section of neurons arranged in horizontal bands (layer I at
//! the top edge through white matter at the bottom) with sinusoidally
//! perturbed boundaries, homogeneous Poisson placement per band, and
//! per-band attribute distributions. Every draw comes from one seeded
//! stream, so a fixed seed reproduces the section exactly. Simulated
//! raters re-label the same neurons under independently jittered
//! boundaries, mimicking inter-expert disagreement.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::types::{LabelSet, LayerClass, NeuronRecord};

/// Distributional parameters of one layer band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    /// Fraction of the section height; fractions over all bands sum to 1.
    pub thickness_frac: f64,
    /// Target neuron density in neurons per mm².
    pub density_per_mm2: f64,
    /// Log-normal location of soma area (µm²).
    pub area_log_mean: f64,
    /// Log-normal scale of soma area.
    pub area_log_sigma: f64,
    /// Beta parameters of circularity.
    pub circularity_beta: (f64, f64),
    /// Beta parameters of roundness.
    pub roundness_beta: (f64, f64),
    /// Normal location of the gray level.
    pub gray_mean: f64,
    /// Normal scale of the gray level.
    pub gray_sigma: f64,
}

/// Generator configuration; bands are ordered I..WM from the top edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub width_um: f64,
    pub height_um: f64,
    pub bands: Vec<BandSpec>,
    pub waviness_amplitude_um: f64,
    pub waviness_wavelength_um: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let band = |frac, density, mu, sigma, circ, round, gray_mu, gray_sigma| BandSpec {
            thickness_frac: frac,
            density_per_mm2: density,
            area_log_mean: mu,
            area_log_sigma: sigma,
            circularity_beta: circ,
            roundness_beta: round,
            gray_mean: gray_mu,
            gray_sigma,
        };
        // Band thicknesses are sized so each band spans several k=500
        // neighborhood radii at its density; thinner bands would blur
        // into their neighbors at that measurement scale.
        SynthConfig {
            width_um: 9_120.0,
            height_um: 12_000.0,
            bands: alloc::vec![
                // I: sparse, small somata, pale staining.
                band(0.32, 250.0, 4.40, 0.40, (5.0, 2.5), (5.0, 2.5), 180.0, 12.0),
                // II: dense, small somata.
                band(0.06, 1200.0, 4.45, 0.40, (5.0, 2.5), (5.0, 2.5), 130.0, 12.0),
                // III: average density, the largest somata.
                band(0.11, 600.0, 5.15, 0.55, (5.0, 2.5), (5.0, 2.5), 120.0, 12.0),
                // IV: dense, small somata.
                band(0.06, 1200.0, 4.45, 0.40, (5.0, 2.5), (5.0, 2.5), 115.0, 12.0),
                // V: average density, large somata.
                band(0.10, 600.0, 5.10, 0.50, (4.5, 2.8), (4.5, 2.8), 120.0, 12.0),
                // VI: average density, large multipolar somata (lowest
                // circularity/roundness), heavy dye uptake.
                band(0.12, 600.0, 5.00, 0.50, (3.0, 3.2), (2.8, 3.4), 95.0, 12.0),
                // WM: sparsest, small somata.
                band(0.23, 150.0, 4.20, 0.35, (5.0, 2.5), (5.0, 2.5), 140.0, 12.0),
            ],
            waviness_amplitude_um: 50.0,
            waviness_wavelength_um: 800.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bands.len() != LayerClass::COUNT {
            return Err(CoreError::InvalidConfig(alloc::format!(
                "expected {} bands, got {}",
                LayerClass::COUNT,
                self.bands.len()
            )));
        }
        if !(self.width_um > 0.0) || !(self.height_um > 0.0) {
            return Err(CoreError::InvalidConfig("section dimensions must be positive".into()));
        }
        let frac_sum: f64 = self.bands.iter().map(|b| b.thickness_frac).sum();
        if (frac_sum - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidConfig(alloc::format!(
                "band thickness fractions sum to {frac_sum}, expected 1"
            )));
        }
        for (i, b) in self.bands.iter().enumerate() {
            if !(b.thickness_frac > 0.0) {
                return Err(CoreError::InvalidConfig(alloc::format!(
                    "band {} has zero area",
                    LayerClass::ALL[i]
                )));
            }
            if !(b.density_per_mm2 > 0.0) {
                return Err(CoreError::InvalidConfig("densities must be positive".into()));
            }
            if b.thickness_frac * self.height_um <= 2.0 * self.waviness_amplitude_um {
                return Err(CoreError::InvalidConfig(alloc::format!(
                    "band {} thinner than twice the waviness amplitude",
                    LayerClass::ALL[i]
                )));
            }
        }
        if !(self.waviness_wavelength_um > 0.0) || self.waviness_amplitude_um < 0.0 {
            return Err(CoreError::InvalidConfig("invalid waviness parameters".into()));
        }
        // Density ordering: II, IV dense; III, V, VI average; I, WM sparse.
        let d = |c: LayerClass| self.bands[c.ordinal()].density_per_mm2;
        let dense_min = d(LayerClass::II).min(d(LayerClass::IV));
        let avg = [d(LayerClass::III), d(LayerClass::V), d(LayerClass::VI)];
        let avg_min = avg.iter().copied().fold(f64::INFINITY, f64::min);
        let avg_max = avg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sparse_max = d(LayerClass::I).max(d(LayerClass::WM));
        if !(dense_min > avg_max && avg_min > sparse_max) {
            return Err(CoreError::InvalidConfig(
                "densities must satisfy II,IV > III,V,VI > I,WM".into(),
            ));
        }
        Ok(())
    }
}

/// Generator-assigned true layer per neuron id.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    labels: BTreeMap<u64, LayerClass>,
}

impl GroundTruth {
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

    pub fn to_label_set(&self, rater_id: impl Into<String>) -> LabelSet {
        LabelSet::from_pairs(rater_id, self.iter())
    }
}

/// The six internal boundary curves between the seven bands.
#[derive(Clone, Debug)]
struct BoundarySet {
    base: Vec<f64>,
    amplitude: f64,
    wavelength: f64,
    phases: Vec<f64>,
}

impl BoundarySet {
    fn y(&self, b: usize, x: f64) -> f64 {
        self.base[b]
            + self.amplitude * (core::f64::consts::TAU * x / self.wavelength + self.phases[b]).sin()
    }
}

/// A generated section: neurons, ground truth, and the boundary curves
/// needed to simulate raters.
#[derive(Clone, Debug)]
pub struct SynthSection {
    pub neurons: Vec<NeuronRecord>,
    pub truth: GroundTruth,
    pub config: SynthConfig,
    boundaries: BoundarySet,
}

/// Generate a synthetic section. Deterministic for a fixed seed.
pub fn generate(cfg: &SynthConfig) -> Result<SynthSection> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let n_bounds = LayerClass::COUNT - 1;
    let mut base = Vec::with_capacity(n_bounds);
    let mut acc = 0.0;
    for b in &cfg.bands[..n_bounds] {
        acc += b.thickness_frac * cfg.height_um;
        base.push(acc);
    }
    let phases: Vec<f64> = (0..n_bounds)
        .map(|_| rng.gen_range(0.0..core::f64::consts::TAU))
        .collect();
    let boundaries = BoundarySet {
        base,
        amplitude: cfg.waviness_amplitude_um,
        wavelength: cfg.waviness_wavelength_um,
        phases,
    };

    let mut neurons = Vec::new();
    let mut labels = BTreeMap::new();
    let mut next_id = 1u64;
    for (b, spec) in cfg.bands.iter().enumerate() {
        let class = LayerClass::ALL[b];
        let top = |bounds: &BoundarySet, x: f64| -> f64 {
            if b == 0 {
                0.0
            } else {
                bounds.y(b - 1, x)
            }
        };
        let bottom = |bounds: &BoundarySet, x: f64| -> f64 {
            if b == n_bounds {
                cfg.height_um
            } else {
                bounds.y(b, x)
            }
        };

        // Band area by trapezoid quadrature of the wavy strip.
        let steps = 4096usize;
        let dx = cfg.width_um / steps as f64;
        let mut area = 0.0;
        for s in 0..=steps {
            let x = s as f64 * dx;
            let gap = bottom(&boundaries, x) - top(&boundaries, x);
            let w = if s == 0 || s == steps { 0.5 } else { 1.0 };
            area += w * gap * dx;
        }

        let expected = spec.density_per_mm2 * area * 1e-6;
        let count = Poisson::new(expected)
            .map_err(|_| CoreError::InvalidConfig("non-positive expected band count".into()))?
            .sample(&mut rng) as usize;

        let area_dist = LogNormal::new(spec.area_log_mean, spec.area_log_sigma)
            .map_err(|_| CoreError::InvalidConfig("invalid soma-area parameters".into()))?;
        let circ_dist = Beta::new(spec.circularity_beta.0, spec.circularity_beta.1)
            .map_err(|_| CoreError::InvalidConfig("invalid circularity beta".into()))?;
        let round_dist = Beta::new(spec.roundness_beta.0, spec.roundness_beta.1)
            .map_err(|_| CoreError::InvalidConfig("invalid roundness beta".into()))?;
        let gray_dist = Normal::new(spec.gray_mean, spec.gray_sigma)
            .map_err(|_| CoreError::InvalidConfig("invalid gray parameters".into()))?;
        let median_jitter = Normal::new(0.0, 3.0).expect("fixed parameters");

        let y_lo = if b == 0 { 0.0 } else { boundaries.base[b - 1] - boundaries.amplitude };
        let y_hi = if b == n_bounds {
            cfg.height_um
        } else {
            boundaries.base[b] + boundaries.amplitude
        };

        let mut placed = 0usize;
        while placed < count {
            let x = rng.gen_range(0.0..cfg.width_um);
            let y = rng.gen_range(y_lo..y_hi);
            if y < top(&boundaries, x) || y >= bottom(&boundaries, x) {
                continue;
            }
            let soma_area: f64 = area_dist.sample(&mut rng);
            let circularity = circ_dist.sample(&mut rng).clamp(1e-3, 1.0);
            let roundness = round_dist.sample(&mut rng).clamp(0.0, 1.0);
            let gray_mean = gray_dist.sample(&mut rng).clamp(0.0, 255.0);
            let gray_median =
                (gray_mean + median_jitter.sample(&mut rng)).clamp(0.0, 255.0);
            // Circularity 4πA/P² fixes the perimeter given area.
            let perimeter = (4.0 * core::f64::consts::PI * soma_area / circularity).sqrt();
            neurons.push(NeuronRecord {
                id: next_id,
                x_um: x,
                y_um: y,
                area_um2: soma_area,
                perimeter_um: perimeter,
                circularity,
                roundness,
                gray_mean: Some(gray_mean),
                gray_median: Some(gray_median),
            });
            labels.insert(next_id, class);
            next_id += 1;
            placed += 1;
        }
    }

    Ok(SynthSection {
        neurons,
        truth: GroundTruth { labels },
        config: cfg.clone(),
        boundaries,
    })
}

impl SynthSection {
    /// The band containing a point, from the ground-truth boundary curves.
    pub fn band_of(&self, x: f64, y: f64) -> LayerClass {
        for b in 0..LayerClass::COUNT - 1 {
            if y < self.boundaries.y(b, x) {
                return LayerClass::ALL[b];
            }
        }
        LayerClass::WM
    }

    /// Simulate one rater: ground truth relabeled under independently
    /// jittered boundary curves of the given amplitude.
    ///
    /// Amplitude 0 returns the truth exactly. Jitter is smooth (two
    /// incommensurate sinusoids per boundary); jittered curves are clamped
    /// to stay ordered.
    pub fn rater_labels(&self, rater_id: &str, disagreement_um: f64, seed: u64) -> LabelSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_bounds = LayerClass::COUNT - 1;
        // Four incommensurate components per boundary; weights sum to 1 so
        // the peak offset stays at the disagreement amplitude.
        const WEIGHTS: [f64; 4] = [0.5, 0.25, 0.15, 0.10];
        const SCALES: [f64; 4] = [2.3, 1.1, 0.53, 0.29];
        let lambdas: Vec<f64> = SCALES
            .iter()
            .map(|s| s * self.config.waviness_wavelength_um)
            .collect();
        let phases: Vec<[f64; 4]> = (0..n_bounds)
            .map(|_| core::array::from_fn(|_| rng.gen_range(0.0..core::f64::consts::TAU)))
            .collect();

        let mut labels = LabelSet::new(rater_id);
        for n in &self.neurons {
            let mut class = LayerClass::WM;
            let mut floor = f64::NEG_INFINITY;
            for b in 0..n_bounds {
                let mut offset = 0.0;
                for c in 0..4 {
                    offset += WEIGHTS[c]
                        * (core::f64::consts::TAU * n.x_um / lambdas[c] + phases[b][c]).sin();
                }
                // Keep boundaries ordered under large jitter.
                let y_b = (self.boundaries.y(b, n.x_um) + disagreement_um * offset).max(floor);
                floor = y_b;
                if n.y_um < y_b {
                    class = LayerClass::ALL[b];
                    break;
                }
            }
            labels.insert(n.id, class);
        }
        labels
    }

    /// Find the jitter amplitude at which two simulated raters agree at
    /// the target fraction. Agreement decreases in amplitude, so a
    /// bisection over the amplitude converges; the report pairs the
    /// amplitude with the achieved agreement.
    pub fn calibrate_disagreement(&self, target_agreement: f64, seed: u64) -> (f64, f64) {
        let pair_agreement = |amp: f64| -> f64 {
            let a = self.rater_labels("cal_a", amp, seed.wrapping_mul(2).wrapping_add(1));
            let b = self.rater_labels("cal_b", amp, seed.wrapping_mul(2).wrapping_add(2));
            let mut same = 0usize;
            for (id, ca) in a.iter() {
                if b.get(id) == Some(ca) {
                    same += 1;
                }
            }
            same as f64 / a.len() as f64
        };
        let mut lo = 0.0;
        let mut hi = self.config.height_um / 3.0;
        for _ in 0..32 {
            let mid = 0.5 * (lo + hi);
            if pair_agreement(mid) > target_agreement {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let amp = 0.5 * (lo + hi);
        (amp, pair_agreement(amp))
    }
}
