//! Cross-module checks on a generated section: feature extraction feeds
//! region derivation, and the derived tags recover the generator's
//! ground-truth structure.

use cortolam_core::features::{assemble_features, FeatureConfig};
use cortolam_core::regions::{
    apply_to_table, depth_thickness, derive_regions, RegionConfig, SparseKind,
};
use cortolam_core::spatial::{PointUm, SpatialIndex};
use cortolam_core::synth::{generate, SynthConfig, SynthSection};
use cortolam_core::types::{FeatureTable, LayerClass};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn section_with_features() -> (SynthSection, FeatureTable) {
    let cfg = SynthConfig {
        width_um: 2500.0,
        seed: 2121,
        ..SynthConfig::default()
    };
    let section = generate(&cfg).unwrap();
    let index = SpatialIndex::build(&section.neurons).unwrap();
    let mut table = assemble_features(&section.neurons, &index, &FeatureConfig::default()).unwrap();
    let tags = derive_regions(&section.neurons, &table, &RegionConfig::default()).unwrap();
    apply_to_table(&tags, &mut table).unwrap();
    (section, table)
}

#[test]
fn region_tags_recover_layer_i() {
    let (section, table) = section_with_features();
    let cfg = RegionConfig::default();
    let tags = derive_regions(&section.neurons, &table, &cfg).unwrap();

    // At least 90% of true layer-I neurons must be tagged layer_I.
    let mut layer_i_total = 0usize;
    let mut layer_i_hit = 0usize;
    for (i, n) in section.neurons.iter().enumerate() {
        if section.truth.get(n.id) == Some(LayerClass::I) {
            layer_i_total += 1;
            if tags.tags[i].sparse_kind == SparseKind::LayerI {
                layer_i_hit += 1;
            }
        }
    }
    assert!(layer_i_total > 100);
    let recovery = layer_i_hit as f64 / layer_i_total as f64;
    assert!(
        recovery >= 0.90,
        "layer-I recovery {recovery:.3} below 0.90 ({layer_i_hit}/{layer_i_total})"
    );

    // The table region block never contains NaN.
    assert!(table.values.iter().all(|v| v.is_finite()));
}

#[test]
fn depth_norm_orders_true_bands() {
    // Tag sets taken from the generator ground truth: depth_norm computed
    // by nearest-tagged-neuron distances must order the true bands for at
    // least 95% of sampled cross-band pairs.
    let cfg = SynthConfig {
        width_um: 2500.0,
        seed: 909,
        ..SynthConfig::default()
    };
    let section = generate(&cfg).unwrap();
    let set_of = |classes: &[LayerClass]| {
        let pts: Vec<PointUm> = section
            .neurons
            .iter()
            .filter(|n| classes.contains(&section.truth.get(n.id).unwrap()))
            .map(|n| PointUm::new(n.x_um, n.y_um))
            .collect();
        let ids: Vec<u64> = (0..pts.len() as u64).collect();
        SpatialIndex::from_points(pts, ids).unwrap()
    };
    let layer_i = set_of(&[LayerClass::I]);
    let wm = set_of(&[LayerClass::WM]);
    let dense = set_of(&[LayerClass::II, LayerClass::IV]);

    let depth_norm: Vec<f64> = section
        .neurons
        .iter()
        .map(|n| depth_thickness(PointUm::new(n.x_um, n.y_um), &layer_i, &wm, &dense).2)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = section.neurons.len();
    let mut ordered = 0usize;
    let mut sampled = 0usize;
    while sampled < 2000 {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let ba = section.truth.get(section.neurons[a].id).unwrap().ordinal();
        let bb = section.truth.get(section.neurons[b].id).unwrap().ordinal();
        if ba == bb {
            continue;
        }
        let (lo, hi) = if ba < bb { (a, b) } else { (b, a) };
        sampled += 1;
        if depth_norm[lo] < depth_norm[hi] {
            ordered += 1;
        }
    }
    let frac = ordered as f64 / sampled as f64;
    assert!(
        frac >= 0.95,
        "depth_norm ordered only {frac:.3} of cross-band pairs"
    );
}

#[test]
fn feature_and_region_pipeline_is_deterministic() {
    let (_, a) = section_with_features();
    let (_, b) = section_with_features();
    assert_eq!(a, b);
}
