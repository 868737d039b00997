//! Property tests over the spatial and feature primitives.

use cortolam_core::features::{shannon_index, simpson_index};
use cortolam_core::spatial::{convex_hull, PointUm, SpatialIndex};
use cortolam_core::types::NeuronRecord;

use proptest::prelude::*;

fn record(id: u64, x: f64, y: f64) -> NeuronRecord {
    NeuronRecord {
        id,
        x_um: x,
        y_um: y,
        area_um2: 1.0,
        perimeter_um: 1.0,
        circularity: 0.5,
        roundness: 0.5,
        gray_mean: None,
        gray_median: None,
    }
}

fn points_strategy(max_n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(
        (
            (-1000.0..1000.0f64).prop_map(|x| (x * 16.0).round() / 16.0),
            (-1000.0..1000.0f64).prop_map(|y| (y * 16.0).round() / 16.0),
        ),
        2..max_n,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn knn_always_matches_brute_force(pts in points_strategy(120), k in 1usize..30) {
        let neurons: Vec<NeuronRecord> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| record(i as u64, x, y))
            .collect();
        let index = SpatialIndex::build(&neurons).unwrap();
        let query = neurons[0].id;
        let got = index.knn(query, k).unwrap();

        let qx = neurons[0].x_um;
        let qy = neurons[0].y_um;
        let mut want: Vec<(f64, u64)> = neurons[1..]
            .iter()
            .map(|n| {
                let d = ((n.x_um - qx).powi(2) + (n.y_um - qy).powi(2)).sqrt();
                (d, n.id)
            })
            .collect();
        want.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        want.truncate(k);

        prop_assert_eq!(got.neighbors.len(), want.len());
        for (g, w) in got.neighbors.iter().zip(want.iter()) {
            prop_assert_eq!(g.id, w.1);
            prop_assert_eq!(g.dist_um, w.0);
        }
        prop_assert_eq!(got.clamped, k > neurons.len() - 1);
    }

    #[test]
    fn hull_contains_inputs_and_kth_distance_monotone(pts in points_strategy(80)) {
        let points: Vec<PointUm> = pts.iter().map(|&(x, y)| PointUm::new(x, y)).collect();
        if let Ok(hull) = convex_hull(&points) {
            for p in &points {
                prop_assert!(hull.contains(*p, 1e-9));
            }
            prop_assert!(hull.area_um2 > 0.0);
            prop_assert!(hull.perimeter_um > 0.0);
        }

        let neurons: Vec<NeuronRecord> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| record(i as u64, x, y))
            .collect();
        let index = SpatialIndex::build(&neurons).unwrap();
        let all = index.knn(0, neurons.len() - 1).unwrap().neighbors;
        for w in all.windows(2) {
            prop_assert!(w[0].dist_um <= w[1].dist_um);
        }
    }

    #[test]
    fn diversity_indices_respect_bounds_and_permutation(counts in prop::collection::vec(0u32..50, 2..12)) {
        let total: u32 = counts.iter().sum();
        prop_assume!(total > 0);
        let p: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let r = p.len() as f64;

        let shannon = shannon_index(&p);
        let simpson = simpson_index(&p);
        prop_assert!(shannon <= r.ln() + 1e-12);
        prop_assert!(shannon >= -1e-12);
        prop_assert!(simpson >= 1.0 / r - 1e-12);
        prop_assert!(simpson <= 1.0 + 1e-12);

        // Equality holds exactly at the uniform distribution.
        let uniform = vec![1.0 / r; p.len()];
        prop_assert!((shannon_index(&uniform) - r.ln()).abs() < 1e-12);
        prop_assert!((simpson_index(&uniform) - 1.0 / r).abs() < 1e-12);

        let mut perm = p.clone();
        perm.reverse();
        prop_assert!((shannon_index(&perm) - shannon).abs() < 1e-12);
        prop_assert!((simpson_index(&perm) - simpson).abs() < 1e-12);
    }

    #[test]
    fn non_uniform_proportions_stay_below_the_shannon_bound(
        counts in prop::collection::vec(1u32..50, 2..10),
    ) {
        let total: u32 = counts.iter().sum();
        let p: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let r = p.len() as f64;
        let uniform = (p.iter().all(|&pi| (pi - 1.0 / r).abs() < 1e-12)) as u8;
        if uniform == 0 {
            prop_assert!(shannon_index(&p) < r.ln() - 1e-12);
            prop_assert!(simpson_index(&p) > 1.0 / r + 1e-12);
        }
    }
}
