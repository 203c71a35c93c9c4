use std::collections::BTreeMap;

use proptest::prelude::*;

use tube2vec::dimensions::{
    build_dimension, interval_of, project, sample_bins, transfer_dimension, DimensionScores,
    DimensionSpec, SeedPair, DEFAULT_DIM_EDGES, DEFAULT_NESS_EDGES,
};
use tube2vec::embedding::dot;
use tube2vec::forest::ForestConfig;
use tube2vec::synthetic::random_embedding;
use tube2vec::{EmbeddingTable, Error, Provenance};

fn scores_of(table: &EmbeddingTable, f: impl Fn(&[f64]) -> f64) -> DimensionScores {
    DimensionScores {
        dimension: "d".into(),
        scores: table.iter().map(|(id, v)| (id.to_string(), f(v))).collect(),
        standardized: false,
    }
}

#[test]
fn transfer_to_the_same_space_recovers_a_linear_score() {
    let t = random_embedding(600, 3, 1)
        .unwrap()
        .with_provenance(Provenance::Soc);
    let train = scores_of(&t, |v| 0.8 * v[0] - 0.6 * v[1]);
    let out = transfer_dimension(
        &t,
        &train,
        &ForestConfig {
            seed: 2,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.n_train, 600);
    let r2 = out.oob_r2.unwrap();
    assert!(r2 > 0.9, "{r2}");
    assert_eq!(out.scores.len(), 600);
}

#[test]
fn transfer_from_noise_explains_nothing() {
    let source = random_embedding(600, 3, 3).unwrap();
    let noise = random_embedding(600, 3, 4)
        .unwrap()
        .with_provenance(Provenance::Rec);
    let train = scores_of(&source, |v| v[0]);
    let out = transfer_dimension(
        &noise,
        &train,
        &ForestConfig {
            seed: 5,
            ..Default::default()
        },
    )
    .unwrap();
    let r2 = out.oob_r2.unwrap();
    assert!(r2 < 0.1, "{r2}");
}

#[test]
fn constant_training_scores_transfer_as_constants() {
    let t = random_embedding(150, 4, 6).unwrap();
    let train = scores_of(&t, |_| 0.75);
    let out = transfer_dimension(
        &t,
        &train,
        &ForestConfig {
            n_trees: 10,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(out.scores.scores.values().all(|&v| v == 0.75));
    assert_eq!(out.oob_r2, None);
}

#[test]
fn small_overlap_is_fatal() {
    let t = random_embedding(99, 4, 7).unwrap();
    let train = scores_of(&t, |v| v[0]);
    assert!(matches!(
        transfer_dimension(&t, &train, &ForestConfig::default()),
        Err(Error::Insufficient(_))
    ));
}

fn table_from(rows: &[Vec<f64>], prov: Provenance) -> EmbeddingTable {
    let d = rows[0].len();
    EmbeddingTable::from_entries(
        d,
        prov,
        rows.iter()
            .enumerate()
            .map(|(i, r)| (format!("c{i:03}"), r.clone())),
    )
    .unwrap()
}

fn vecs(n: std::ops::Range<usize>, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), n)
}

proptest! {
    #[test]
    fn projection_ignores_positive_scale(rows in vecs(1..20, 3), dir in prop::collection::vec(-1.0f64..1.0, 3), k in 0.01f64..100.0) {
        let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let dim = DimensionSpec { name: "d".into(), pairs: vec![], vector: dir.iter().map(|x| x / n).collect() };
        let a = table_from(&rows, Provenance::Soc);
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * k).collect()).collect();
        let b = table_from(&scaled, Provenance::Soc);
        let (sa, _) = project(&a, &dim).unwrap();
        let (sb, _) = project(&b, &dim).unwrap();
        prop_assert_eq!(sa.scores.len(), sb.scores.len());
        for (id, v) in &sa.scores {
            prop_assert!((v - sb.scores[id]).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_ignores_pair_order(rows in vecs(6..7, 4), perm in Just((0..3).collect::<Vec<usize>>()).prop_shuffle()) {
        let s = table_from(&rows, Provenance::External);
        let pairs: Vec<SeedPair> = (0..3).map(|i| (format!("c{:03}", 2 * i), format!("c{:03}", 2 * i + 1))).collect();
        let shuffled: Vec<SeedPair> = perm.iter().map(|&i| pairs[i].clone()).collect();
        match (build_dimension(&s, "d", &pairs), build_dimension(&s, "d", &shuffled)) {
            (Ok(a), Ok(b)) => {
                for (x, y) in a.vector.iter().zip(&b.vector) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
                prop_assert!((dot(&a.vector, &a.vector) - 1.0).abs() < 1e-12);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "order changed success"),
        }
    }

    #[test]
    fn standardization_is_exact_and_idempotent(values in prop::collection::vec(-1e3f64..1e3, 2..100)) {
        let s = DimensionScores {
            dimension: "d".into(),
            scores: values.iter().enumerate().map(|(i, v)| (format!("c{i}"), *v)).collect(),
            standardized: false,
        };
        let (_, sd) = s.moments();
        prop_assume!(sd > 1e-6);
        let z = s.standardize().unwrap();
        let (m, sd) = z.moments();
        prop_assert!(m.abs() < 1e-9);
        prop_assert!((sd - 1.0).abs() < 1e-9);
        let zz = z.standardize().unwrap();
        for (id, v) in &z.scores {
            prop_assert!((v - zz.scores[id]).abs() < 1e-9);
        }
    }

    #[test]
    fn bins_cover_exactly_the_in_range_channels(
        pts in prop::collection::vec((-7.0f64..7.0, -7.0f64..7.0), 0..300),
        per_bin in 1usize..15,
        seed in any::<u64>(),
    ) {
        let mk = |f: &dyn Fn(&(f64, f64)) -> f64| DimensionScores {
            dimension: "d".into(),
            scores: pts.iter().enumerate().map(|(i, p)| (format!("c{i:03}"), f(p))).collect::<BTreeMap<_, _>>(),
            standardized: true,
        };
        let (s, t) = (mk(&|p| p.0), mk(&|p| p.1));
        let a = sample_bins(&s, &t, &DEFAULT_DIM_EDGES, &DEFAULT_NESS_EDGES, per_bin, seed).unwrap();
        let b = sample_bins(&s, &t, &DEFAULT_DIM_EDGES, &DEFAULT_NESS_EDGES, per_bin, seed).unwrap();
        prop_assert_eq!(&a, &b);

        let inside = pts.iter().filter(|p| p.0.abs() <= 5.0 && p.1.abs() <= 5.0).count();
        let population: usize = a.bins.iter().map(|b| b.population).sum();
        prop_assert_eq!(population, inside);
        prop_assert_eq!(a.excluded.len(), pts.len() - inside);
        for bin in &a.bins {
            prop_assert_eq!(bin.sampled.len(), bin.population.min(per_bin));
            for id in &bin.sampled {
                let (x, y) = (s.scores[id], t.scores[id]);
                prop_assert!(interval_of(&[bin.dim_interval.0, bin.dim_interval.1], x).is_some());
                prop_assert!(interval_of(&[bin.ness_interval.0, bin.ness_interval.1], y).is_some());
            }
        }
        // With room for everyone, the sample is the whole in-range population.
        let all = sample_bins(&s, &t, &DEFAULT_DIM_EDGES, &DEFAULT_NESS_EDGES, pts.len().max(1), seed).unwrap();
        prop_assert_eq!(all.sampled().count(), inside);
    }
}
