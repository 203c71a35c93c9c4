//! Seeded synthetic fixtures with known ground truth.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embedding::{EmbeddingTable, Provenance};
use crate::error::Result;
use crate::recommend::RecGraph;
use crate::seed::rng_from;

/// Node id used by [`planted_partition`].
pub fn node_name(i: usize) -> String {
    format!("n{i:04}")
}

/// Unweighted graph of `communities * size` nodes where each pair is linked
/// with probability `p_in` inside a community and `p_out` across. Returns the
/// graph and the community of every node id.
pub fn planted_partition(
    communities: usize,
    size: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(RecGraph, Vec<(String, usize)>)> {
    let n = communities * size;
    let mut rng = rng_from(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if u / size == v / size { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((node_name(u), node_name(v), 1));
            }
        }
    }
    let graph = RecGraph::from_edges((0..n).map(node_name), edges)?;
    let labels = (0..n).map(|i| (node_name(i), i / size)).collect();
    Ok((graph, labels))
}

/// Two isotropic Gaussian clusters in `dim` dimensions, centred at `-sep/2`
/// and `+sep/2` along every axis. Labels are 0 and 1, alternating.
pub fn gaussian_blobs(n: usize, dim: usize, sep: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = rng_from(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2;
        let centre = if label == 0 { -sep / 2.0 } else { sep / 2.0 };
        let row = (0..dim)
            .map(|_| {
                centre + {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z
                }
            })
            .collect::<Vec<f64>>();
        x.push(row);
        y.push(label);
    }
    (x, y)
}

/// Table of `n` standard-normal vectors with ids `p00000`, `p00001`, ...
pub fn random_embedding(n: usize, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    let mut rng = rng_from(seed);
    let entries = (0..n).map(|i| {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        (format!("p{i:05}"), v)
    });
    EmbeddingTable::from_entries(dim, Provenance::External, entries.collect::<Vec<_>>())
}

/// Scores `exp(u)` with `u` uniform on `[-spread, spread]`, one per item.
pub fn log_uniform_scores(n: usize, spread: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(seed);
    (0..n)
        .map(|_| rng.random_range(-spread..=spread).exp())
        .collect()
}

/// `m` comparisons between uniformly drawn distinct pairs, decided by the
/// Bradley-Terry rule `Pr(i beats j) = s_i / (s_i + s_j)`. Each result is
/// `(winner, loser)`.
pub fn pairwise_comparisons(scores: &[f64], m: usize, seed: u64) -> Vec<(usize, usize)> {
    let n = scores.len();
    assert!(n >= 2, "need at least two items");
    let mut rng = rng_from(seed);
    (0..m)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            if rng.random::<f64>() < scores[i] / (scores[i] + scores[j]) {
                (i, j)
            } else {
                (j, i)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_partition_is_denser_inside_communities() {
        let (g, labels) = planted_partition(3, 50, 0.3, 0.01, 1).unwrap();
        assert_eq!(g.n_nodes(), 150);
        let (mut inside, mut across) = (0, 0);
        for (u, v, _) in g.edges() {
            if labels[u].1 == labels[v].1 {
                inside += 1;
            } else {
                across += 1;
            }
        }
        // Expected 3 * C(50,2) * 0.3 = 1102.5 and 7500 * 0.01 = 75.
        assert!((950..1250).contains(&inside), "{inside}");
        assert!((40..120).contains(&across), "{across}");
    }

    #[test]
    fn comparisons_favour_the_stronger_item() {
        let c = pairwise_comparisons(&[9.0, 1.0], 10_000, 3);
        let wins = c.iter().filter(|&&(w, _)| w == 0).count() as f64 / 10_000.0;
        assert!((wins - 0.9).abs() < 0.015, "{wins}");
    }

    #[test]
    fn fixtures_are_seeded() {
        assert_eq!(gaussian_blobs(10, 2, 4.0, 5), gaussian_blobs(10, 2, 4.0, 5));
        assert_eq!(
            random_embedding(5, 3, 2).unwrap(),
            random_embedding(5, 3, 2).unwrap()
        );
        assert_eq!(log_uniform_scores(4, 2.0, 1), log_uniform_scores(4, 2.0, 1));
    }
}
