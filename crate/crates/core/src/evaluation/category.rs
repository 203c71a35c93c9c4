//! How well an embedding separates one category from the rest: repeated
//! balanced samples, a forest classifier, F1 of the target class.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig};
use crate::seed::{child_seed, rng_from};

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryConfig {
    pub reps: usize,
    /// Channels drawn from the target category, and from all others, per repetition.
    pub per_class: usize,
    pub train_fraction: f64,
    /// Shuffle the labels of each drawn sample before splitting (a chance baseline).
    pub permute_labels: bool,
    pub forest: ForestConfig,
    pub seed: u64,
}

impl Default for CategoryConfig {
    fn default() -> Self {
        CategoryConfig {
            reps: 100,
            per_class: 100,
            train_fraction: 0.7,
            permute_labels: false,
            forest: ForestConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryReport {
    pub target: String,
    pub mean_f1: f64,
    /// One value per repetition, in repetition order.
    pub f1: Vec<f64>,
    pub positives_available: usize,
    pub negatives_available: usize,
}

/// F1 of the positive class. With no positives in either the truth or the
/// predictions there is nothing to get wrong, and the score is 1.
pub fn f1_score(truth: &[bool], predicted: &[bool]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0u32, 0u32, 0u32);
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let d = 2 * tp + fp + fn_;
    if d == 0 {
        1.0
    } else {
        f64::from(2 * tp) / f64::from(d)
    }
}

/// Mean F1 of the target category over `cfg.reps` repetitions.
pub fn eval_category(
    table: &EmbeddingTable,
    categories: &BTreeMap<String, String>,
    target: &str,
    cfg: &CategoryConfig,
) -> Result<CategoryReport> {
    if cfg.reps == 0 || cfg.per_class == 0 {
        return Err(Error::invalid("reps and per_class must be positive"));
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::invalid(
            "train fraction must lie strictly between 0 and 1",
        ));
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (id, cat) in categories {
        if let Some(i) = table.index_of(id) {
            if cat == target {
                pos.push(i);
            } else {
                neg.push(i);
            }
        }
    }
    if pos.len() < cfg.per_class || neg.len() < cfg.per_class {
        return Err(Error::Insufficient(format!(
            "category `{target}` needs {} channels in and out of it with vectors; found {} and {}",
            cfg.per_class,
            pos.len(),
            neg.len()
        )));
    }
    let total = 2 * cfg.per_class;
    let n_train = ((total as f64) * cfg.train_fraction).round() as usize;
    if n_train == 0 || n_train >= total {
        return Err(Error::invalid("train/test split leaves one side empty"));
    }

    let f1 = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = child_seed(cfg.seed, rep as u64);
            let mut rng = rng_from(seed);
            let mut sample: Vec<(usize, bool)> = index::sample(&mut rng, pos.len(), cfg.per_class)
                .into_iter()
                .map(|k| (pos[k], true))
                .chain(
                    index::sample(&mut rng, neg.len(), cfg.per_class)
                        .into_iter()
                        .map(|k| (neg[k], false)),
                )
                .collect();
            sample.shuffle(&mut rng);
            if cfg.permute_labels {
                let mut labels: Vec<bool> = sample.iter().map(|s| s.1).collect();
                labels.shuffle(&mut rng);
                sample.iter_mut().zip(labels).for_each(|(s, l)| s.1 = l);
            }
            let (train, test) = sample.split_at(n_train);
            let x: Vec<Vec<f64>> = train.iter().map(|&(i, _)| table.row(i).to_vec()).collect();
            let y: Vec<usize> = train.iter().map(|&(_, l)| usize::from(l)).collect();
            let forest_cfg = ForestConfig {
                seed: child_seed(seed, 1),
                ..cfg.forest.clone()
            };
            let truth: Vec<bool> = test.iter().map(|s| s.1).collect();
            let predicted: Vec<bool> = match Forest::fit_classifier(&x, &y, &forest_cfg) {
                Ok(forest) => test
                    .iter()
                    .map(|&(i, _)| forest.predict(table.row(i)).map(|c| c == 1))
                    .collect::<Result<_>>()?,
                // A training split holding one class only predicts that class.
                Err(Error::Insufficient(_)) => vec![y[0] == 1; test.len()],
                Err(e) => return Err(e),
            };
            Ok(f1_score(&truth, &predicted))
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(CategoryReport {
        target: target.to_string(),
        mean_f1: f1.iter().sum::<f64>() / f1.len() as f64,
        f1,
        positives_available: pos.len(),
        negatives_available: neg.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_by_hand() {
        let t = [true, true, false, false];
        assert_eq!(f1_score(&t, &[true, false, true, false]), 0.5);
        assert_eq!(f1_score(&t, &t), 1.0);
        assert_eq!(f1_score(&t, &[false; 4]), 0.0);
        assert_eq!(f1_score(&[false], &[false]), 1.0);
    }
}
