//! Random forests of CART trees for classification and regression.
//!
//! Trees are grown in parallel, each from its own seed derived from the
//! forest seed, and their outputs are combined in tree order, so a forest
//! and its predictions depend only on the data and the seed.

mod io;
mod tree;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::{child_seed, rng_from};
use tree::{GrowParams, Targets, Task};
pub use tree::{Node, Tree, COST_TOLERANCE};

/// How many features each split may look at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaxFeatures {
    /// `ceil(sqrt(p))`.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, p: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((p as f64).sqrt().ceil() as usize).max(1),
            MaxFeatures::All => p,
            MaxFeatures::Count(k) => k.clamp(1, p),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ForestKind {
    /// Original class labels, ascending; trees predict indices into this list.
    Classifier {
        classes: Vec<usize>,
    },
    Regressor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    kind: ForestKind,
    n_features: usize,
    trees: Vec<Tree>,
    /// Out-of-bag accuracy (classifier) or R² (regressor).
    oob: Option<f64>,
}

fn check_design(x: &[Vec<f64>], n_targets: usize) -> Result<usize> {
    if x.len() != n_targets {
        return Err(Error::invalid(format!(
            "{} feature rows but {} targets",
            x.len(),
            n_targets
        )));
    }
    if x.len() < 2 {
        return Err(Error::Insufficient(
            "a forest needs at least two samples".into(),
        ));
    }
    let p = x[0].len();
    if p == 0 {
        return Err(Error::invalid("samples have no features"));
    }
    for row in x {
        if row.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
    }
    Ok(p)
}

fn columns(x: &[Vec<f64>], p: usize) -> Vec<Vec<f64>> {
    (0..p).map(|j| x.iter().map(|r| r[j]).collect()).collect()
}

/// Trees plus, for each tree, which rows were left out of its sample.
fn grow_trees(
    cols: &[Vec<f64>],
    n: usize,
    targets: Targets,
    task: Task,
    cfg: &ForestConfig,
) -> Result<Vec<(Tree, Vec<bool>)>> {
    if cfg.n_trees == 0 {
        return Err(Error::invalid("n_trees must be positive"));
    }
    if cfg.min_leaf == 0 {
        return Err(Error::invalid("min_leaf must be positive"));
    }
    let params = GrowParams {
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf,
        max_features: cfg.max_features.resolve(cols.len()),
    };
    Ok((0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(child_seed(cfg.seed, t as u64));
            let mut rows: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut out_of_bag = vec![true; n];
            for &r in &rows {
                out_of_bag[r] = false;
            }
            let tree = Tree::grow(cols, targets, task, &mut rows, &params, &mut rng);
            (tree, out_of_bag)
        })
        .collect())
}

impl Forest {
    /// Fit a classifier. Labels may be any integers; at least two distinct ones are required.
    pub fn fit_classifier(x: &[Vec<f64>], y: &[usize], cfg: &ForestConfig) -> Result<Forest> {
        let p = check_design(x, y.len())?;
        let mut classes: Vec<usize> = y.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::Insufficient(
                "all samples have the same class".into(),
            ));
        }
        let encoded: Vec<usize> = y
            .iter()
            .map(|c| classes.binary_search(c).expect("label present"))
            .collect();
        let k = classes.len();
        let cols = columns(x, p);
        let grown = grow_trees(
            &cols,
            x.len(),
            Targets::Class(&encoded),
            Task::Classify { n_classes: k },
            cfg,
        )?;

        let mut votes = vec![vec![0.0; k]; x.len()];
        let mut seen = vec![false; x.len()];
        for (tree, oob) in &grown {
            for (i, row) in x.iter().enumerate() {
                if oob[i] {
                    seen[i] = true;
                    votes[i]
                        .iter_mut()
                        .zip(tree.leaf(row))
                        .for_each(|(a, b)| *a += b);
                }
            }
        }
        let scored: Vec<usize> = (0..x.len()).filter(|&i| seen[i]).collect();
        let oob = (!scored.is_empty()).then(|| {
            let hits = scored
                .iter()
                .filter(|&&i| argmax(&votes[i]) == encoded[i])
                .count();
            hits as f64 / scored.len() as f64
        });

        Ok(Forest {
            kind: ForestKind::Classifier { classes },
            n_features: p,
            trees: grown.into_iter().map(|(t, _)| t).collect(),
            oob,
        })
    }

    pub fn fit_regressor(x: &[Vec<f64>], y: &[f64], cfg: &ForestConfig) -> Result<Forest> {
        let p = check_design(x, y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite regression target"));
        }
        let cols = columns(x, p);
        let grown = grow_trees(&cols, x.len(), Targets::Value(y), Task::Regress, cfg)?;

        let mut sums = vec![0.0; x.len()];
        let mut counts = vec![0usize; x.len()];
        for (tree, oob) in &grown {
            for (i, row) in x.iter().enumerate() {
                if oob[i] {
                    sums[i] += tree.leaf(row)[0];
                    counts[i] += 1;
                }
            }
        }
        let pairs: Vec<(f64, f64)> = (0..x.len())
            .filter(|&i| counts[i] > 0)
            .map(|i| (y[i], sums[i] / counts[i] as f64))
            .collect();
        let oob = r_squared(&pairs);

        Ok(Forest {
            kind: ForestKind::Regressor,
            n_features: p,
            trees: grown.into_iter().map(|(t, _)| t).collect(),
            oob,
        })
    }

    pub fn kind(&self) -> &ForestKind {
        &self.kind
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Out-of-bag accuracy for classifiers, R² for regressors. `None` when no
    /// sample was ever left out, or the regression targets are constant.
    pub fn oob_score(&self) -> Option<f64> {
        self.oob
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        Ok(())
    }

    /// Mean of the trees' leaf class distributions, indexed like [`Forest::classes`].
    pub fn predict_proba(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_row(row)?;
        let ForestKind::Classifier { classes } = &self.kind else {
            return Err(Error::invalid("not a classifier"));
        };
        let mut p = vec![0.0; classes.len()];
        for t in &self.trees {
            p.iter_mut().zip(t.leaf(row)).for_each(|(a, b)| *a += b);
        }
        let n = self.trees.len() as f64;
        p.iter_mut().for_each(|v| *v /= n);
        Ok(p)
    }

    /// Most probable class; ties go to the smaller label.
    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        let p = self.predict_proba(row)?;
        Ok(self.classes()[argmax(&p)])
    }

    /// Mean of the trees' leaf values.
    pub fn predict_regress(&self, row: &[f64]) -> Result<f64> {
        self.check_row(row)?;
        if self.kind != ForestKind::Regressor {
            return Err(Error::invalid("not a regressor"));
        }
        let s: f64 = self.trees.iter().map(|t| t.leaf(row)[0]).sum();
        Ok(s / self.trees.len() as f64)
    }

    pub fn classes(&self) -> &[usize] {
        match &self.kind {
            ForestKind::Classifier { classes } => classes,
            ForestKind::Regressor => &[],
        }
    }
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Coefficient of determination over `(truth, prediction)` pairs; `None`
/// for an empty or constant truth.
pub fn r_squared(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let mean = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64;
    let sst: f64 = pairs.iter().map(|p| (p.0 - mean).powi(2)).sum();
    if sst == 0.0 {
        return None;
    }
    let sse: f64 = pairs.iter().map(|p| (p.0 - p.1).powi(2)).sum();
    Some(1.0 - sse / sst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_features_round_up() {
        assert_eq!(MaxFeatures::Sqrt.resolve(128), 12);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::Count(50).resolve(3), 3);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            Forest::fit_classifier(&x, &[3, 3], &ForestConfig::default()),
            Err(Error::Insufficient(_))
        ));
    }

    #[test]
    fn original_labels_are_returned() {
        let x = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        let f = Forest::fit_classifier(
            &x,
            &[7, 7, 42, 42],
            &ForestConfig {
                n_trees: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(f.classes(), &[7, 42]);
        assert_eq!(f.predict(&[0.5]).unwrap(), 7);
        assert_eq!(f.predict(&[10.5]).unwrap(), 42);
        assert!(f.predict(&[0.5, 1.0]).is_err());
        assert!(f.predict_regress(&[0.5]).is_err());
    }

    #[test]
    fn r_squared_edge_cases() {
        assert_eq!(r_squared(&[]), None);
        assert_eq!(r_squared(&[(1.0, 0.0), (1.0, 2.0)]), None);
        assert_eq!(r_squared(&[(0.0, 0.0), (2.0, 2.0)]), Some(1.0));
        assert_eq!(r_squared(&[(0.0, 1.0), (2.0, 1.0)]), Some(0.0));
    }
}
