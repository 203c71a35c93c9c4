//! A single CART tree grown on a (possibly repeated) subset of rows.

use rand::seq::SliceRandom;
use rand::Rng;

/// What a tree predicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Task {
    /// Class probabilities over `n_classes` classes encoded `0..n_classes`.
    Classify { n_classes: usize },
    /// A single real value.
    Regress,
}

#[derive(Clone, Copy)]
pub(crate) enum Targets<'a> {
    Class(&'a [usize]),
    Value(&'a [f64]),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Class probabilities, or a one-element mean for regression.
    Leaf(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub max_features: usize,
}

/// Best split found so far: weighted child impurity, feature, threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct SplitChoice {
    pub cost: f64,
    pub feature: usize,
    pub threshold: f64,
}

impl SplitChoice {
    /// Lower cost wins. Costs equal up to rounding are ties, which go to the
    /// lower feature and then the lower threshold.
    fn beats(&self, other: &Option<SplitChoice>) -> bool {
        let Some(o) = other else {
            return true;
        };
        let tol = COST_TOLERANCE * self.cost.abs().max(o.cost.abs()).max(1.0);
        if (self.cost - o.cost).abs() <= tol {
            (self.feature, self.threshold) < (o.feature, o.threshold)
        } else {
            self.cost < o.cost
        }
    }
}

/// Relative difference below which two split costs count as equal.
pub const COST_TOLERANCE: f64 = 1e-9;

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaf(&self, row: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub(crate) fn grow<R: Rng>(
        columns: &[Vec<f64>],
        targets: Targets,
        task: Task,
        rows: &mut [usize],
        params: &GrowParams,
        rng: &mut R,
    ) -> Tree {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow_node(columns, targets, task, rows, params, 0, rng);
        tree
    }

    #[allow(clippy::too_many_arguments)]
    fn grow_node<R: Rng>(
        &mut self,
        columns: &[Vec<f64>],
        targets: Targets,
        task: Task,
        rows: &mut [usize],
        params: &GrowParams,
        depth: usize,
        rng: &mut R,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(leaf_value(targets, task, rows));
        let can_split = !is_pure(targets, rows)
            && rows.len() >= 2 * params.min_leaf
            && params.max_depth.is_none_or(|d| depth < d);
        if !can_split {
            return id;
        }
        let Some(choice) = find_split(columns, targets, task, rows, params, rng) else {
            return id;
        };
        let col = &columns[choice.feature];
        let mid = partition(rows, |r| col[r] <= choice.threshold);
        let (l, r) = rows.split_at_mut(mid);
        let left = self.grow_node(columns, targets, task, l, params, depth + 1, rng);
        let right = self.grow_node(columns, targets, task, r, params, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left,
            right,
        };
        id
    }
}

/// Stable partition; returns the number of rows satisfying `pred`.
fn partition(rows: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let (yes, no): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| pred(r));
    let n = yes.len();
    rows[..n].copy_from_slice(&yes);
    rows[n..].copy_from_slice(&no);
    n
}

fn is_pure(targets: Targets, rows: &[usize]) -> bool {
    match targets {
        Targets::Class(y) => rows.iter().all(|&r| y[r] == y[rows[0]]),
        Targets::Value(y) => rows.iter().all(|&r| y[r] == y[rows[0]]),
    }
}

fn leaf_value(targets: Targets, task: Task, rows: &[usize]) -> Node {
    let n = rows.len() as f64;
    match (targets, task) {
        (Targets::Class(y), Task::Classify { n_classes }) => {
            let mut p = vec![0.0; n_classes];
            for &r in rows {
                p[y[r]] += 1.0;
            }
            p.iter_mut().for_each(|x| *x /= n);
            Node::Leaf(p)
        }
        (Targets::Value(y), Task::Regress) => {
            Node::Leaf(vec![rows.iter().map(|&r| y[r]).sum::<f64>() / n])
        }
        _ => unreachable!("targets do not match the task"),
    }
}

/// `n` times the Gini impurity of a class histogram.
pub(crate) fn gini_cost(counts: &[f64], n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    n - counts.iter().map(|c| c * c).sum::<f64>() / n
}

/// `n` times the variance of values with the given sum and sum of squares.
pub(crate) fn variance_cost(sum: f64, sum_sq: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    (sum_sq - sum * sum / n).max(0.0)
}

/// Midpoint of two consecutive distinct values, kept strictly below `b`.
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

/// Best split of `rows` on one feature, or `None` when it is constant there
/// or no threshold respects `min_leaf`.
pub(crate) fn best_split_on(
    column: &[f64],
    feature: usize,
    targets: Targets,
    task: Task,
    rows: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let mut order: Vec<(f64, usize)> = rows.iter().map(|&r| (column[r], r)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = order.len();
    let mut best: Option<SplitChoice> = None;
    match (targets, task) {
        (Targets::Class(y), Task::Classify { n_classes }) => {
            let mut left = vec![0.0; n_classes];
            let mut right = vec![0.0; n_classes];
            for &(_, r) in &order {
                right[y[r]] += 1.0;
            }
            for i in 0..n - 1 {
                let c = y[order[i].1];
                left[c] += 1.0;
                right[c] -= 1.0;
                let nl = i + 1;
                if order[i].0 == order[i + 1].0 || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let cost = gini_cost(&left, nl as f64) + gini_cost(&right, (n - nl) as f64);
                let cand = SplitChoice {
                    cost,
                    feature,
                    threshold: midpoint(order[i].0, order[i + 1].0),
                };
                if cand.beats(&best) {
                    best = Some(cand);
                }
            }
        }
        (Targets::Value(y), Task::Regress) => {
            let (mut ls, mut lq) = (0.0, 0.0);
            let rs_total: f64 = order.iter().map(|&(_, r)| y[r]).sum();
            let rq_total: f64 = order.iter().map(|&(_, r)| y[r] * y[r]).sum();
            for i in 0..n - 1 {
                let v = y[order[i].1];
                ls += v;
                lq += v * v;
                let nl = i + 1;
                if order[i].0 == order[i + 1].0 || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let cost = variance_cost(ls, lq, nl as f64)
                    + variance_cost(rs_total - ls, rq_total - lq, (n - nl) as f64);
                let cand = SplitChoice {
                    cost,
                    feature,
                    threshold: midpoint(order[i].0, order[i + 1].0),
                };
                if cand.beats(&best) {
                    best = Some(cand);
                }
            }
        }
        _ => unreachable!("targets do not match the task"),
    }
    best
}

/// Examine features in random order until `max_features` of them admit a
/// split (constant features do not count), and keep the best split.
fn find_split<R: Rng>(
    columns: &[Vec<f64>],
    targets: Targets,
    task: Task,
    rows: &[usize],
    params: &GrowParams,
    rng: &mut R,
) -> Option<SplitChoice> {
    let mut features: Vec<usize> = (0..columns.len()).collect();
    if params.max_features < columns.len() {
        features.shuffle(rng);
    }
    let mut best: Option<SplitChoice> = None;
    let mut usable = 0;
    for f in features {
        if usable >= params.max_features {
            break;
        }
        if let Some(c) = best_split_on(&columns[f], f, targets, task, rows, params.min_leaf) {
            usable += 1;
            if c.beats(&best) {
                best = Some(c);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn midpoint_stays_between() {
        assert_eq!(midpoint(1.0, 2.0), 1.5);
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert_eq!(midpoint(a, b), a);
    }

    #[test]
    fn cost_helpers() {
        assert_eq!(gini_cost(&[2.0, 2.0], 4.0), 2.0);
        assert_eq!(gini_cost(&[4.0, 0.0], 4.0), 0.0);
        assert_eq!(variance_cost(6.0, 14.0, 3.0), 2.0); // 1,2,3
    }

    #[test]
    fn grows_until_pure() {
        let columns = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let y = [0, 1, 0, 1];
        let mut rows = vec![0, 1, 2, 3];
        let params = GrowParams {
            max_depth: None,
            min_leaf: 1,
            max_features: 1,
        };
        let t = Tree::grow(
            &columns,
            Targets::Class(&y),
            Task::Classify { n_classes: 2 },
            &mut rows,
            &params,
            &mut rng_from(0),
        );
        for (i, &label) in y.iter().enumerate() {
            assert_eq!(t.leaf(&[columns[0][i]])[label], 1.0);
        }
    }

    #[test]
    fn depth_limit_is_respected() {
        let columns = vec![(0..16).map(f64::from).collect::<Vec<_>>()];
        let y: Vec<f64> = (0..16).map(|i| f64::from(i * i)).collect();
        let mut rows: Vec<usize> = (0..16).collect();
        let params = GrowParams {
            max_depth: Some(2),
            min_leaf: 1,
            max_features: 1,
        };
        let t = Tree::grow(
            &columns,
            Targets::Value(&y),
            Task::Regress,
            &mut rows,
            &params,
            &mut rng_from(0),
        );
        assert_eq!(t.depth(), 2);
        assert_eq!(t.nodes().len(), 7);
    }
}
