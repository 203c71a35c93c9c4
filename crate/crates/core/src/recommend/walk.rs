//! Second-order biased random walks over the co-recommendation graph.
//!
//! Moving from `prev` to `cur`, the next node `x` is drawn with probability
//! proportional to `w(cur, x) * bias(prev, x)`, where the bias is `1/p` for
//! going back to `prev`, 1 for neighbors of `prev` and `1/q` otherwise.
//! `p = q = 1` reduces to a weight-proportional first-order walk.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::alias::AliasTable;
use super::graph::RecGraph;
use crate::error::{Error, Result};
use crate::seed::{child_seed, rng_from};
use crate::text;

#[derive(Clone, Debug, PartialEq)]
pub struct WalkConfig {
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub seed: u64,
    /// Largest `deg(prev) * deg(cur)` for which a dedicated second-order alias
    /// table is built; larger pairs fall back to rejection sampling.
    pub alias_cap: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            p: 1.0,
            q: 1.0,
            walk_length: 80,
            walks_per_node: 10,
            seed: 0,
            alias_cap: 1 << 20,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite() && self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::invalid("p and q must be positive and finite"));
        }
        if self.walk_length < 2 {
            return Err(Error::invalid("walk_length must be at least 2"));
        }
        Ok(())
    }

    fn is_first_order(&self) -> bool {
        self.p == 1.0 && self.q == 1.0
    }
}

/// Precomputed sampling state for one graph and one `(p, q)`.
pub struct Walker<'g> {
    graph: &'g RecGraph,
    inv_p: f64,
    inv_q: f64,
    max_bias: f64,
    first_order: Vec<Option<AliasTable>>,
    /// Indexed by directed edge position (see `RecGraph::edge_offset`).
    second_order: Vec<Option<AliasTable>>,
    first_order_only: bool,
}

impl<'g> Walker<'g> {
    pub fn new(graph: &'g RecGraph, cfg: &WalkConfig) -> Result<Self> {
        cfg.validate()?;
        let first_order: Vec<Option<AliasTable>> = (0..graph.n_nodes())
            .map(|u| {
                (graph.degree(u) > 0).then(|| {
                    let w: Vec<f64> = graph.weights(u).iter().map(|&w| w as f64).collect();
                    AliasTable::new(&w)
                })
            })
            .collect();
        let mut walker = Walker {
            graph,
            inv_p: 1.0 / cfg.p,
            inv_q: 1.0 / cfg.q,
            max_bias: (1.0 / cfg.p).max(1.0).max(1.0 / cfg.q),
            first_order,
            second_order: Vec::new(),
            first_order_only: cfg.is_first_order(),
        };
        if !walker.first_order_only {
            let tables: Vec<Vec<Option<AliasTable>>> = (0..graph.n_nodes())
                .into_par_iter()
                .map(|t| {
                    graph
                        .neighbors(t)
                        .iter()
                        .map(|&v| {
                            (graph.degree(t).saturating_mul(graph.degree(v)) <= cfg.alias_cap)
                                .then(|| AliasTable::new(&walker.biased_weights(t, v)))
                        })
                        .collect()
                })
                .collect();
            walker.second_order = tables.into_iter().flatten().collect();
            debug_assert_eq!(walker.second_order.len(), graph.n_directed_edges());
        }
        Ok(walker)
    }

    fn bias(&self, prev: usize, next: usize) -> f64 {
        if next == prev {
            self.inv_p
        } else if self.graph.has_edge(prev, next) {
            1.0
        } else {
            self.inv_q
        }
    }

    fn biased_weights(&self, prev: usize, cur: usize) -> Vec<f64> {
        self.graph
            .neighbors(cur)
            .iter()
            .zip(self.graph.weights(cur))
            .map(|(&x, &w)| w as f64 * self.bias(prev, x))
            .collect()
    }

    /// Exact next-step distribution as `(node, probability)` pairs.
    pub fn transition_probabilities(&self, prev: Option<usize>, cur: usize) -> Vec<(usize, f64)> {
        let w: Vec<f64> = match prev {
            Some(t) if !self.first_order_only => self.biased_weights(t, cur),
            _ => self.graph.weights(cur).iter().map(|&w| w as f64).collect(),
        };
        let total: f64 = w.iter().sum();
        self.graph
            .neighbors(cur)
            .iter()
            .zip(w)
            .map(|(&x, w)| (x, w / total))
            .collect()
    }

    /// Draw the adjacency position (within `cur`'s list) of the next node.
    /// `prev_edge` is the directed edge id that led into `cur`.
    fn step_position<R: Rng>(
        &self,
        prev: Option<(usize, usize)>,
        cur: usize,
        rng: &mut R,
    ) -> Option<usize> {
        let first = self.first_order[cur].as_ref()?;
        let Some((t, edge)) = prev.filter(|_| !self.first_order_only) else {
            return Some(first.sample(rng));
        };
        if let Some(table) = &self.second_order[edge] {
            return Some(table.sample(rng));
        }
        let nbrs = self.graph.neighbors(cur);
        loop {
            let k = first.sample(rng);
            if rng.random::<f64>() * self.max_bias < self.bias(t, nbrs[k]) {
                return Some(k);
            }
        }
    }

    /// Draw the next node after moving `prev -> cur`.
    pub fn step<R: Rng>(&self, prev: Option<usize>, cur: usize, rng: &mut R) -> Option<usize> {
        let prev_edge = prev.map(|t| {
            let k = self
                .graph
                .neighbors(t)
                .binary_search(&cur)
                .expect("walk moved along a missing edge");
            (t, self.graph.edge_offset(t) + k)
        });
        self.step_position(prev_edge, cur, rng)
            .map(|k| self.graph.neighbors(cur)[k])
    }

    /// One walk of at most `len` nodes from `start`.
    pub fn walk<R: Rng>(&self, start: usize, len: usize, rng: &mut R) -> Vec<usize> {
        let mut walk = Vec::with_capacity(len);
        walk.push(start);
        let mut prev: Option<(usize, usize)> = None;
        let mut cur = start;
        while walk.len() < len {
            let Some(k) = self.step_position(prev, cur, rng) else {
                break;
            };
            let next = self.graph.neighbors(cur)[k];
            prev = Some((cur, self.graph.edge_offset(cur) + k));
            cur = next;
            walk.push(cur);
        }
        walk
    }
}

/// `walks_per_node` rounds, each starting one walk at every node in a
/// freshly shuffled order. Walks use per-walk seeds, so the output does not
/// depend on the thread count.
pub fn generate_walks(graph: &RecGraph, cfg: &WalkConfig) -> Result<Vec<Vec<usize>>> {
    if graph.is_empty() {
        return Err(Error::Insufficient("cannot walk an empty graph".into()));
    }
    let walker = Walker::new(graph, cfg)?;
    let n = graph.n_nodes();
    let mut starts = Vec::with_capacity(n * cfg.walks_per_node);
    for round in 0..cfg.walks_per_node {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng_from(child_seed(cfg.seed, round as u64)));
        starts.extend(order);
    }
    let walk_seed = child_seed(cfg.seed, u64::MAX);
    Ok(starts
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            walker.walk(
                s,
                cfg.walk_length,
                &mut rng_from(child_seed(walk_seed, i as u64)),
            )
        })
        .collect())
}

pub fn walks_to_ids(graph: &RecGraph, walks: &[Vec<usize>]) -> Vec<Vec<String>> {
    walks
        .iter()
        .map(|w| w.iter().map(|&u| graph.node_id(u).to_owned()).collect())
        .collect()
}

/// One walk per line, node ids separated by spaces.
pub fn write_walks<W: Write, S: AsRef<str>>(mut w: W, walks: &[Vec<S>]) -> Result<()> {
    for walk in walks {
        let mut first = true;
        for id in walk {
            if !first {
                w.write_all(b" ")?;
            }
            first = false;
            w.write_all(id.as_ref().as_bytes())?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_walks<R: BufRead>(r: R) -> Result<Vec<Vec<String>>> {
    text::content_lines(r)
        .map(|l| l.map(|(_, s)| s.split_whitespace().map(str::to_owned).collect()))
        .collect()
}
