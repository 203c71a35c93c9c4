//! Skip-gram with negative sampling over walk corpora.
//!
//! Per (center, context) pair the loss is
//! `-log s(u.v) - sum_k log s(-u.n_k)` with `u` the center's input vector,
//! `v` the context's output vector and `n_k` output vectors of nodes drawn
//! from the unigram distribution raised to 3/4.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rayon::prelude::*;

use super::alias::AliasTable;
use crate::embedding::{dot, EmbeddingTable, Provenance};
use crate::error::{Error, Result};
use crate::seed::{child_seed, rng_from};

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    /// Maximum context distance; each center draws its window from `1..=window`.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly towards zero.
    pub learning_rate: f64,
    pub seed: u64,
    /// 1 is the reproducible single-threaded mode. More workers share the
    /// parameters without locking and are not bit-for-bit reproducible.
    pub workers: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 128,
            window: 10,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
            workers: 1,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::invalid("embedding dimension must be at least 2"));
        }
        if self.negatives < 1 {
            return Err(Error::invalid("at least one negative sample is required"));
        }
        if self.window < 1 || self.epochs < 1 || self.workers < 1 {
            return Err(Error::invalid(
                "window, epochs and workers must be positive",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

/// Token sequences over a fixed vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    vocab: Vec<String>,
    counts: Vec<u64>,
    sequences: Vec<Vec<u32>>,
}

impl Corpus {
    /// The vocabulary is every distinct token, in ascending order.
    pub fn from_sequences<S: AsRef<str>>(sequences: &[Vec<S>]) -> Self {
        let mut index: BTreeMap<&str, u32> = BTreeMap::new();
        for s in sequences {
            for tok in s {
                index.entry(tok.as_ref()).or_insert(0);
            }
        }
        for (i, v) in index.values_mut().enumerate() {
            *v = i as u32;
        }
        let vocab: Vec<String> = index.keys().map(|s| s.to_string()).collect();
        let mut counts = vec![0u64; vocab.len()];
        let sequences: Vec<Vec<u32>> = sequences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| {
                        let i = index[t.as_ref()];
                        counts[i as usize] += 1;
                        i
                    })
                    .collect()
            })
            .collect();
        Corpus {
            vocab,
            counts,
            sequences,
        }
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sequences(&self) -> &[Vec<u32>] {
        &self.sequences
    }

    pub fn n_tokens(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Draws negatives with probability proportional to `count^0.75`.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    table: AliasTable,
}

impl NegativeSampler {
    pub const POWER: f64 = 0.75;

    pub fn new(counts: &[u64]) -> Self {
        let w: Vec<f64> = counts
            .iter()
            .map(|&c| (c as f64).powf(Self::POWER))
            .collect();
        NegativeSampler {
            table: AliasTable::new(&w),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.table.sample(rng) as u32
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.table.probabilities()
    }
}

/// `log(sigmoid(x))` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Loss of one positive pair and its negatives.
pub fn pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    -log_sigmoid(dot(center, context))
        - negatives
            .iter()
            .map(|n| log_sigmoid(-dot(center, n)))
            .sum::<f64>()
}

/// Gradients of [`pair_loss`] with respect to each input vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn pair_gradient(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let pos = dot(center, context);
    // d/dx -log s(x) = s(x) - 1 ; d/dx -log s(-x) = s(x)
    let g_pos = sigmoid(pos) - 1.0;
    let mut d_center: Vec<f64> = context.iter().map(|v| g_pos * v).collect();
    let d_context: Vec<f64> = center.iter().map(|u| g_pos * u).collect();
    let mut d_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g = sigmoid(dot(center, n));
        d_center
            .iter_mut()
            .zip(n.iter())
            .for_each(|(d, x)| *d += g * x);
        d_negs.push(center.iter().map(|u| g * u).collect());
    }
    PairGradient {
        loss: pair_loss(center, context, negatives),
        center: d_center,
        context: d_context,
        negatives: d_negs,
    }
}

/// Row-major parameter storage the training kernel reads and updates.
trait Params {
    fn read(&self, row: usize, out: &mut [f64]);
    fn dot_row(&self, row: usize, x: &[f64]) -> f64;
    /// `row += alpha * x`
    fn axpy(&mut self, row: usize, alpha: f64, x: &[f64]);
}

struct Dense<'a> {
    data: &'a mut [f64],
    dim: usize,
}

impl Params for Dense<'_> {
    fn read(&self, row: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.data[row * self.dim..(row + 1) * self.dim]);
    }

    fn dot_row(&self, row: usize, x: &[f64]) -> f64 {
        dot(&self.data[row * self.dim..(row + 1) * self.dim], x)
    }

    fn axpy(&mut self, row: usize, alpha: f64, x: &[f64]) {
        for (r, v) in self.data[row * self.dim..(row + 1) * self.dim]
            .iter_mut()
            .zip(x)
        {
            *r += alpha * v;
        }
    }
}

/// Lock-free shared view for multi-worker training; concurrent updates to
/// the same row may interleave.
#[derive(Clone, Copy)]
struct Shared<'a> {
    data: &'a [AtomicU64],
    dim: usize,
}

impl Shared<'_> {
    fn cell(&self, row: usize, k: usize) -> &AtomicU64 {
        &self.data[row * self.dim + k]
    }
}

impl Params for Shared<'_> {
    fn read(&self, row: usize, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = f64::from_bits(self.cell(row, k).load(Ordering::Relaxed));
        }
    }

    fn dot_row(&self, row: usize, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(k, v)| f64::from_bits(self.cell(row, k).load(Ordering::Relaxed)) * v)
            .sum()
    }

    fn axpy(&mut self, row: usize, alpha: f64, x: &[f64]) {
        for (k, v) in x.iter().enumerate() {
            let c = self.cell(row, k);
            let cur = f64::from_bits(c.load(Ordering::Relaxed));
            c.store((cur + alpha * v).to_bits(), Ordering::Relaxed);
        }
    }
}

/// Progress of one worker through the linearly decaying schedule.
struct Schedule {
    lr0: f64,
    total: f64,
}

impl Schedule {
    fn rate(&self, done: u64) -> f64 {
        (self.lr0 * (1.0 - done as f64 / (self.total + 1.0))).max(self.lr0 * 1e-4)
    }
}

#[derive(Default)]
struct EpochStats {
    loss: f64,
    pairs: u64,
}

impl EpochStats {
    fn mean(&self) -> f64 {
        self.loss / self.pairs.max(1) as f64
    }
}

/// Corpus loss under the current parameters, without updating them.
fn score<P: Params>(
    corpus: &Corpus,
    cfg: &SgnsConfig,
    sampler: &NegativeSampler,
    input: &mut P,
    output: &mut P,
) -> f64 {
    let schedule = Schedule {
        lr0: 0.0,
        total: 0.0,
    };
    let mut rng = rng_from(child_seed(cfg.seed, u64::MAX));
    train_sequences(
        &corpus.sequences,
        cfg,
        sampler,
        input,
        output,
        &schedule,
        &mut 0,
        &mut rng,
        false,
    )
    .mean()
}

#[allow(clippy::too_many_arguments)]
fn train_sequences<P: Params, R: Rng>(
    sequences: &[Vec<u32>],
    cfg: &SgnsConfig,
    sampler: &NegativeSampler,
    input: &mut P,
    output: &mut P,
    schedule: &Schedule,
    done: &mut u64,
    rng: &mut R,
    update: bool,
) -> EpochStats {
    let dim = cfg.dim;
    let mut u = vec![0.0; dim];
    let mut grad_u = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut stats = EpochStats::default();
    for seq in sequences {
        let lr = schedule.rate(*done);
        for (pos, &center) in seq.iter().enumerate() {
            let b = rng.random_range(1..=cfg.window);
            let lo = pos.saturating_sub(b);
            let hi = (pos + b).min(seq.len() - 1);
            for (cpos, &context) in seq.iter().enumerate().take(hi + 1).skip(lo) {
                if cpos == pos {
                    continue;
                }
                input.read(center as usize, &mut u);
                grad_u.iter_mut().for_each(|g| *g = 0.0);
                for k in 0..=cfg.negatives {
                    let (target, label) = if k == 0 {
                        (context, 1.0)
                    } else {
                        let n = sampler.sample(rng);
                        if n == context {
                            continue;
                        }
                        (n, 0.0)
                    };
                    let f = output.dot_row(target as usize, &u);
                    stats.loss -= if label > 0.0 {
                        log_sigmoid(f)
                    } else {
                        log_sigmoid(-f)
                    };
                    if !update {
                        continue;
                    }
                    let g = (label - sigmoid(f)) * lr;
                    output.read(target as usize, &mut v);
                    grad_u.iter_mut().zip(&v).for_each(|(a, b)| *a += g * b);
                    output.axpy(target as usize, g, &u);
                }
                if update {
                    input.axpy(center as usize, 1.0, &grad_u);
                }
                stats.pairs += 1;
            }
        }
        *done += seq.len() as u64;
    }
    stats
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean per-pair loss over the corpus after each epoch, always scored on
    /// the same draw of windows and negatives.
    pub epoch_losses: Vec<f64>,
    /// Mean per-pair loss seen while training each epoch, before each update.
    pub running_losses: Vec<f64>,
    pub pairs_per_epoch: u64,
}

/// Train input vectors for every vocabulary entry of `corpus`.
pub fn train_sgns(corpus: &Corpus, cfg: &SgnsConfig) -> Result<(EmbeddingTable, TrainReport)> {
    cfg.validate()?;
    if corpus.sequences.is_empty() || corpus.n_tokens() == 0 {
        return Err(Error::Insufficient("no walks to train on".into()));
    }
    if corpus.vocab.len() < cfg.negatives + 1 {
        return Err(Error::Insufficient(format!(
            "vocabulary of {} is smaller than negatives + 1 = {}",
            corpus.vocab.len(),
            cfg.negatives + 1
        )));
    }
    let n = corpus.vocab.len();
    let dim = cfg.dim;
    let mut init_rng = rng_from(child_seed(cfg.seed, 0));
    let mut input: Vec<f64> = (0..n * dim)
        .map(|_| (init_rng.random::<f64>() - 0.5) / dim as f64)
        .collect();
    let mut output = vec![0.0; n * dim];
    let sampler = NegativeSampler::new(&corpus.counts);
    let schedule = Schedule {
        lr0: cfg.learning_rate,
        total: (corpus.n_tokens() * cfg.epochs as u64) as f64,
    };

    let mut report = TrainReport::default();
    if cfg.workers == 1 {
        let mut rng = rng_from(child_seed(cfg.seed, 1));
        let mut done = 0;
        for _ in 0..cfg.epochs {
            let stats = train_sequences(
                &corpus.sequences,
                cfg,
                &sampler,
                &mut Dense {
                    data: &mut input,
                    dim,
                },
                &mut Dense {
                    data: &mut output,
                    dim,
                },
                &schedule,
                &mut done,
                &mut rng,
                true,
            );
            report.pairs_per_epoch = stats.pairs;
            report.running_losses.push(stats.mean());
            let mut inp = Dense {
                data: &mut input,
                dim,
            };
            let mut out = Dense {
                data: &mut output,
                dim,
            };
            report
                .epoch_losses
                .push(score(corpus, cfg, &sampler, &mut inp, &mut out));
        }
    } else {
        let shared_in: Vec<AtomicU64> = input.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        let shared_out: Vec<AtomicU64> =
            output.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        let chunk = corpus.sequences.len().div_ceil(cfg.workers);
        let chunks: Vec<&[Vec<u32>]> = corpus.sequences.chunks(chunk).collect();
        // Each worker walks its own share of the global schedule.
        let worker_schedule = Schedule {
            lr0: schedule.lr0,
            total: schedule.total / chunks.len() as f64,
        };
        for epoch in 0..cfg.epochs {
            let stats: Vec<EpochStats> = chunks
                .par_iter()
                .enumerate()
                .map(|(w, seqs)| {
                    let mut rng = rng_from(child_seed(
                        cfg.seed,
                        ((epoch as u64) << 32) | (w as u64 + 2),
                    ));
                    let tokens: u64 = seqs.iter().map(|s| s.len() as u64).sum();
                    let mut done = tokens * epoch as u64;
                    let mut inp = Shared {
                        data: &shared_in,
                        dim,
                    };
                    let mut out = Shared {
                        data: &shared_out,
                        dim,
                    };
                    train_sequences(
                        seqs,
                        cfg,
                        &sampler,
                        &mut inp,
                        &mut out,
                        &worker_schedule,
                        &mut done,
                        &mut rng,
                        true,
                    )
                })
                .collect();
            let loss: f64 = stats.iter().map(|s| s.loss).sum();
            let pairs: u64 = stats.iter().map(|s| s.pairs).sum();
            report.pairs_per_epoch = pairs;
            report.running_losses.push(loss / pairs.max(1) as f64);
            let mut inp = Shared {
                data: &shared_in,
                dim,
            };
            let mut out = Shared {
                data: &shared_out,
                dim,
            };
            report
                .epoch_losses
                .push(score(corpus, cfg, &sampler, &mut inp, &mut out));
        }
        input = shared_in
            .iter()
            .map(|a| f64::from_bits(a.load(Ordering::Relaxed)))
            .collect();
    }

    let entries = corpus
        .vocab
        .iter()
        .cloned()
        .zip(input.chunks_exact(dim).map(<[f64]>::to_vec));
    let table = EmbeddingTable::from_entries(dim, Provenance::Rec, entries)?;
    Ok((table, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_helpers_are_stable() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(log_sigmoid(-800.0).is_finite());
        assert!((log_sigmoid(800.0)).abs() < 1e-300);
        assert!((log_sigmoid(1.3) - sigmoid(1.3).ln()).abs() < 1e-14);
    }

    #[test]
    fn vocabulary_too_small_is_fatal() {
        let corpus = Corpus::from_sequences(&[vec!["a", "b", "a", "c"]]);
        let cfg = SgnsConfig {
            dim: 4,
            negatives: 3,
            ..Default::default()
        };
        assert!(matches!(
            train_sgns(&corpus, &cfg),
            Err(Error::Insufficient(_))
        ));
        let cfg = SgnsConfig {
            dim: 4,
            negatives: 2,
            epochs: 1,
            ..Default::default()
        };
        assert!(train_sgns(&corpus, &cfg).is_ok());
    }

    #[test]
    fn corpus_counts_tokens() {
        let c = Corpus::from_sequences(&[vec!["b", "a", "b"], vec!["c"]]);
        assert_eq!(c.vocab(), ["a", "b", "c"]);
        assert_eq!(c.counts(), &[1, 2, 1]);
        assert_eq!(c.sequences(), &[vec![1, 0, 1], vec![2]]);
    }

    #[test]
    fn single_worker_training_is_deterministic() {
        let seqs: Vec<Vec<String>> = (0..40)
            .map(|i| {
                (0..20)
                    .map(|j| format!("n{}", (i * 7 + j * 3) % 13))
                    .collect()
            })
            .collect();
        let corpus = Corpus::from_sequences(&seqs);
        let cfg = SgnsConfig {
            dim: 8,
            epochs: 2,
            seed: 4,
            ..Default::default()
        };
        let (a, ra) = train_sgns(&corpus, &cfg).unwrap();
        let (b, rb) = train_sgns(&corpus, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(a.provenance(), Provenance::Rec);
        assert_eq!(a.dim(), 8);
    }

    #[test]
    fn multi_worker_training_produces_finite_vectors() {
        let seqs: Vec<Vec<String>> = (0..64)
            .map(|i| (0..20).map(|j| format!("n{}", (i * 5 + j) % 17)).collect())
            .collect();
        let corpus = Corpus::from_sequences(&seqs);
        let cfg = SgnsConfig {
            dim: 8,
            epochs: 2,
            workers: 4,
            ..Default::default()
        };
        let (t, report) = train_sgns(&corpus, &cfg).unwrap();
        assert_eq!(t.len(), 17);
        assert!(t.iter().all(|(_, v)| v.iter().all(|x| x.is_finite())));
        assert_eq!(report.epoch_losses.len(), 2);
    }
}
