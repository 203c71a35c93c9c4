//! Latent scores from pairwise preferences under `Pr(a beats b) = s_a / (s_a + s_b)`.
//!
//! Fitted with the minorization-maximization update
//! `s_i <- W_i / sum_j n_ij / (s_i + s_j)`, applied to all items at once,
//! which never decreases the likelihood. An optional prior gives every item
//! `prior` extra wins and `prior` extra losses against a fixed anchor with
//! score 1, which keeps the estimate finite when the data alone do not.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PlConfig {
    /// Stop once no log-score moves by more than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Pseudo-count of wins and of losses against the anchor, per item.
    pub prior: f64,
}

impl Default for PlConfig {
    fn default() -> Self {
        PlConfig {
            tol: 1e-8,
            max_iter: 10_000,
            prior: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlScores {
    /// Positive scores, scaled so that their logs sum to zero.
    pub scores: BTreeMap<String, f64>,
    /// Log-likelihood at the fitted point, prior terms included.
    pub log_likelihood: f64,
    /// Log-likelihood before the first update and after every update.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl PlScores {
    /// Model probability that `a` beats `b`.
    pub fn win_probability(&self, a: &str, b: &str) -> Option<f64> {
        let (sa, sb) = (self.scores.get(a)?, self.scores.get(b)?);
        Some(sa / (sa + sb))
    }
}

/// Tallied comparisons over items `0..n`.
struct Tally {
    wins: Vec<f64>,
    /// `(i, j, n_ij)` with `i < j`: how often the two met, either way round.
    meetings: Vec<(usize, usize, f64)>,
    /// `(winner, loser, count)`.
    outcomes: Vec<(usize, usize, f64)>,
}

fn tally(n: usize, pairs: &[(usize, usize)]) -> Tally {
    let mut wins = vec![0.0; n];
    let mut meet: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut out: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(w, l) in pairs {
        wins[w] += 1.0;
        *meet.entry((w.min(l), w.max(l))).or_default() += 1.0;
        *out.entry((w, l)).or_default() += 1.0;
    }
    Tally {
        wins,
        meetings: meet.into_iter().map(|((i, j), c)| (i, j, c)).collect(),
        outcomes: out.into_iter().map(|((w, l), c)| (w, l, c)).collect(),
    }
}

fn log_likelihood(t: &Tally, s: &[f64], prior: f64) -> f64 {
    let data: f64 = t
        .outcomes
        .iter()
        .map(|&(w, l, c)| c * (s[w].ln() - (s[w] + s[l]).ln()))
        .sum();
    let anchor: f64 = if prior > 0.0 {
        s.iter()
            .map(|&x| prior * (x.ln() - 2.0 * (x + 1.0).ln()))
            .sum()
    } else {
        0.0
    };
    data + anchor
}

/// Whether every item can reach every other along "beat" edges, the
/// condition under which the unregularized maximum exists.
fn strongly_connected(n: usize, pairs: &[(usize, usize)]) -> bool {
    let reach = |forward: bool| {
        let mut adj = vec![Vec::new(); n];
        for &(w, l) in pairs {
            if forward {
                adj[w].push(l);
            } else {
                adj[l].push(w);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    reach(true) && reach(false)
}

/// Number of connected components when comparisons are undirected edges.
fn components(n: usize, pairs: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

/// The `c` maximizing the anchor terms `sum_i log(c s_i) - 2 log(c s_i + 1)`,
/// i.e. the root of `sum_i (1 - c s_i) / (1 + c s_i)`, found by bisection on `log c`.
fn best_scale(s: &[f64]) -> f64 {
    let slope = |t: f64| {
        let c = t.exp();
        s.iter()
            .map(|&x| (1.0 - c * x) / (1.0 + c * x))
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Fit scores to `(winner, loser)` pairs.
pub fn fit_plackett_luce<'a, I>(comparisons: I, cfg: &PlConfig) -> Result<PlScores>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    if !(cfg.prior >= 0.0 && cfg.prior.is_finite()) {
        return Err(Error::invalid("prior must be a non-negative number"));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let raw: Vec<(&str, &str)> = comparisons.into_iter().collect();
    if raw.is_empty() {
        return Err(Error::Insufficient("no comparisons".into()));
    }
    let ids: Vec<&str> = raw
        .iter()
        .flat_map(|&(w, l)| [w, l])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index = |id: &str| ids.binary_search(&id).expect("id collected above");
    let mut pairs = Vec::with_capacity(raw.len());
    for &(w, l) in &raw {
        if w == l {
            return Err(Error::invalid(format!("`{w}` is compared with itself")));
        }
        pairs.push((index(w), index(l)));
    }
    let n = ids.len();
    let mut warnings = Vec::new();
    if cfg.prior == 0.0 {
        if !strongly_connected(n, &pairs) {
            return Err(Error::Undefined(
                "without a prior, scores need every item to both beat and lose to the rest, directly or \
                 through others; the comparisons do not connect that way"
                    .into(),
            ));
        }
    } else {
        let k = components(n, &pairs);
        if k > 1 {
            warnings.push(format!(
                "comparison graph has {k} disconnected parts; their relative scale comes from the prior alone"
            ));
        }
    }

    let t = tally(n, &pairs);
    let mut s = vec![1.0; n];
    let mut trace = vec![log_likelihood(&t, &s, cfg.prior)];
    let mut converged = false;
    let mut iterations = 0;
    let mut denom = vec![0.0; n];
    while iterations < cfg.max_iter {
        iterations += 1;
        denom.iter_mut().for_each(|d| *d = 0.0);
        for &(i, j, c) in &t.meetings {
            let r = c / (s[i] + s[j]);
            denom[i] += r;
            denom[j] += r;
        }
        let mut next: Vec<f64> = (0..n)
            .map(|i| {
                let num = t.wins[i] + cfg.prior;
                let den = denom[i] + 2.0 * cfg.prior / (s[i] + 1.0);
                num / den
            })
            .collect();
        if cfg.prior == 0.0 {
            // Only ratios are identified; keep the geometric mean at 1.
            let g = next.iter().map(|x| x.ln()).sum::<f64>() / n as f64;
            next.iter_mut().for_each(|x| *x /= g.exp());
        } else {
            // The data fix only ratios and the weak anchor terms alone fix the
            // overall scale, which the update above approaches very slowly.
            // Rescaling leaves the data terms unchanged, so moving straight to
            // the best scale can only raise the likelihood.
            let c = best_scale(&next);
            next.iter_mut().for_each(|x| *x *= c);
        }
        let change = s
            .iter()
            .zip(&next)
            .map(|(a, b)| (a.ln() - b.ln()).abs())
            .fold(0.0, f64::max);
        s = next;
        trace.push(log_likelihood(&t, &s, cfg.prior));
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!("not converged after {iterations} iterations"));
    }

    let log_likelihood = *trace.last().expect("trace starts non-empty");
    let g = s.iter().map(|x| x.ln()).sum::<f64>() / n as f64;
    let scores = ids
        .iter()
        .zip(&s)
        .map(|(id, x)| (id.to_string(), (x.ln() - g).exp()))
        .collect();
    Ok(PlScores {
        scores,
        log_likelihood,
        trace,
        iterations,
        converged,
        warnings,
    })
}
