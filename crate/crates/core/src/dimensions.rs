//! Social dimensions: directions in the social-sharing space defined by
//! pairs of subreddits, channel scores along them, transfer of those scores
//! to other embeddings, and stratified sampling of channels by score.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::index;

use crate::embedding::{cosine_similarity, norm, EmbeddingTable, Provenance};
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig};
use crate::seed::rng_from;
use crate::text::{self, fmt_real, parse_real};

pub const DEFAULT_DIM_EDGES: [f64; 6] = [-5.0, -1.25, -0.5, 0.5, 1.25, 5.0];
pub const DEFAULT_NESS_EDGES: [f64; 3] = [-5.0, 0.0, 5.0];
pub const DEFAULT_PER_BIN: usize = 10;
/// Fewest channels shared by the target embedding and the training scores.
pub const MIN_TRANSFER_OVERLAP: usize = 100;

/// A `(low, high)` pair of subreddits differing along one dimension.
pub type SeedPair = (String, String);

/// Seed pairs grouped by dimension name, in order of first appearance.
pub fn parse_dimension_seeds<R: BufRead>(reader: R) -> Result<Vec<(String, Vec<SeedPair>)>> {
    let mut out: Vec<(String, Vec<SeedPair>)> = Vec::new();
    for line in text::content_lines(reader) {
        let (n, line) = line?;
        if line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [name, low, high] = fields[..] else {
            return Err(Error::parse(
                n,
                "expected `dimension,low_subreddit,high_subreddit`",
            ));
        };
        if name.is_empty() || low.is_empty() || high.is_empty() {
            return Err(Error::parse(n, "empty field"));
        }
        let pair = (low.to_string(), high.to_string());
        match out.iter_mut().find(|(d, _)| d == name) {
            Some((_, pairs)) => pairs.push(pair),
            None => out.push((name.to_string(), vec![pair])),
        }
    }
    Ok(out)
}

/// A named unit direction in the subreddit space.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionSpec {
    pub name: String,
    pub pairs: Vec<SeedPair>,
    pub vector: Vec<f64>,
}

fn pair_vectors<'a>(
    s: &'a EmbeddingTable,
    pairs: &[SeedPair],
) -> Result<Vec<(&'a [f64], &'a [f64])>> {
    if pairs.is_empty() {
        return Err(Error::invalid("a dimension needs at least one seed pair"));
    }
    pairs
        .iter()
        .map(|(lo, hi)| {
            let l = s.get(lo).ok_or_else(|| Error::UnknownId(lo.clone()))?;
            let h = s.get(hi).ok_or_else(|| Error::UnknownId(hi.clone()))?;
            Ok((l, h))
        })
        .collect()
}

fn unit_mean(name: &str, d: usize, terms: impl Iterator<Item = Vec<f64>>) -> Result<Vec<f64>> {
    let mut v = vec![0.0; d];
    let mut k = 0.0;
    for t in terms {
        v.iter_mut().zip(&t).for_each(|(a, b)| *a += b);
        k += 1.0;
    }
    v.iter_mut().for_each(|x| *x /= k);
    let n = norm(&v);
    if n == 0.0 {
        return Err(Error::Undefined(format!(
            "dimension `{name}` has a zero direction"
        )));
    }
    v.iter_mut().for_each(|x| *x /= n);
    Ok(v)
}

/// Unit-normalized mean of `S[high] - S[low]` over the seed pairs.
pub fn build_dimension(
    s: &EmbeddingTable,
    name: &str,
    pairs: &[SeedPair],
) -> Result<DimensionSpec> {
    let vecs = pair_vectors(s, pairs)?;
    let diffs = vecs
        .iter()
        .map(|(l, h)| h.iter().zip(l.iter()).map(|(a, b)| a - b).collect());
    Ok(DimensionSpec {
        name: name.to_string(),
        pairs: pairs.to_vec(),
        vector: unit_mean(name, s.dim(), diffs)?,
    })
}

/// Companion "-ness" direction: the unit-normalized mean of
/// `S[high] + S[low]`, i.e. what both ends of the dimension have in common.
pub fn build_ness_dimension(
    s: &EmbeddingTable,
    name: &str,
    pairs: &[SeedPair],
) -> Result<DimensionSpec> {
    let vecs = pair_vectors(s, pairs)?;
    let sums = vecs
        .iter()
        .map(|(l, h)| h.iter().zip(l.iter()).map(|(a, b)| a + b).collect());
    let name = ness_name(name);
    Ok(DimensionSpec {
        vector: unit_mean(&name, s.dim(), sums)?,
        name,
        pairs: pairs.to_vec(),
    })
}

pub fn ness_name(name: &str) -> String {
    format!("{name}-ness")
}

/// Per-channel values along one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionScores {
    pub dimension: String,
    pub scores: BTreeMap<String, f64>,
    pub standardized: bool,
}

/// Cosine similarity of every channel with the dimension direction. Channels
/// with a zero vector have no score and are returned separately.
pub fn project(c: &EmbeddingTable, dim: &DimensionSpec) -> Result<(DimensionScores, Vec<String>)> {
    if matches!(c.provenance(), Provenance::Con | Provenance::Rec) {
        return Err(Error::invalid(format!(
            "dimensions live in the social-sharing space; cannot project a {} table",
            c.provenance()
        )));
    }
    if c.dim() != dim.vector.len() {
        return Err(Error::DimensionMismatch {
            expected: dim.vector.len(),
            got: c.dim(),
        });
    }
    let mut scores = BTreeMap::new();
    let mut omitted = Vec::new();
    for (id, v) in c.iter() {
        match cosine_similarity(v, &dim.vector) {
            Some(s) => {
                scores.insert(id.to_string(), s);
            }
            None => omitted.push(id.to_string()),
        }
    }
    Ok((
        DimensionScores {
            dimension: dim.name.clone(),
            scores,
            standardized: false,
        },
        omitted,
    ))
}

impl DimensionScores {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Mean and population standard deviation.
    pub fn moments(&self) -> (f64, f64) {
        let n = self.scores.len() as f64;
        let mean = self.scores.values().sum::<f64>() / n;
        let var = self
            .scores
            .values()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / n;
        (mean, var.sqrt())
    }

    /// Shift to mean 0 and scale to population standard deviation 1.
    pub fn standardize(&self) -> Result<DimensionScores> {
        if self.scores.len() < 2 {
            return Err(Error::Insufficient(
                "standardizing needs at least two scores".into(),
            ));
        }
        let (mean, sd) = self.moments();
        if sd == 0.0 {
            return Err(Error::Undefined(format!(
                "scores on `{}` are constant and cannot be standardized",
                self.dimension
            )));
        }
        Ok(DimensionScores {
            dimension: self.dimension.clone(),
            scores: self
                .scores
                .iter()
                .map(|(k, v)| (k.clone(), (v - mean) / sd))
                .collect(),
            standardized: true,
        })
    }

    /// ```text
    /// dimension partisan standardized true
    /// channel_a,0.25
    /// ```
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "dimension {} standardized {}",
            self.dimension, self.standardized
        )?;
        for (id, s) in &self.scores {
            writeln!(w, "{id},{}", fmt_real(*s))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<DimensionScores> {
        let mut lines = text::content_lines(reader);
        let (n, head) = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::invalid("empty scores file"))?;
        let h: Vec<&str> = head.split_whitespace().collect();
        let (dimension, standardized) = match h[..] {
            ["dimension", name, "standardized", flag] => (
                name.to_string(),
                flag.parse::<bool>()
                    .map_err(|_| Error::parse(n, "standardized flag must be true or false"))?,
            ),
            _ => {
                return Err(Error::parse(
                    n,
                    "expected `dimension <name> standardized <flag>`",
                ))
            }
        };
        let mut scores = BTreeMap::new();
        for line in lines {
            let (n, line) = line?;
            let (id, v) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(n, "expected `channel_id,score`"))?;
            let id = id.trim();
            if id.is_empty() {
                return Err(Error::parse(n, "empty channel id"));
            }
            if scores
                .insert(id.to_string(), parse_real(v.trim(), n)?)
                .is_some()
            {
                return Err(Error::parse(n, format!("duplicate channel `{id}`")));
            }
        }
        Ok(DimensionScores {
            dimension,
            scores,
            standardized,
        })
    }
}

/// Scores predicted for a new embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct Transfer {
    /// Predictions for every channel of the target table, not standardized.
    pub scores: DimensionScores,
    pub n_train: usize,
    /// Out-of-bag R² of the regressor; `None` for constant training scores.
    pub oob_r2: Option<f64>,
}

/// Fit a forest regressor from `target` vectors to `train` scores on the
/// shared channels, then predict a score for every channel of `target`.
pub fn transfer_dimension(
    target: &EmbeddingTable,
    train: &DimensionScores,
    cfg: &ForestConfig,
) -> Result<Transfer> {
    let (x, y): (Vec<Vec<f64>>, Vec<f64>) = train
        .scores
        .iter()
        .filter_map(|(id, s)| target.get(id).map(|v| (v.to_vec(), *s)))
        .unzip();
    if x.len() < MIN_TRANSFER_OVERLAP {
        return Err(Error::Insufficient(format!(
            "only {} channels have both a target vector and a `{}` score; at least {MIN_TRANSFER_OVERLAP} are needed",
            x.len(),
            train.dimension
        )));
    }
    let forest = Forest::fit_regressor(&x, &y, cfg)?;
    let scores = target
        .iter()
        .map(|(id, v)| Ok((id.to_string(), forest.predict_regress(v)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(Transfer {
        scores: DimensionScores {
            dimension: train.dimension.clone(),
            scores,
            standardized: false,
        },
        n_train: x.len(),
        oob_r2: forest.oob_score(),
    })
}

/// Interval `i` of `edges`: `(edges[i], edges[i+1]]`, except that the first
/// interval also includes its lower edge. `None` outside the outermost edges.
pub fn interval_of(edges: &[f64], x: f64) -> Option<usize> {
    let last = edges.len().checked_sub(1)?;
    if x < edges[0] || x > edges[last] {
        return None;
    }
    // First edge strictly below x, within 1..=last.
    let i = edges.partition_point(|&e| e < x);
    Some(i.max(1) - 1)
}

fn check_edges(edges: &[f64], what: &str) -> Result<()> {
    if edges.len() < 2
        || edges
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        || edges.iter().any(|e| !e.is_finite())
    {
        return Err(Error::invalid(format!(
            "{what} edges must be at least two finite, strictly increasing values"
        )));
    }
    Ok(())
}

/// One cell of the dimension × ness grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub dim_interval: (f64, f64),
    pub ness_interval: (f64, f64),
    pub population: usize,
    /// Sampled channel ids, ascending.
    pub sampled: Vec<String>,
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dim ({}, {}] x ness ({}, {}]",
            self.dim_interval.0, self.dim_interval.1, self.ness_interval.0, self.ness_interval.1
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinSample {
    /// Dimension intervals vary slowest.
    pub bins: Vec<Bin>,
    /// Channels outside the outermost edges, or without a ness score.
    pub excluded: Vec<String>,
    pub warnings: Vec<String>,
}

impl BinSample {
    pub fn sampled(&self) -> impl Iterator<Item = &str> {
        self.bins
            .iter()
            .flat_map(|b| b.sampled.iter().map(String::as_str))
    }
}

/// Stratify channels by standardized dimension and ness scores and draw up
/// to `per_bin` channels from every cell.
pub fn sample_bins(
    scores: &DimensionScores,
    ness: &DimensionScores,
    dim_edges: &[f64],
    ness_edges: &[f64],
    per_bin: usize,
    seed: u64,
) -> Result<BinSample> {
    if !scores.standardized || !ness.standardized {
        return Err(Error::invalid("bin sampling expects standardized scores"));
    }
    check_edges(dim_edges, "dimension")?;
    check_edges(ness_edges, "ness")?;
    let nd = dim_edges.len() - 1;
    let nn = ness_edges.len() - 1;
    let mut members: Vec<Vec<&str>> = vec![Vec::new(); nd * nn];
    let mut excluded = Vec::new();
    for (id, &s) in &scores.scores {
        let cell = ness
            .scores
            .get(id)
            .and_then(|&t| Some(interval_of(dim_edges, s)? * nn + interval_of(ness_edges, t)?));
        match cell {
            Some(c) => members[c].push(id),
            None => excluded.push(id.clone()),
        }
    }

    let mut rng = rng_from(seed);
    let mut warnings = Vec::new();
    let mut bins = Vec::with_capacity(nd * nn);
    for (c, m) in members.iter().enumerate() {
        let (i, j) = (c / nn, c % nn);
        let mut bin = Bin {
            dim_interval: (dim_edges[i], dim_edges[i + 1]),
            ness_interval: (ness_edges[j], ness_edges[j + 1]),
            population: m.len(),
            sampled: Vec::new(),
        };
        if m.len() <= per_bin {
            bin.sampled = m.iter().map(|s| s.to_string()).collect();
            if m.is_empty() {
                warnings.push(format!("{bin} is empty"));
            } else if m.len() < per_bin {
                warnings.push(format!("{bin} has only {} of {per_bin} channels", m.len()));
            }
        } else {
            let mut picked: Vec<String> = index::sample(&mut rng, m.len(), per_bin)
                .into_iter()
                .map(|k| m[k].to_string())
                .collect();
            picked.sort();
            bin.sampled = picked;
        }
        bins.push(bin);
    }
    Ok(BinSample {
        bins,
        excluded,
        warnings,
    })
}

/// Channels present in both tables.
pub fn shared_ids<'a>(a: &'a EmbeddingTable, b: &EmbeddingTable) -> HashSet<&'a str> {
    a.ids()
        .iter()
        .map(String::as_str)
        .filter(|id| b.contains(id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(prov: Provenance, rows: &[(&str, &[f64])]) -> EmbeddingTable {
        EmbeddingTable::from_entries(
            rows[0].1.len(),
            prov,
            rows.iter().map(|(i, v)| (i.to_string(), v.to_vec())),
        )
        .unwrap()
    }

    fn pair(a: &str, b: &str) -> SeedPair {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn single_and_double_pair_directions() {
        let s = table(
            Provenance::External,
            &[
                ("lo", &[0.0, 0.0]),
                ("hi", &[1.0, 0.0]),
                ("lo2", &[1.0, 1.0]),
                ("hi2", &[1.0, 2.0]),
            ],
        );
        let d = build_dimension(&s, "x", &[pair("lo", "hi")]).unwrap();
        assert_eq!(d.vector, vec![1.0, 0.0]);
        let d = build_dimension(&s, "x", &[pair("lo", "hi"), pair("lo2", "hi2")]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((d.vector[0] - r).abs() < 1e-15 && (d.vector[1] - r).abs() < 1e-15);
    }

    #[test]
    fn degenerate_pairs() {
        let s = table(
            Provenance::External,
            &[("a", &[1.0, 2.0]), ("b", &[3.0, 0.5])],
        );
        assert!(matches!(
            build_dimension(&s, "x", &[pair("a", "a")]),
            Err(Error::Undefined(_))
        ));
        assert!(matches!(
            build_dimension(&s, "x", &[pair("a", "zz")]),
            Err(Error::UnknownId(_))
        ));
        assert!(build_dimension(&s, "x", &[]).is_err());
        // A zero-difference pair contributes nothing but the mean is still defined.
        let d = build_dimension(&s, "x", &[pair("a", "a"), pair("a", "b")]).unwrap();
        let e = build_dimension(&s, "x", &[pair("a", "b")]).unwrap();
        assert_eq!(d.vector, e.vector);
    }

    #[test]
    fn projection_is_cosine() {
        let dim = DimensionSpec {
            name: "x".into(),
            pairs: vec![],
            vector: vec![1.0, 0.0],
        };
        let c = table(
            Provenance::Soc,
            &[
                ("par", &[3.0, 0.0]),
                ("orth", &[0.0, 2.0]),
                ("diag", &[1.0, 3f64.sqrt()]),
                ("zero", &[0.0, 0.0]),
            ],
        );
        let (s, omitted) = project(&c, &dim).unwrap();
        assert_eq!(s.scores["par"], 1.0);
        assert_eq!(s.scores["orth"], 0.0);
        // 60 degrees.
        assert!((s.scores["diag"] - 0.5).abs() < 1e-15);
        assert_eq!(omitted, vec!["zero".to_string()]);

        let rec = c.clone().with_provenance(Provenance::Rec);
        assert!(project(&rec, &dim).is_err());
    }

    #[test]
    fn intervals_are_half_open_on_the_left() {
        let e = DEFAULT_DIM_EDGES;
        assert_eq!(interval_of(&e, 0.0), Some(2));
        assert_eq!(interval_of(&e, 0.5), Some(2));
        assert_eq!(interval_of(&e, -0.5), Some(1));
        assert_eq!(interval_of(&e, -5.0), Some(0));
        assert_eq!(interval_of(&e, 5.0), Some(4));
        assert_eq!(interval_of(&e, 5.01), None);
        assert_eq!(interval_of(&e, -7.0), None);
    }

    #[test]
    fn default_edges_make_ten_bins() {
        let scores = DimensionScores {
            dimension: "d".into(),
            scores: [("a".to_string(), 0.0), ("b".to_string(), 9.0)].into(),
            standardized: true,
        };
        let ness = DimensionScores {
            dimension: "d-ness".into(),
            scores: [("a".to_string(), 1.0), ("b".to_string(), 0.0)].into(),
            standardized: true,
        };
        let s = sample_bins(
            &scores,
            &ness,
            &DEFAULT_DIM_EDGES,
            &DEFAULT_NESS_EDGES,
            10,
            1,
        )
        .unwrap();
        assert_eq!(s.bins.len(), 10);
        assert_eq!(s.excluded, vec!["b".to_string()]);
        let home = s.bins.iter().find(|b| b.population == 1).unwrap();
        assert_eq!(home.dim_interval, (-0.5, 0.5));
        assert_eq!(home.ness_interval, (0.0, 5.0));
        assert_eq!(s.warnings.len(), 10);

        let raw = DimensionScores {
            standardized: false,
            ..scores
        };
        assert!(sample_bins(&raw, &ness, &DEFAULT_DIM_EDGES, &DEFAULT_NESS_EDGES, 10, 1).is_err());
    }

    #[test]
    fn scores_file_round_trip() {
        let s = DimensionScores {
            dimension: "age".into(),
            scores: [("c1".to_string(), -0.125), ("c2".to_string(), 1.0 / 3.0)].into(),
            standardized: true,
        };
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(DimensionScores::read_from(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn seeds_file_groups_pairs() {
        let text = "# name,low,high\ngender,Daddit,Mommit\nage,teenagers,RedditForGrownups\ngender,Boyfriend,Girlfriend\n";
        let seeds = parse_dimension_seeds(text.as_bytes()).unwrap();
        assert_eq!(seeds.len(), 2);
        assert_eq!(seeds[0].0, "gender");
        assert_eq!(seeds[0].1.len(), 2);
        assert!(parse_dimension_seeds("a,b\n".as_bytes()).is_err());
    }
}
