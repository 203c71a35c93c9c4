//! The odd-one-out task: triplets built from nearest-neighbor structure,
//! an embedding's own pick of the odd member, and agreement with raters.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::Rng;

use crate::embedding::{cosine_distance, EmbeddingTable, Provenance};
use crate::error::{Error, Result};
use crate::seed::rng_from;
use crate::text;

/// `b` is `a`'s nearest neighbor and `c` its `k`-th nearest in `source`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triplet {
    pub id: String,
    pub a: String,
    pub b: String,
    pub c: String,
    pub source: Provenance,
    pub k: usize,
}

impl Triplet {
    pub fn members(&self) -> [&str; 3] {
        [&self.a, &self.b, &self.c]
    }
}

/// All other rows of `table` ordered by cosine distance from row `a`, ties by id.
pub fn neighbors(table: &EmbeddingTable, a: usize) -> Vec<(f64, usize)> {
    let va = table.row(a);
    let mut d: Vec<(f64, usize)> = (0..table.len())
        .filter(|&j| j != a)
        .map(|j| (cosine_distance(va, table.row(j)), j))
        .collect();
    // Row order is id order, so comparing indices breaks ties by id.
    d.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    d
}

/// The triplet anchored at row `a`, if it satisfies every condition.
fn triplet_at(table: &EmbeddingTable, a: usize, k: usize) -> Option<(usize, usize)> {
    if k < 2 {
        return None;
    }
    let nb = neighbors(table, a);
    let (_, b) = *nb.first()?;
    let (_, c) = *nb.get(k - 1)?;
    let d_ab = cosine_distance(table.row(a), table.row(b));
    let d_bc = cosine_distance(table.row(b), table.row(c));
    (d_ab < d_bc).then_some((b, c))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripletSample {
    pub triplets: Vec<Triplet>,
    pub attempts: usize,
    pub warnings: Vec<String>,
}

fn make(table: &EmbeddingTable, a: usize, b: usize, c: usize, k: usize, id: String) -> Triplet {
    Triplet {
        id,
        a: table.ids()[a].clone(),
        b: table.ids()[b].clone(),
        c: table.ids()[c].clone(),
        source: table.provenance(),
        k,
    }
}

/// Up to `n` triplets with distinct anchors drawn uniformly at random,
/// giving up after `100 n` attempts. Ids are `<source>-k<k>-<serial>`.
pub fn sample_triplets(
    table: &EmbeddingTable,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<TripletSample> {
    if table.len() <= k + 1 {
        return Err(Error::Insufficient(format!(
            "k = {k} needs more than {} channels, the table has {}",
            k + 1,
            table.len()
        )));
    }
    let mut rng = rng_from(seed);
    let mut unused: Vec<usize> = (0..table.len()).collect();
    let mut triplets = Vec::new();
    let mut attempts = 0;
    let max_attempts = 100 * n;
    while triplets.len() < n && attempts < max_attempts && !unused.is_empty() {
        attempts += 1;
        let a = unused.swap_remove(rng.random_range(0..unused.len()));
        if let Some((b, c)) = triplet_at(table, a, k) {
            let id = format!("{}-k{k}-{:05}", table.provenance(), triplets.len());
            triplets.push(make(table, a, b, c, k, id));
        }
    }
    let mut warnings = Vec::new();
    if triplets.len() < n {
        warnings.push(format!(
            "found {} of {n} triplets for k = {k} after {attempts} attempts",
            triplets.len()
        ));
    }
    Ok(TripletSample {
        triplets,
        attempts,
        warnings,
    })
}

/// Every valid triplet, one per qualifying anchor, in id order.
pub fn all_triplets(table: &EmbeddingTable, k: usize) -> Vec<Triplet> {
    (0..table.len())
        .filter_map(|a| triplet_at(table, a, k).map(|(b, c)| (a, b, c)))
        .enumerate()
        .map(|(i, (a, b, c))| {
            make(
                table,
                a,
                b,
                c,
                k,
                format!("{}-k{k}-{i:05}", table.provenance()),
            )
        })
        .collect()
}

/// The member outside the closest pair under cosine distance. When several
/// pairs are equally close, the smallest candidate id wins.
pub fn predict_odd<'t>(t: &'t Triplet, table: &EmbeddingTable) -> Result<&'t str> {
    let v = |id: &str| {
        table
            .get(id)
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    };
    let (a, b, c) = (v(&t.a)?, v(&t.b)?, v(&t.c)?);
    // (distance of the pair, member left out)
    let pairs = [
        (cosine_distance(a, b), t.c.as_str()),
        (cosine_distance(a, c), t.b.as_str()),
        (cosine_distance(b, c), t.a.as_str()),
    ];
    let min = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let tol = 1e-12;
    Ok(pairs
        .iter()
        .filter(|p| p.0 - min <= tol)
        .map(|p| p.1)
        .min()
        .expect("three pairs"))
}

const TRIPLET_HEADER: &str = "triplet_id,a,b,c,source,k";

pub fn write_triplets<W: Write>(mut w: W, triplets: &[Triplet]) -> Result<()> {
    writeln!(w, "{TRIPLET_HEADER}")?;
    for t in triplets {
        writeln!(w, "{},{},{},{},{},{}", t.id, t.a, t.b, t.c, t.source, t.k)?;
    }
    Ok(())
}

pub fn parse_triplets<R: BufRead>(reader: R) -> Result<Vec<Triplet>> {
    let mut out: Vec<Triplet> = Vec::new();
    let mut seen = BTreeSet::new();
    for line in text::content_lines(reader) {
        let (n, line) = line?;
        if n == 1 && line.trim() == TRIPLET_HEADER {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let [id, a, b, c, source, k] = f[..] else {
            return Err(Error::parse(n, format!("expected `{TRIPLET_HEADER}`")));
        };
        if a == b || a == c || b == c {
            return Err(Error::parse(n, "triplet members must be distinct"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(n, format!("duplicate triplet id `{id}`")));
        }
        out.push(Triplet {
            id: id.into(),
            a: a.into(),
            b: b.into(),
            c: c.into(),
            source: source
                .parse()
                .map_err(|_| Error::parse(n, format!("unknown source `{source}`")))?,
            k: text::parse_count(k, n)? as usize,
        });
    }
    Ok(out)
}

/// Five raters' choices of the odd member of one triplet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripletJudgment {
    pub triplet_id: String,
    pub votes: Vec<String>,
}

pub const RATERS: usize = 5;

impl TripletJudgment {
    /// Most chosen member and its vote count; ties go to the smallest id.
    pub fn modal(&self) -> (&str, usize) {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for v in &self.votes {
            *counts.entry(v).or_default() += 1;
        }
        let mut best = ("", 0);
        for (id, c) in counts {
            if c > best.1 {
                best = (id, c);
            }
        }
        best
    }
}

const JUDGMENT_HEADER: &str = "triplet_id,vote1,vote2,vote3,vote4,vote5";

pub fn write_judgments<W: Write>(mut w: W, judgments: &[TripletJudgment]) -> Result<()> {
    writeln!(w, "{JUDGMENT_HEADER}")?;
    for j in judgments {
        writeln!(w, "{},{}", j.triplet_id, j.votes.join(","))?;
    }
    Ok(())
}

pub fn parse_judgments<R: BufRead>(reader: R) -> Result<Vec<TripletJudgment>> {
    let mut out = Vec::new();
    for line in text::content_lines(reader) {
        let (n, line) = line?;
        if n == 1 && line.trim() == JUDGMENT_HEADER {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != RATERS + 1 || f.iter().any(|s| s.is_empty()) {
            return Err(Error::parse(n, format!("expected `{JUDGMENT_HEADER}`")));
        }
        out.push(TripletJudgment {
            triplet_id: f[0].into(),
            votes: f[1..].iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Agreement {
    /// Share of surviving triplets where the embedding picks the modal vote.
    pub rate: f64,
    pub hits: usize,
    pub n: usize,
}

/// Agreement between `table`'s odd-one-out picks and the raters' modal
/// choice, over judged triplets whose modal choice has at least
/// `min_workers` votes.
pub fn agreement_table(
    judgments: &[TripletJudgment],
    triplets: &BTreeMap<String, Triplet>,
    table: &EmbeddingTable,
    min_workers: usize,
) -> Result<Agreement> {
    let (mut hits, mut n) = (0, 0);
    for j in judgments {
        let t = triplets
            .get(&j.triplet_id)
            .ok_or_else(|| Error::UnknownId(j.triplet_id.clone()))?;
        if j.votes.len() != RATERS {
            return Err(Error::invalid(format!(
                "triplet `{}` has {} votes, expected {RATERS}",
                j.triplet_id,
                j.votes.len()
            )));
        }
        if let Some(v) = j.votes.iter().find(|v| !t.members().contains(&v.as_str())) {
            return Err(Error::invalid(format!(
                "vote `{v}` is not a member of triplet `{}`",
                t.id
            )));
        }
        let (choice, count) = j.modal();
        if count < min_workers {
            continue;
        }
        n += 1;
        if predict_odd(t, table)? == choice {
            hits += 1;
        }
    }
    if n == 0 {
        return Err(Error::Undefined(format!(
            "no triplet has a modal choice with at least {min_workers} votes"
        )));
    }
    Ok(Agreement {
        rate: hits as f64 / n as f64,
        hits,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, [f64; 2])]) -> EmbeddingTable {
        EmbeddingTable::from_entries(
            2,
            Provenance::Soc,
            rows.iter().map(|(i, v)| (i.to_string(), v.to_vec())),
        )
        .unwrap()
    }

    fn trip(a: &str, b: &str, c: &str) -> Triplet {
        Triplet {
            id: "t".into(),
            a: a.into(),
            b: b.into(),
            c: c.into(),
            source: Provenance::Soc,
            k: 2,
        }
    }

    #[test]
    fn distant_member_is_odd() {
        let t = table(&[("x", [1.0, 0.0]), ("y", [1.0, 0.01]), ("z", [0.0, 1.0])]);
        assert_eq!(predict_odd(&trip("z", "x", "y"), &t).unwrap(), "z");
        assert_eq!(predict_odd(&trip("x", "z", "y"), &t).unwrap(), "z");
    }

    #[test]
    fn equilateral_picks_smallest_id() {
        let s = 3f64.sqrt() / 2.0;
        let t = table(&[("q", [1.0, 0.0]), ("m", [-0.5, s]), ("r", [-0.5, -s])]);
        assert_eq!(predict_odd(&trip("q", "r", "m"), &t).unwrap(), "m");
    }

    #[test]
    fn modal_vote_ties_go_to_smallest_id() {
        let j = TripletJudgment {
            triplet_id: "t".into(),
            votes: ["b", "c", "c", "b", "a"].map(String::from).to_vec(),
        };
        assert_eq!(j.modal(), ("b", 2));
    }

    #[test]
    fn k_one_yields_nothing() {
        let t = table(&[("a", [1.0, 0.0]), ("b", [0.0, 1.0]), ("c", [1.0, 1.0])]);
        let s = sample_triplets(&t, 1, 3, 0).unwrap();
        assert!(s.triplets.is_empty());
        assert_eq!(s.warnings.len(), 1);
        assert!(sample_triplets(&t, 2, 1, 0).is_err());
    }

    #[test]
    fn files_round_trip() {
        let ts = vec![trip("a", "b", "c")];
        let mut buf = Vec::new();
        write_triplets(&mut buf, &ts).unwrap();
        assert_eq!(parse_triplets(buf.as_slice()).unwrap(), ts);
        let js = vec![TripletJudgment {
            triplet_id: "t".into(),
            votes: ["a", "a", "b", "c", "a"].map(String::from).to_vec(),
        }];
        let mut buf = Vec::new();
        write_judgments(&mut buf, &js).unwrap();
        assert_eq!(parse_judgments(buf.as_slice()).unwrap(), js);
    }
}
