//! The id -> vector table every embedder produces and every evaluator consumes.
//!
//! On disk: a header line `n d`, then one line per entry with the id followed
//! by `d` space-separated components.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{self, fmt_real, parse_real};

/// Which pipeline produced a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Social sharing (channel x subreddit mentions times subreddit vectors).
    Soc,
    /// Content (aggregated text vectors).
    Con,
    /// Recommendation graph.
    Rec,
    /// Anything loaded from outside, e.g. reference subreddit vectors.
    External,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Soc => "soc",
            Provenance::Con => "con",
            Provenance::Rec => "rec",
            Provenance::External => "external",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soc" => Ok(Provenance::Soc),
            "con" => Ok(Provenance::Con),
            "rec" => Ok(Provenance::Rec),
            "external" => Ok(Provenance::External),
            _ => Err(Error::invalid(format!(
                "unknown embedding provenance `{s}`"
            ))),
        }
    }
}

/// Dense vectors of a fixed dimensionality keyed by id, kept sorted by id.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    provenance: Provenance,
    ids: Vec<String>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    /// Build a table, sorting entries by id.
    ///
    /// Fails on duplicate ids, wrong-length vectors, non-finite components or
    /// `dim == 0`.
    pub fn from_entries<I>(dim: usize, provenance: Provenance, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(Error::invalid("embedding dimensionality must be positive"));
        }
        let mut entries: Vec<(String, Vec<f64>)> = entries.into_iter().collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut ids = Vec::with_capacity(entries.len());
        let mut data = Vec::with_capacity(entries.len() * dim);
        for (id, v) in entries {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("non-finite component in `{id}`")));
            }
            if ids.last() == Some(&id) {
                return Err(Error::DuplicateId(id));
            }
            if id.is_empty() || id.contains(char::is_whitespace) {
                return Err(Error::invalid(format!("bad embedding id `{id}`")));
            }
            ids.push(id);
            data.extend_from_slice(&v);
        }
        Ok(EmbeddingTable {
            dim,
            provenance,
            ids,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Ids in ascending order.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids
            .binary_search_by(|probe| probe.as_str().cmp(id))
            .ok()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.index_of(id).map(|i| self.row(i))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index_of(id).is_some()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(id, v)| (id.as_str(), v))
    }

    /// Apply `f` to every vector, keeping ids and provenance.
    pub fn map_vectors<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let entries: Vec<_> = self.iter().map(|(id, v)| (id.to_owned(), f(v))).collect();
        let dim = entries.first().map_or(self.dim, |e| e.1.len());
        EmbeddingTable::from_entries(dim, self.provenance, entries)
    }

    /// Restrict to the given ids (unknown ids are ignored).
    pub fn subset(&self, keep: &HashSet<&str>) -> Self {
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (id, v) in self.iter() {
            if keep.contains(id) {
                ids.push(id.to_owned());
                data.extend_from_slice(v);
            }
        }
        EmbeddingTable {
            dim: self.dim,
            provenance: self.provenance,
            ids,
            data,
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (id, v) in self.iter() {
            w.write_all(id.as_bytes())?;
            for x in v {
                write!(w, " {}", fmt_real(*x))?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R, provenance: Provenance) -> Result<Self> {
        let mut lines = text::content_lines(r);
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty embedding file"))??;
        let mut hf = header.split_whitespace();
        let (n, dim) = match (hf.next(), hf.next(), hf.next()) {
            (Some(n), Some(d), None) => (text::parse_count(n, hl)?, text::parse_count(d, hl)?),
            _ => return Err(Error::parse(hl, "expected header `n d`")),
        };
        let dim = dim as usize;
        let mut entries = Vec::with_capacity(n as usize);
        for line in lines {
            let (ln, line) = line?;
            let mut fields = line.split_whitespace();
            let id = fields.next().unwrap_or_default().to_owned();
            let v = fields
                .map(|f| parse_real(f, ln))
                .collect::<Result<Vec<f64>>>()?;
            if v.len() != dim {
                return Err(Error::parse(
                    ln,
                    format!("expected {dim} components, found {}", v.len()),
                ));
            }
            entries.push((id, v));
        }
        if entries.len() as u64 != n {
            return Err(Error::parse(
                hl,
                format!("header promises {n} entries, file has {}", entries.len()),
            ));
        }
        EmbeddingTable::from_entries(dim, provenance, entries)
    }

    pub fn load(path: &Path, provenance: Provenance) -> Result<Self> {
        Self::read_from(text::open(path)?, provenance).map_err(|e| e.in_file(path))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(text::create(path)?)
            .map_err(|e| e.in_file(path))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; `None` when either vector is zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// `1 - cos`; a zero vector is treated as orthogonal to everything.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    1.0 - cosine_similarity(a, b).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(entries: &[(&str, &[f64])]) -> EmbeddingTable {
        let dim = entries[0].1.len();
        EmbeddingTable::from_entries(
            dim,
            Provenance::External,
            entries.iter().map(|(id, v)| (id.to_string(), v.to_vec())),
        )
        .unwrap()
    }

    #[test]
    fn entries_are_sorted_and_addressable() {
        let t = table(&[("b", &[1.0, 2.0]), ("a", &[3.0, 4.0])]);
        assert_eq!(t.ids(), &["a".to_string(), "b".to_string()]);
        assert_eq!(t.get("b"), Some(&[1.0, 2.0][..]));
        assert_eq!(t.get("c"), None);
    }

    #[test]
    fn rejects_duplicates_and_ragged_rows() {
        let dup = EmbeddingTable::from_entries(
            1,
            Provenance::Soc,
            vec![("a".into(), vec![1.0]), ("a".into(), vec![2.0])],
        );
        assert!(matches!(dup, Err(Error::DuplicateId(_))));
        let ragged =
            EmbeddingTable::from_entries(2, Provenance::Soc, vec![("a".into(), vec![1.0])]);
        assert!(matches!(ragged, Err(Error::DimensionMismatch { .. })));
        let nan =
            EmbeddingTable::from_entries(1, Provenance::Soc, vec![("a".into(), vec![f64::NAN])]);
        assert!(nan.is_err());
    }

    #[test]
    fn header_count_is_checked() {
        let text = "3 2\na 1 2\nb 3 4\n";
        assert!(EmbeddingTable::read_from(text.as_bytes(), Provenance::Rec).is_err());
    }

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[2.0, 0.0]), Some(1.0));
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 3.0]), Some(0.0));
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[0.0, 3.0]), None);
        assert_eq!(cosine_distance(&[0.0, 0.0], &[0.0, 3.0]), 1.0);
    }

    proptest! {
        #[test]
        fn file_round_trip_is_byte_exact(
            rows in proptest::collection::btree_map("[a-z]{1,6}", proptest::collection::vec(-1e6f64..1e6, 3), 1..20)
        ) {
            let t = EmbeddingTable::from_entries(3, Provenance::Rec, rows).unwrap();
            let mut first = Vec::new();
            t.write_to(&mut first).unwrap();
            let back = EmbeddingTable::read_from(first.as_slice(), Provenance::Rec).unwrap();
            prop_assert_eq!(&back, &t);
            let mut second = Vec::new();
            back.write_to(&mut second).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
