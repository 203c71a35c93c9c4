use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::text::{self, fmt_real};

use super::tuples::{resolve, ResolvedTuple, SharingTuple, VideoChannelMap};

const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Sparse channel x subreddit matrix whose rows are mention shares.
///
/// Rows are stored CSR-style with ascending column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SharingMatrix {
    channels: Vec<String>,
    subreddits: Vec<String>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl SharingMatrix {
    /// Build from explicit rows of `(column, weight)`. Rows must already sum
    /// to one; duplicate columns within a row are rejected.
    pub fn new(
        channels: Vec<String>,
        subreddits: Vec<String>,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        if rows.len() != channels.len() {
            return Err(Error::invalid(format!(
                "{} rows for {} channels",
                rows.len(),
                channels.len()
            )));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::invalid(format!("row {i}: repeated column")));
            }
            let mut sum = 0.0;
            for (j, w) in row {
                if j >= subreddits.len() || !w.is_finite() || w < 0.0 {
                    return Err(Error::invalid(format!("row {i}: bad entry ({j}, {w})")));
                }
                if w > 0.0 {
                    cols.push(j);
                    weights.push(w);
                    sum += w;
                }
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::invalid(format!(
                    "row {i} ({}) sums to {sum}",
                    channels[i]
                )));
            }
            row_ptr.push(cols.len());
        }
        Ok(SharingMatrix {
            channels,
            subreddits,
            row_ptr,
            cols,
            weights,
        })
    }

    /// Normalize raw `(channel, subreddit) -> mentions` counts into shares.
    /// Channels and subreddits are indexed in ascending id order.
    pub fn from_counts(counts: &BTreeMap<(String, String), u64>) -> Result<Self> {
        let channels: Vec<String> = counts
            .keys()
            .map(|(c, _)| c.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let subreddits: Vec<String> = counts
            .keys()
            .map(|(_, s)| s.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let col_of: BTreeMap<&str, usize> = subreddits
            .iter()
            .enumerate()
            .map(|(j, s)| (s.as_str(), j))
            .collect();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); channels.len()];
        let mut totals = vec![0u64; channels.len()];
        let mut row = 0;
        let mut last: Option<&str> = None;
        for ((c, s), &n) in counts {
            if last.is_some_and(|l| l != c) {
                row += 1;
            }
            last = Some(c);
            totals[row] += n;
            rows[row].push((col_of[s.as_str()], n as f64));
        }
        for (r, total) in rows.iter_mut().zip(&totals) {
            for e in r.iter_mut() {
                e.1 /= *total as f64;
            }
        }
        SharingMatrix::new(channels, subreddits, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.channels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.subreddits.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn subreddits(&self) -> &[String] {
        &self.subreddits
    }

    /// Nonzero `(column, weight)` entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.weights[span].iter().copied())
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, w)| w).sum()
    }

    /// Header `n m`, then `row col weight` triplets in row-major order.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n_rows(), self.n_cols())?;
        for i in 0..self.n_rows() {
            for (j, x) in self.row(i) {
                writeln!(w, "{i} {j} {}", fmt_real(x))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Read triplets; ids come from the matching row and column index lists.
    pub fn read_from<R: BufRead>(
        r: R,
        channels: Vec<String>,
        subreddits: Vec<String>,
    ) -> Result<Self> {
        let mut lines = text::content_lines(r);
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty matrix file"))??;
        let dims: Vec<_> = header.split_whitespace().collect();
        let [n, m] = dims[..] else {
            return Err(Error::parse(hl, "expected header `n m`"));
        };
        let (n, m) = (
            text::parse_count(n, hl)? as usize,
            text::parse_count(m, hl)? as usize,
        );
        if n != channels.len() || m != subreddits.len() {
            return Err(Error::parse(
                hl,
                format!(
                    "matrix is {n}x{m} but index lists have {} rows and {} columns",
                    channels.len(),
                    subreddits.len()
                ),
            ));
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut prev = (0usize, 0usize);
        let mut first = true;
        for line in lines {
            let (ln, line) = line?;
            let f: Vec<_> = line.split_whitespace().collect();
            let [i, j, w] = f[..] else {
                return Err(Error::parse(ln, "expected `row col weight`"));
            };
            let i = text::parse_count(i, ln)? as usize;
            let j = text::parse_count(j, ln)? as usize;
            let w = text::parse_real(w, ln)?;
            if i >= n || j >= m {
                return Err(Error::parse(ln, format!("entry ({i}, {j}) out of range")));
            }
            if !first && (i, j) <= prev {
                return Err(Error::parse(ln, "triplets are not in row-major order"));
            }
            first = false;
            prev = (i, j);
            rows[i].push((j, w));
        }
        SharingMatrix::new(channels, subreddits, rows)
    }

    fn index_paths(path: &Path) -> (PathBuf, PathBuf) {
        let mut rows = path.as_os_str().to_owned();
        rows.push(".rows");
        let mut cols = path.as_os_str().to_owned();
        cols.push(".cols");
        (rows.into(), cols.into())
    }

    /// Write the triplet file plus `<path>.rows` / `<path>.cols` id lists.
    pub fn save(&self, path: &Path) -> Result<()> {
        let (rows, cols) = Self::index_paths(path);
        self.write_to(text::create(path)?)
            .map_err(|e| e.in_file(path))?;
        for (p, ids) in [(&rows, &self.channels), (&cols, &self.subreddits)] {
            let mut w = text::create(p)?;
            for id in ids {
                writeln!(w, "{id}").map_err(|e| Error::from(e).in_file(p))?;
            }
            w.flush().map_err(|e| Error::from(e).in_file(p))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (rows, cols) = Self::index_paths(path);
        let read_ids = |p: &Path| -> Result<Vec<String>> {
            text::content_lines(text::open(p)?)
                .map(|l| l.map(|(_, s)| s.trim().to_owned()))
                .collect::<Result<_>>()
                .map_err(|e| e.in_file(p))
        };
        let channels = read_ids(&rows)?;
        let subreddits = read_ids(&cols)?;
        Self::read_from(text::open(path)?, channels, subreddits).map_err(|e| e.in_file(path))
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct MatrixReport {
    /// Tuples whose video id had no known channel.
    pub unresolved: usize,
    /// Tuples resolved to a channel outside the retained set.
    pub not_retained: usize,
    /// Retained channels that were never mentioned and so have no row.
    pub unmentioned: Vec<String>,
}

/// Build W from already-resolved tuples.
pub fn build_sharing_matrix_resolved(
    tuples: &[ResolvedTuple],
    retained: &BTreeSet<String>,
) -> Result<(SharingMatrix, MatrixReport)> {
    let mut report = MatrixReport::default();
    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for t in tuples {
        let Some(channel) = &t.channel else {
            report.unresolved += 1;
            continue;
        };
        if !retained.contains(channel) {
            report.not_retained += 1;
            continue;
        }
        *counts
            .entry((channel.clone(), t.tuple.subreddit.clone()))
            .or_insert(0) += 1;
    }
    let mentioned: BTreeSet<&String> = counts.keys().map(|(c, _)| c).collect();
    report.unmentioned = retained
        .iter()
        .filter(|c| !mentioned.contains(c))
        .cloned()
        .collect();
    if report.unresolved > 0 {
        log::warn!(
            "{} tuples with unresolvable video ids dropped",
            report.unresolved
        );
    }
    if !report.unmentioned.is_empty() {
        log::warn!(
            "{} retained channels have no mentions and are left out of the matrix",
            report.unmentioned.len()
        );
    }
    Ok((SharingMatrix::from_counts(&counts)?, report))
}

/// Resolve tuples to channels and build the row-normalized sharing matrix.
pub fn build_sharing_matrix(
    tuples: &[SharingTuple],
    video_to_channel: &VideoChannelMap,
    retained: &BTreeSet<String>,
) -> Result<(SharingMatrix, MatrixReport)> {
    build_sharing_matrix_resolved(&resolve(tuples.to_vec(), video_to_channel), retained)
}
