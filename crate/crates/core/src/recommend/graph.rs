use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::text;

/// One crawl observation: the recommendations shown next to a source video.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrawlRecord {
    pub source_video: String,
    pub source_channel: String,
    pub fetched_at: i64,
    /// `(recommended_video, recommended_channel)` pairs.
    pub recommendations: Vec<(String, String)>,
}

#[derive(Debug, Default)]
pub struct ParsedCrawl {
    pub records: Vec<CrawlRecord>,
    pub skipped: usize,
}

fn parse_crawl_line(line: &str) -> Option<CrawlRecord> {
    let mut f = line.split('\t');
    let source_video = f.next().filter(|s| !s.is_empty())?;
    let source_channel = f.next().filter(|s| !s.is_empty())?;
    let fetched_at = f.next()?.trim().parse().ok()?;
    let recs = f.next().unwrap_or("");
    if f.next().is_some() {
        return None;
    }
    let recommendations = recs
        .split_whitespace()
        .map(|pair| {
            let (v, c) = pair.split_once(':')?;
            (!v.is_empty() && !c.is_empty()).then(|| (v.to_owned(), c.to_owned()))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(CrawlRecord {
        source_video: source_video.to_owned(),
        source_channel: source_channel.to_owned(),
        fetched_at,
        recommendations,
    })
}

/// Parse `source_video<TAB>source_channel<TAB>fetched_at<TAB>video:channel video:channel ...`.
pub fn parse_crawl_records<R: BufRead>(reader: R) -> Result<ParsedCrawl> {
    let mut out = ParsedCrawl::default();
    let mut total = 0;
    for line in text::content_lines(reader) {
        let (ln, line) = line?;
        total += 1;
        match parse_crawl_line(&line) {
            Some(r) => out.records.push(r),
            None => {
                log::debug!("crawl line {ln}: malformed, skipped");
                out.skipped += 1;
            }
        }
    }
    crate::ingest::check_malformed("crawl records", out.skipped, total)?;
    Ok(out)
}

pub fn write_crawl_records<W: Write>(mut w: W, records: &[CrawlRecord]) -> Result<()> {
    for r in records {
        write!(
            w,
            "{}\t{}\t{}\t",
            r.source_video, r.source_channel, r.fetched_at
        )?;
        let recs: Vec<String> = r
            .recommendations
            .iter()
            .map(|(v, c)| format!("{v}:{c}"))
            .collect();
        writeln!(w, "{}", recs.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

/// Undirected weighted graph in CSR form; node indices follow ascending id
/// order and every adjacency list is sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecGraph {
    nodes: Vec<String>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<u64>,
}

impl RecGraph {
    /// Build from nodes and weighted edges; parallel edges accumulate, and
    /// `(u, v)` and `(v, u)` are the same edge.
    pub fn from_edges<N, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String, u64)>,
    {
        let nodes: BTreeSet<String> = nodes.into_iter().collect();
        let nodes: Vec<String> = nodes.into_iter().collect();
        let index = |id: &str| {
            nodes
                .binary_search_by(|p| p.as_str().cmp(id))
                .map_err(|_| Error::UnknownId(id.to_owned()))
        };
        let mut acc: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for (u, v, w) in edges {
            if w == 0 {
                return Err(Error::invalid(format!("edge ({u}, {v}) has zero weight")));
            }
            let (a, b) = (index(&u)?, index(&v)?);
            *acc.entry((a.min(b), a.max(b))).or_insert(0) += w;
        }
        Ok(Self::from_index_edges(nodes, &acc))
    }

    fn from_index_edges(nodes: Vec<String>, edges: &BTreeMap<(usize, usize), u64>) -> Self {
        let n = nodes.len();
        let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for (&(a, b), &w) in edges {
            adj[a].push((b, w));
            if a != b {
                adj[b].push((a, w));
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for mut list in adj {
            list.sort_unstable();
            for (v, w) in list {
                neighbors.push(v);
                weights.push(w);
            }
            offsets.push(neighbors.len());
        }
        RecGraph {
            nodes,
            offsets,
            neighbors,
            weights,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of undirected edges, self-loops included.
    pub fn n_edges(&self) -> usize {
        (0..self.n_nodes())
            .map(|u| self.neighbors(u).iter().filter(|&&v| v >= u).count())
            .sum()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|p| p.as_str().cmp(id)).ok()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn weights(&self, u: usize) -> &[u64] {
        &self.weights[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Position of the first adjacency entry of `u` in the flat edge arrays.
    pub(crate) fn edge_offset(&self, u: usize) -> usize {
        self.offsets[u]
    }

    pub(crate) fn n_directed_edges(&self) -> usize {
        self.neighbors.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn weight(&self, u: usize, v: usize) -> u64 {
        match self.neighbors(u).binary_search(&v) {
            Ok(k) => self.weights(u)[k],
            Err(_) => 0,
        }
    }

    /// `(u, v, w)` with `u <= v`, each undirected edge once.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..self.n_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.weights(u))
                .filter(move |(&v, _)| v >= u)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    pub fn self_loops(&self) -> usize {
        (0..self.n_nodes()).filter(|&u| self.has_edge(u, u)).count()
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct GraphReport {
    /// Observations whose source or recommended channel is not retained.
    pub dropped: usize,
    /// Observations of a channel recommending itself (kept as self-loops).
    pub self_recommendations: usize,
}

/// Count co-recommendations between retained channels.
///
/// Every observation of a video of `v` recommended from a video of `u` adds
/// one to the undirected weight of `(u, v)`.
pub fn build_rec_graph(
    records: &[CrawlRecord],
    retained: &BTreeSet<String>,
) -> Result<(RecGraph, GraphReport)> {
    let mut report = GraphReport::default();
    let mut nodes: BTreeSet<&str> = BTreeSet::new();
    let mut counts: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for r in records {
        let src = r.source_channel.as_str();
        let src_ok = retained.contains(src);
        if src_ok {
            nodes.insert(src);
        }
        for (_, dst) in &r.recommendations {
            let dst = dst.as_str();
            if !src_ok || !retained.contains(dst) {
                report.dropped += 1;
                continue;
            }
            nodes.insert(dst);
            if src == dst {
                report.self_recommendations += 1;
            }
            *counts.entry((src.min(dst), src.max(dst))).or_insert(0) += 1;
        }
    }
    if report.dropped > 0 {
        log::info!(
            "{} recommendations outside the retained channels dropped",
            report.dropped
        );
    }
    if report.self_recommendations > 0 {
        log::info!(
            "{} self-recommendations kept as self-loops",
            report.self_recommendations
        );
    }
    let graph = RecGraph::from_edges(
        nodes.into_iter().map(str::to_owned),
        counts
            .into_iter()
            .map(|((a, b), w)| (a.to_owned(), b.to_owned(), w)),
    )?;
    Ok((graph, report))
}
