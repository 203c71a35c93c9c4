//! Social-sharing channel vectors: each channel is the mention-weighted
//! average of the vectors of the subreddits it was shared in.

use crate::embedding::{EmbeddingTable, Provenance};
use crate::error::{Error, Result};
use crate::ingest::SharingMatrix;

/// A channel keeps its row only if at least this share of its mentions falls
/// on subreddits present in the reference embedding.
pub const MIN_COVERED_MASS: f64 = 0.5;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct SocialReport {
    /// Channels whose rows lost some mass to missing subreddits and were
    /// re-normalized, with the surviving share.
    pub renormalized: Vec<(String, f64)>,
    /// Channels dropped because too little of their mass was covered.
    pub omitted: Vec<String>,
}

/// `C = W x S`.
pub fn embed_social(
    w: &SharingMatrix,
    subreddits: &EmbeddingTable,
) -> Result<(EmbeddingTable, SocialReport)> {
    let dim = subreddits.dim();
    // Column -> row of S, resolved once.
    let col_rows: Vec<Option<usize>> = w
        .subreddits()
        .iter()
        .map(|s| subreddits.index_of(s))
        .collect();
    let missing = col_rows.iter().filter(|r| r.is_none()).count();
    if missing > 0 {
        log::warn!(
            "{missing} of {} subreddits are absent from the reference embedding",
            col_rows.len()
        );
    }

    let mut report = SocialReport::default();
    let mut entries = Vec::with_capacity(w.n_rows());
    for (i, channel) in w.channels().iter().enumerate() {
        let covered: f64 = w
            .row(i)
            .filter(|(j, _)| col_rows[*j].is_some())
            .map(|(_, x)| x)
            .sum();
        if covered < MIN_COVERED_MASS || covered <= 0.0 {
            report.omitted.push(channel.clone());
            continue;
        }
        let mut v = vec![0.0; dim];
        for (j, x) in w.row(i) {
            let Some(r) = col_rows[j] else { continue };
            for (acc, s) in v.iter_mut().zip(subreddits.row(r)) {
                *acc += x * s;
            }
        }
        if covered < 1.0 - 1e-12 {
            v.iter_mut().for_each(|c| *c /= covered);
            report.renormalized.push((channel.clone(), covered));
        }
        entries.push((channel.clone(), v));
    }
    if !report.omitted.is_empty() {
        log::warn!(
            "{} channels omitted: less than half of their mentions are in embedded subreddits",
            report.omitted.len()
        );
    }
    if entries.is_empty() && w.n_rows() > 0 {
        return Err(Error::Insufficient(
            "no channel has enough mentions in embedded subreddits".into(),
        ));
    }
    Ok((
        EmbeddingTable::from_entries(dim, Provenance::Soc, entries)?,
        report,
    ))
}
