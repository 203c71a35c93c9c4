//! Crowd comparison records and ordinal partisan labels.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::tau::tau_c;
use crate::dimensions::DimensionScores;
use crate::error::{Error, Result};
use crate::text;

/// One judgment: `rater` preferred `winner` over `loser` along `dimension`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonRecord {
    pub dimension: String,
    pub winner: String,
    pub loser: String,
    pub rater: String,
}

const COMPARISON_HEADER: &str = "dimension,winner,loser,rater_id";

/// Read `dimension,winner,loser,rater_id` lines; a header line is optional.
pub fn parse_comparisons<R: BufRead>(reader: R) -> Result<Vec<ComparisonRecord>> {
    let mut out = Vec::new();
    for line in text::content_lines(reader) {
        let (n, line) = line?;
        if n == 1 && line.trim() == COMPARISON_HEADER {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let [dimension, winner, loser, rater] = f[..] else {
            return Err(Error::parse(n, format!("expected `{COMPARISON_HEADER}`")));
        };
        if [dimension, winner, loser, rater]
            .iter()
            .any(|s| s.is_empty())
        {
            return Err(Error::parse(n, "empty field"));
        }
        if winner == loser {
            return Err(Error::parse(n, format!("`{winner}` compared with itself")));
        }
        out.push(ComparisonRecord {
            dimension: dimension.into(),
            winner: winner.into(),
            loser: loser.into(),
            rater: rater.into(),
        });
    }
    Ok(out)
}

pub fn write_comparisons<W: Write>(mut w: W, records: &[ComparisonRecord]) -> Result<()> {
    writeln!(w, "{COMPARISON_HEADER}")?;
    for r in records {
        writeln!(w, "{},{},{},{}", r.dimension, r.winner, r.loser, r.rater)?;
    }
    Ok(())
}

/// The seven partisan labels, from rank 1 to rank 7.
pub const PARTISAN_LABELS: [&str; 7] = [
    "extreme-left",
    "left",
    "center-left",
    "center",
    "center-right",
    "right",
    "extreme-right",
];

/// Rank 1..=7 of a label; case, spaces and underscores are not significant.
pub fn label_rank(label: &str) -> Option<u8> {
    let norm: String = label
        .trim()
        .chars()
        .map(|c| {
            if c == ' ' || c == '_' {
                '-'
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect();
    PARTISAN_LABELS
        .iter()
        .position(|&l| l == norm)
        .map(|i| i as u8 + 1)
}

/// Read `channel_id,label` lines. A first line `channel_id,label` is skipped.
pub fn parse_labels<R: BufRead>(reader: R) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in text::content_lines(reader) {
        let (n, line) = line?;
        let Some((id, label)) = line.split_once(',') else {
            return Err(Error::parse(n, "expected `channel_id,label`"));
        };
        let (id, label) = (id.trim(), label.trim());
        if n == 1 && id == "channel_id" {
            continue;
        }
        if id.is_empty() {
            return Err(Error::parse(n, "empty channel id"));
        }
        if out.insert(id.to_string(), label.to_string()).is_some() {
            return Err(Error::parse(n, format!("channel `{id}` labelled twice")));
        }
    }
    Ok(out)
}

/// τc between channel scores and the ranks of their labels, over channels
/// that have both.
pub fn label_correlation(
    scores: &DimensionScores,
    labels: &BTreeMap<String, String>,
) -> Result<LabelCorrelation> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (id, label) in labels {
        let rank = label_rank(label)
            .ok_or_else(|| Error::invalid(format!("unknown label `{label}` for `{id}`")))?;
        if let Some(&s) = scores.scores.get(id) {
            x.push(s);
            y.push(f64::from(rank));
        }
    }
    if x.len() < 2 {
        return Err(Error::Insufficient(format!(
            "only {} labelled channels have a `{}` score",
            x.len(),
            scores.dimension
        )));
    }
    Ok(LabelCorrelation {
        tau_c: tau_c(&x, &y)?,
        n: x.len(),
        scores: x,
        ranks: y,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelCorrelation {
    pub tau_c: f64,
    pub n: usize,
    /// The paired observations, in channel id order.
    pub scores: Vec<f64>,
    pub ranks: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_rank_one_to_seven() {
        assert_eq!(label_rank("extreme-left"), Some(1));
        assert_eq!(label_rank("Center Right"), Some(5));
        assert_eq!(label_rank("extreme_right"), Some(7));
        assert_eq!(label_rank("far-left"), None);
    }

    #[test]
    fn monotone_scores_correlate_fully() {
        let labels: BTreeMap<String, String> = PARTISAN_LABELS
            .iter()
            .enumerate()
            .map(|(i, l)| (format!("c{i}"), l.to_string()))
            .collect();
        let scores = DimensionScores {
            dimension: "partisan".into(),
            scores: (0..7)
                .map(|i| (format!("c{i}"), f64::from(i) * 0.3 - 1.0))
                .collect(),
            standardized: false,
        };
        let r = label_correlation(&scores, &labels).unwrap();
        assert_eq!(r.tau_c, 1.0);
        assert_eq!(r.n, 7);

        let mut bad = labels.clone();
        bad.insert("c9".into(), "leftish".into());
        assert!(label_correlation(&scores, &bad).is_err());
    }

    #[test]
    fn comparison_file_round_trip() {
        let recs = vec![ComparisonRecord {
            dimension: "age".into(),
            winner: "a".into(),
            loser: "b".into(),
            rater: "r1".into(),
        }];
        let mut buf = Vec::new();
        write_comparisons(&mut buf, &recs).unwrap();
        assert_eq!(parse_comparisons(buf.as_slice()).unwrap(), recs);
        assert!(parse_comparisons("age,a,a,r\n".as_bytes()).is_err());
    }
}
