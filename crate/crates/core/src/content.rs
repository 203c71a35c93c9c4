//! Content channel vectors from per-video text vectors: a video is the sum of
//! its title and description vectors, a channel the mean of its videos.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use crate::embedding::{EmbeddingTable, Provenance};
use crate::error::{Error, Result};
use crate::text;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TextField {
    Title,
    Description,
}

/// Text vectors of one video. A missing field counts as the zero vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VideoVectors {
    pub video_id: String,
    pub title: Option<Vec<f64>>,
    pub description: Option<Vec<f64>>,
}

impl VideoVectors {
    fn dim(&self) -> Option<usize> {
        self.title
            .as_ref()
            .or(self.description.as_ref())
            .map(Vec::len)
    }

    /// title + description.
    pub fn video_vector(&self) -> Option<Vec<f64>> {
        match (&self.title, &self.description) {
            (Some(t), Some(d)) => Some(t.iter().zip(d).map(|(a, b)| a + b).collect()),
            (Some(v), None) | (None, Some(v)) => Some(v.clone()),
            (None, None) => None,
        }
    }
}

/// Parse lines of `video_id tag c1 .. cd`, tag being `title` or `description`.
pub fn parse_video_vectors<R: BufRead>(reader: R) -> Result<Vec<VideoVectors>> {
    let mut by_id: BTreeMap<String, VideoVectors> = BTreeMap::new();
    let mut dim: Option<usize> = None;
    for line in text::content_lines(reader) {
        let (ln, line) = line?;
        let mut f = line.split_whitespace();
        let (Some(id), Some(tag)) = (f.next(), f.next()) else {
            return Err(Error::parse(ln, "expected `video_id tag components...`"));
        };
        let field = match tag {
            "title" => TextField::Title,
            "description" => TextField::Description,
            _ => return Err(Error::parse(ln, format!("unknown text field `{tag}`"))),
        };
        let v = f
            .map(|x| text::parse_real(x, ln))
            .collect::<Result<Vec<_>>>()?;
        match dim {
            None if v.is_empty() => return Err(Error::parse(ln, "empty vector")),
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => {
                return Err(Error::parse(
                    ln,
                    format!("expected {d} components, found {}", v.len()),
                ))
            }
            Some(_) => {}
        }
        let entry = by_id.entry(id.to_owned()).or_insert_with(|| VideoVectors {
            video_id: id.to_owned(),
            ..Default::default()
        });
        let slot = match field {
            TextField::Title => &mut entry.title,
            TextField::Description => &mut entry.description,
        };
        if slot.replace(v).is_some() {
            return Err(Error::parse(ln, format!("repeated {tag} vector for {id}")));
        }
    }
    Ok(by_id.into_values().collect())
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ContentReport {
    /// Channels with no vectorized video.
    pub omitted: Vec<String>,
    /// Listed videos that had no vectors at all.
    pub videos_without_vectors: usize,
}

/// Average per-video vectors into one vector per channel.
pub fn aggregate_content(
    per_video: &[VideoVectors],
    channel_index: &BTreeMap<String, Vec<String>>,
) -> Result<(EmbeddingTable, ContentReport)> {
    let mut dim = None;
    let mut video_vecs: HashMap<&str, Vec<f64>> = HashMap::with_capacity(per_video.len());
    for v in per_video {
        let Some(d) = v.dim() else { continue };
        if let (Some(t), Some(desc)) = (&v.title, &v.description) {
            if t.len() != desc.len() {
                return Err(Error::DimensionMismatch {
                    expected: t.len(),
                    got: desc.len(),
                });
            }
        }
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::DimensionMismatch { expected, got: d })
            }
            Some(_) => {}
        }
        if let Some(vec) = v.video_vector() {
            video_vecs.insert(v.video_id.as_str(), vec);
        }
    }
    let dim = dim.ok_or_else(|| Error::Insufficient("no video vectors".into()))?;

    let mut report = ContentReport::default();
    let mut entries = Vec::new();
    for (channel, videos) in channel_index {
        let mut sum = vec![0.0; dim];
        let mut n = 0usize;
        for vid in videos {
            match video_vecs.get(vid.as_str()) {
                Some(v) => {
                    sum.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                    n += 1;
                }
                None => report.videos_without_vectors += 1,
            }
        }
        if n == 0 {
            report.omitted.push(channel.clone());
            continue;
        }
        sum.iter_mut().for_each(|a| *a /= n as f64);
        entries.push((channel.clone(), sum));
    }
    if !report.omitted.is_empty() {
        log::warn!(
            "{} channels have no vectorized videos",
            report.omitted.len()
        );
    }
    Ok((
        EmbeddingTable::from_entries(dim, Provenance::Con, entries)?,
        report,
    ))
}
