use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::text;

/// 2010-01-01T00:00:00Z.
pub const COLLECTION_START: i64 = 1_262_304_000;
/// 2022-09-01T00:00:00Z, exclusive.
pub const COLLECTION_END: i64 = 1_661_990_400;

pub const DEFAULT_MAX_VIDEOS_PER_AUTHOR: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Post,
    Comment,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Post => "post",
            Source::Comment => "comment",
        })
    }
}

impl FromStr for Source {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "post" => Ok(Source::Post),
            "comment" => Ok(Source::Comment),
            _ => Err(()),
        }
    }
}

/// One mention of a video in a subreddit by an author.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SharingTuple {
    pub subreddit: String,
    pub video_id: String,
    pub author_id: String,
    pub source: Source,
    pub timestamp: i64,
}

impl SharingTuple {
    fn parse_line(line: &str) -> Option<SharingTuple> {
        let mut f = line.split('\t');
        let subreddit = f.next()?;
        let video_id = f.next()?;
        let author_id = f.next()?;
        let source = f.next()?.parse().ok()?;
        let timestamp: i64 = f.next()?.trim().parse().ok()?;
        if f.next().is_some()
            || subreddit.is_empty()
            || video_id.is_empty()
            || author_id.is_empty()
            || !(COLLECTION_START..COLLECTION_END).contains(&timestamp)
        {
            return None;
        }
        Some(SharingTuple {
            subreddit: subreddit.to_owned(),
            video_id: video_id.to_owned(),
            author_id: author_id.to_owned(),
            source,
            timestamp,
        })
    }
}

#[derive(Debug, Default)]
pub struct ParsedTuples {
    pub tuples: Vec<SharingTuple>,
    pub skipped: usize,
}

/// Parse the tab-separated tuples format, skipping and counting malformed lines.
pub fn parse_tuples<R: BufRead>(reader: R) -> Result<ParsedTuples> {
    let mut out = ParsedTuples::default();
    let mut total = 0;
    for line in text::content_lines(reader) {
        let (ln, line) = line?;
        total += 1;
        match SharingTuple::parse_line(&line) {
            Some(t) => out.tuples.push(t),
            None => {
                log::debug!("tuples line {ln}: malformed, skipped");
                out.skipped += 1;
            }
        }
    }
    super::check_malformed("sharing tuples", out.skipped, total)?;
    Ok(out)
}

pub fn write_tuples<W: Write>(mut w: W, tuples: &[SharingTuple]) -> Result<()> {
    for t in tuples {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            t.subreddit, t.video_id, t.author_id, t.source, t.timestamp
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Anything that records who shared which video.
pub trait Mention {
    fn author(&self) -> &str;
    fn video(&self) -> &str;
}

impl Mention for SharingTuple {
    fn author(&self) -> &str {
        &self.author_id
    }

    fn video(&self) -> &str {
        &self.video_id
    }
}

/// Drop every mention by authors who linked more than `max_videos_per_author`
/// distinct videos.
pub fn filter_spam<T: Mention>(tuples: Vec<T>, max_videos_per_author: usize) -> Vec<T> {
    let mut videos_by_author: HashMap<&str, HashSet<&str>> = HashMap::new();
    for t in &tuples {
        videos_by_author
            .entry(t.author())
            .or_default()
            .insert(t.video());
    }
    let spammers: HashSet<String> = videos_by_author
        .into_iter()
        .filter(|(_, v)| v.len() > max_videos_per_author)
        .map(|(a, _)| a.to_owned())
        .collect();
    if !spammers.is_empty() {
        log::info!("spam filter: removing {} authors", spammers.len());
    }
    tuples
        .into_iter()
        .filter(|t| !spammers.contains(t.author()))
        .collect()
}

/// video id -> channel id.
#[derive(Clone, Debug, Default)]
pub struct VideoChannelMap {
    map: HashMap<String, String>,
}

impl VideoChannelMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a mapping. An existing mapping for the video is kept; returns
    /// false when the new one conflicts with it.
    pub fn insert(&mut self, video: String, channel: String) -> bool {
        match self.map.get(&video) {
            Some(existing) => existing == &channel,
            None => {
                self.map.insert(video, channel);
                true
            }
        }
    }

    pub fn get(&self, video: &str) -> Option<&str> {
        self.map.get(video).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Merge another map (e.g. a re-hydration dataset) without overriding.
    pub fn extend(&mut self, other: VideoChannelMap) -> usize {
        let mut conflicts = 0;
        for (v, c) in other.map {
            if !self.insert(v, c) {
                conflicts += 1;
            }
        }
        conflicts
    }
}

impl FromIterator<(String, String)> for VideoChannelMap {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        let mut m = VideoChannelMap::new();
        for (v, c) in iter {
            m.insert(v, c);
        }
        m
    }
}

/// Parse the two-column `video_id<TAB>channel_id` format.
pub fn parse_video_map<R: BufRead>(reader: R) -> Result<VideoChannelMap> {
    let mut m = VideoChannelMap::new();
    let mut conflicts = 0;
    for line in text::content_lines(reader) {
        let (ln, line) = line?;
        let mut f = line.split('\t');
        match (f.next(), f.next(), f.next()) {
            (Some(v), Some(c), None) if !v.is_empty() && !c.is_empty() => {
                if !m.insert(v.to_owned(), c.trim_end().to_owned()) {
                    conflicts += 1;
                }
            }
            _ => return Err(Error::parse(ln, "expected `video_id<TAB>channel_id`")),
        }
    }
    if conflicts > 0 {
        log::warn!("video map: {conflicts} conflicting duplicate video ids ignored");
    }
    Ok(m)
}

/// A tuple annotated with its channel, if the video could be resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedTuple {
    pub tuple: SharingTuple,
    pub channel: Option<String>,
}

impl Mention for ResolvedTuple {
    fn author(&self) -> &str {
        &self.tuple.author_id
    }

    fn video(&self) -> &str {
        &self.tuple.video_id
    }
}

pub fn resolve(tuples: Vec<SharingTuple>, map: &VideoChannelMap) -> Vec<ResolvedTuple> {
    tuples
        .into_iter()
        .map(|t| {
            let channel = map.get(&t.video_id).map(str::to_owned);
            ResolvedTuple { tuple: t, channel }
        })
        .collect()
}
