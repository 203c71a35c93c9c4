use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

/// The 15 categories a creator can pick for a video.
pub const PLATFORM_CATEGORIES: [&str; 15] = [
    "Autos & Vehicles",
    "Comedy",
    "Education",
    "Entertainment",
    "Film & Animation",
    "Gaming",
    "Howto & Style",
    "Music",
    "News & Politics",
    "Nonprofits & Activism",
    "People & Blogs",
    "Pets & Animals",
    "Science & Technology",
    "Sports",
    "Travel & Events",
];

const MAX_RECENT_VIDEOS: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub category: String,
    #[serde(default)]
    pub views: u64,
    /// Caption track language, when the video has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption_language: Option<String>,
}

/// A channel with the metadata of (up to) its 50 most recent videos.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub channel_id: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// `None` when the platform hides the count.
    #[serde(default)]
    pub subscribers: Option<u64>,
    #[serde(default)]
    pub views: u64,
    #[serde(default)]
    pub created_at: i64,
    #[serde(default)]
    pub category_votes: BTreeMap<String, u32>,
    #[serde(default)]
    pub language: String,
    #[serde(default)]
    pub videos: Vec<VideoRecord>,
}

impl ChannelRecord {
    /// Recompute `category_votes` from the video list.
    pub fn tally_votes(videos: &[VideoRecord]) -> BTreeMap<String, u32> {
        let mut votes = BTreeMap::new();
        for v in videos {
            *votes.entry(v.category.clone()).or_insert(0) += 1;
        }
        votes
    }

    pub fn validate(&self) -> Result<()> {
        if self.channel_id.is_empty() || self.channel_id.contains(char::is_whitespace) {
            return Err(Error::invalid(format!(
                "bad channel id `{}`",
                self.channel_id
            )));
        }
        if self.videos.len() > MAX_RECENT_VIDEOS {
            return Err(Error::invalid(format!(
                "channel {} lists {} videos (max {MAX_RECENT_VIDEOS})",
                self.channel_id,
                self.videos.len()
            )));
        }
        let mut seen = HashSet::new();
        for v in &self.videos {
            if v.video_id.is_empty() || !seen.insert(v.video_id.as_str()) {
                return Err(Error::invalid(format!(
                    "channel {}: empty or repeated video id `{}`",
                    self.channel_id, v.video_id
                )));
            }
            if !PLATFORM_CATEGORIES.contains(&v.category.as_str()) {
                return Err(Error::invalid(format!(
                    "video {}: unknown category `{}`",
                    v.video_id, v.category
                )));
            }
        }
        let votes: u64 = self.category_votes.values().map(|&c| u64::from(c)).sum();
        if votes != self.videos.len() as u64 {
            return Err(Error::invalid(format!(
                "channel {}: category votes sum to {votes}, but {} videos are listed",
                self.channel_id,
                self.videos.len()
            )));
        }
        Ok(())
    }
}

/// The channel's category by majority vote over its recent videos.
///
/// Ties go to the category whose tied videos have more total views, then to
/// the lexicographically smallest name.
pub fn majority_category(channel: &ChannelRecord) -> Option<&str> {
    let top = *channel.category_votes.values().max()?;
    if top == 0 {
        return None;
    }
    let views_of = |cat: &str| -> u64 {
        channel
            .videos
            .iter()
            .filter(|v| v.category == cat)
            .map(|v| v.views)
            .sum()
    };
    // BTreeMap iteration is already lexicographic, so a strict `>` keeps the
    // smallest name among equal view totals.
    let mut best: Option<(&str, u64)> = None;
    for (cat, &n) in &channel.category_votes {
        if n != top {
            continue;
        }
        let views = views_of(cat);
        if best.is_none_or(|(_, bv)| views > bv) {
            best = Some((cat.as_str(), views));
        }
    }
    best.map(|(c, _)| c)
}

#[derive(Debug, Default)]
pub struct ParsedChannels {
    pub channels: Vec<ChannelRecord>,
    pub skipped: usize,
}

/// Parse one JSON object per line; invalid records are counted and skipped.
pub fn parse_channels<R: BufRead>(reader: R) -> Result<ParsedChannels> {
    let mut out = ParsedChannels::default();
    let mut total = 0;
    for line in text::content_lines(reader) {
        let (ln, line) = line?;
        total += 1;
        let rec = serde_json::from_str::<ChannelRecord>(&line)
            .map_err(|e| Error::parse(ln, e.to_string()))
            .and_then(|r| r.validate().map(|()| r));
        match rec {
            Ok(r) => out.channels.push(r),
            Err(e) => {
                log::warn!("channels line {ln}: {e}; skipped");
                out.skipped += 1;
            }
        }
    }
    super::check_malformed("channel records", out.skipped, total)?;
    Ok(out)
}

/// Precomputed per-channel language decisions, e.g. from a language detector.
pub type LanguageOverrides = HashMap<String, String>;

/// Parse `channel_id<TAB>language` lines.
pub fn read_language_overrides<R: BufRead>(reader: R) -> Result<LanguageOverrides> {
    let mut out = LanguageOverrides::new();
    for line in text::content_lines(reader) {
        let (ln, line) = line?;
        match line.split_once('\t') {
            Some((c, l)) if !c.is_empty() && !l.trim().is_empty() => {
                out.insert(c.to_owned(), l.trim().to_owned());
            }
            _ => return Err(Error::parse(ln, "expected `channel_id<TAB>language`")),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ChannelFilter {
    /// Channels must have strictly more subscribers than this.
    pub min_subscribers: u64,
    /// Primary language subtag to keep, e.g. `en`.
    pub language: String,
}

impl Default for ChannelFilter {
    fn default() -> Self {
        ChannelFilter {
            min_subscribers: 100_000,
            language: "en".into(),
        }
    }
}

fn primary_subtag(tag: &str) -> &str {
    tag.split(['-', '_']).next().unwrap_or("")
}

fn same_language(tag: &str, wanted: &str) -> bool {
    !tag.is_empty() && primary_subtag(tag).eq_ignore_ascii_case(primary_subtag(wanted))
}

/// Language of a channel: an override if present, else the channel's own
/// metadata tag, else the majority caption language of its videos.
fn channel_language<'a>(c: &'a ChannelRecord, overrides: &'a LanguageOverrides) -> Option<&'a str> {
    if let Some(l) = overrides.get(&c.channel_id) {
        return Some(l);
    }
    if !c.language.trim().is_empty() {
        return Some(c.language.trim());
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &c.videos {
        if let Some(l) = v.caption_language.as_deref() {
            *counts.entry(primary_subtag(l)).or_default() += 1;
        }
    }
    let (lang, n) = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))?;
    // "mainly": more than half of the videos.
    (2 * n > c.videos.len()).then_some(lang)
}

pub fn filter_channels(
    channels: Vec<ChannelRecord>,
    filter: &ChannelFilter,
    overrides: &LanguageOverrides,
) -> Vec<ChannelRecord> {
    let mut missing_subs = 0;
    let kept: Vec<_> = channels
        .into_iter()
        .filter(|c| {
            let Some(subs) = c.subscribers else {
                log::debug!("channel {}: no subscriber count, excluded", c.channel_id);
                missing_subs += 1;
                return false;
            };
            subs > filter.min_subscribers
                && channel_language(c, overrides)
                    .is_some_and(|l| same_language(l, &filter.language))
        })
        .collect();
    if missing_subs > 0 {
        log::warn!("{missing_subs} channels without subscriber counts excluded");
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn video(id: &str, category: &str, views: u64) -> VideoRecord {
        VideoRecord {
            video_id: id.into(),
            title: format!("title {id}"),
            description: String::new(),
            category: category.into(),
            views,
            caption_language: None,
        }
    }

    fn channel(id: &str, subs: Option<u64>, lang: &str, videos: Vec<VideoRecord>) -> ChannelRecord {
        ChannelRecord {
            channel_id: id.into(),
            name: id.to_uppercase(),
            description: String::new(),
            subscribers: subs,
            views: 0,
            created_at: 1_300_000_000,
            category_votes: ChannelRecord::tally_votes(&videos),
            language: lang.into(),
            videos,
        }
    }

    #[test]
    fn subscriber_threshold_is_strict() {
        let f = ChannelFilter::default();
        let none = LanguageOverrides::new();
        let kept = filter_channels(vec![channel("a", Some(100_001), "en", vec![])], &f, &none);
        assert_eq!(kept.len(), 1);
        let dropped = filter_channels(vec![channel("b", Some(99_999), "en", vec![])], &f, &none);
        assert!(dropped.is_empty());
        let exact = filter_channels(vec![channel("c", Some(100_000), "en", vec![])], &f, &none);
        assert!(exact.is_empty());
    }

    #[test]
    fn mixed_fixture_keeps_exactly_two() {
        let f = ChannelFilter::default();
        let mut captions = vec![
            video("x1", "Music", 1),
            video("x2", "Music", 1),
            video("x3", "Music", 1),
        ];
        for (i, v) in captions.iter_mut().enumerate() {
            v.caption_language = Some(if i < 2 { "en-GB".into() } else { "fr".into() });
        }
        let channels = vec![
            channel("keep-meta", Some(500_000), "en-US", vec![]),
            channel("small", Some(5_000), "en", vec![]),
            channel("french", Some(900_000), "fr", vec![]),
            channel("hidden", None, "en", vec![]),
            channel("keep-captions", Some(200_000), "", captions),
        ];
        let kept = filter_channels(channels, &f, &LanguageOverrides::new());
        let ids: Vec<_> = kept.iter().map(|c| c.channel_id.as_str()).collect();
        assert_eq!(ids, ["keep-meta", "keep-captions"]);
    }

    #[test]
    fn override_wins_over_metadata() {
        let f = ChannelFilter::default();
        let mut o = LanguageOverrides::new();
        o.insert("a".into(), "de".into());
        let kept = filter_channels(vec![channel("a", Some(1_000_000), "en", vec![])], &f, &o);
        assert!(kept.is_empty());
    }

    #[test]
    fn majority_tie_breaks_on_views_then_name() {
        let c = channel(
            "c",
            Some(1),
            "en",
            vec![
                video("1", "Music", 10),
                video("2", "Gaming", 50),
                video("3", "Sports", 3),
            ],
        );
        assert_eq!(majority_category(&c), Some("Gaming"));
        let c = channel(
            "c",
            Some(1),
            "en",
            vec![video("1", "Music", 7), video("2", "Gaming", 7)],
        );
        assert_eq!(majority_category(&c), Some("Gaming"));
        let c = channel(
            "c",
            Some(1),
            "en",
            vec![
                video("1", "Music", 7),
                video("2", "Music", 1),
                video("3", "Gaming", 100),
            ],
        );
        assert_eq!(majority_category(&c), Some("Music"));
        assert_eq!(
            majority_category(&channel("e", Some(1), "en", vec![])),
            None
        );
    }

    #[test]
    fn record_invariants_are_checked() {
        let mut c = channel("c", Some(1), "en", vec![video("1", "Music", 1)]);
        assert!(c.validate().is_ok());
        c.category_votes.insert("Gaming".into(), 1);
        assert!(c.validate().is_err());
        let dup = channel(
            "d",
            Some(1),
            "en",
            vec![video("1", "Music", 1), video("1", "Music", 1)],
        );
        assert!(dup.validate().is_err());
        let bad = channel("d", Some(1), "en", vec![video("1", "Cooking", 1)]);
        assert!(bad.validate().is_err());
        let many = channel(
            "m",
            Some(1),
            "en",
            (0..51).map(|i| video(&i.to_string(), "Music", 1)).collect(),
        );
        assert!(many.validate().is_err());
    }

    #[test]
    fn json_lines_round_trip() {
        let c = channel("c", Some(123_456), "en", vec![video("1", "Music", 9)]);
        let line = serde_json::to_string(&c).unwrap();
        let parsed = parse_channels(format!("{line}\n{line}\nnot json\n").as_bytes()).unwrap();
        assert_eq!(parsed.channels, vec![c.clone(), c]);
        assert_eq!(parsed.skipped, 1);
    }
}
