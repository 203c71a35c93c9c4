use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use tube2vec::ingest::{
    build_sharing_matrix, filter_channels, filter_spam, majority_category, parse_channels,
    parse_tuples, parse_video_map, read_language_overrides, ChannelFilter, LanguageOverrides,
    VideoChannelMap, DEFAULT_MAX_VIDEOS_PER_AUTHOR,
};

use crate::io;
use crate::Ctx;

/// Writes, under `--out`: `sharing.mtx` (with `.rows`/`.cols` id lists),
/// `retained.txt` (channels passing the filters), `categories.csv`
/// (majority category per channel) and `videos.tsv` (videos per channel).
#[derive(Debug, clap::Args)]
pub struct Args {
    /// Sharing tuples (subreddit, video, author, source, timestamp; tab-separated).
    #[arg(long, value_name = "PATH")]
    tuples: PathBuf,
    /// Channel records, one JSON object per line.
    #[arg(long, value_name = "PATH")]
    channels: PathBuf,
    /// Video-to-channel map (video_id<TAB>channel_id); repeat to merge several.
    #[arg(long, value_name = "PATH", required = true)]
    video_map: Vec<PathBuf>,
    /// Per-channel language overrides (channel_id<TAB>language).
    #[arg(long, value_name = "PATH")]
    language_overrides: Option<PathBuf>,
    /// Keep channels with strictly more subscribers than this.
    #[arg(long, default_value_t = ChannelFilter::default().min_subscribers)]
    min_subscribers: u64,
    /// Language to keep (primary subtag).
    #[arg(long, default_value_t = ChannelFilter::default().language)]
    language: String,
    /// Drop authors who linked more distinct videos than this.
    #[arg(long, default_value_t = DEFAULT_MAX_VIDEOS_PER_AUTHOR)]
    max_videos_per_author: usize,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

pub fn run(_ctx: &Ctx, a: Args) -> anyhow::Result<()> {
    let parsed = io::read("channel records", &a.channels, parse_channels)?;
    if parsed.skipped > 0 {
        log::warn!("{} malformed channel records skipped", parsed.skipped);
    }
    let overrides = match &a.language_overrides {
        Some(p) => io::read("language overrides", p, read_language_overrides)?,
        None => LanguageOverrides::new(),
    };
    let n_channels = parsed.channels.len();
    let filter = ChannelFilter {
        min_subscribers: a.min_subscribers,
        language: a.language.clone(),
    };
    let kept = filter_channels(parsed.channels, &filter, &overrides);
    log::info!("{} of {n_channels} channels pass the filters", kept.len());

    let mut map = VideoChannelMap::new();
    for p in &a.video_map {
        let m = io::read("video map", p, parse_video_map)?;
        let conflicts = map.extend(m);
        if conflicts > 0 {
            log::warn!(
                "{}: {conflicts} video ids already mapped elsewhere ignored",
                p.display()
            );
        }
    }

    let parsed = io::read("sharing tuples", &a.tuples, parse_tuples)?;
    if parsed.skipped > 0 {
        log::warn!("{} malformed tuples skipped", parsed.skipped);
    }
    let n_tuples = parsed.tuples.len();
    let tuples = filter_spam(parsed.tuples, a.max_videos_per_author);
    log::info!(
        "{} of {n_tuples} tuples survive the spam filter",
        tuples.len()
    );

    let retained: BTreeSet<String> = kept.iter().map(|c| c.channel_id.clone()).collect();
    let (matrix, report) =
        build_sharing_matrix(&tuples, &map, &retained).context("building the sharing matrix")?;
    log::info!(
        "sharing matrix: {} channels x {} subreddits, {} nonzeros; {} tuples unresolved, {} outside the retained channels",
        matrix.n_rows(),
        matrix.n_cols(),
        matrix.nnz(),
        report.unresolved,
        report.not_retained
    );

    let categories: BTreeMap<String, String> = kept
        .iter()
        .filter_map(|c| Some((c.channel_id.clone(), majority_category(c)?.to_owned())))
        .collect();
    let index: BTreeMap<String, Vec<String>> = kept
        .iter()
        .map(|c| {
            let videos = c.videos.iter().map(|v| v.video_id.clone()).collect();
            (c.channel_id.clone(), videos)
        })
        .collect();

    let mtx = a.out.join("sharing.mtx");
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    matrix.save(&mtx).context("writing the sharing matrix")?;
    log::info!("wrote sharing matrix to {}", mtx.display());
    io::write("retained channels", &a.out.join("retained.txt"), |w| {
        for id in &retained {
            writeln!(w, "{id}")?;
        }
        Ok(())
    })?;
    io::write("categories", &a.out.join("categories.csv"), |w| {
        io::write_categories(w, &categories)
    })?;
    io::write("channel videos", &a.out.join("videos.tsv"), |w| {
        io::write_channel_index(w, &index)
    })
}
