use std::path::PathBuf;

use anyhow::Context;
use tube2vec::content::{aggregate_content, parse_video_vectors};
use tube2vec::ingest::SharingMatrix;
use tube2vec::recommend::{
    build_rec_graph, generate_walks, parse_crawl_records, train_sgns, walks_to_ids, write_walks,
    Corpus, SgnsConfig, WalkConfig,
};
use tube2vec::social::embed_social;
use tube2vec::Provenance;

use crate::io;
use crate::Ctx;

#[derive(Debug, clap::Args)]
pub struct SocArgs {
    /// Sharing matrix written by `ingest` (its `.rows`/`.cols` files alongside).
    #[arg(long, value_name = "PATH")]
    matrix: PathBuf,
    /// Reference subreddit vectors.
    #[arg(long, value_name = "PATH")]
    subreddits: PathBuf,
    /// Output embedding.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

pub fn soc(_ctx: &Ctx, a: SocArgs) -> anyhow::Result<()> {
    let w = SharingMatrix::load(&a.matrix).context("reading the sharing matrix")?;
    let s = io::load_embedding(&a.subreddits, Provenance::External).context("subreddit vectors")?;
    let (c, report) = embed_social(&w, &s)?;
    if !report.omitted.is_empty() {
        log::warn!(
            "{} channels omitted: too few of their mentions fall on known subreddits",
            report.omitted.len()
        );
    }
    if !report.renormalized.is_empty() {
        log::info!(
            "{} channels re-normalized over known subreddits",
            report.renormalized.len()
        );
    }
    log::info!("{} channel vectors of dimension {}", c.len(), c.dim());
    io::write("social embedding", &a.out, |w| c.write_to(w))
}

#[derive(Debug, clap::Args)]
pub struct RecArgs {
    /// Recommendation crawl records; repeat to combine several crawls.
    #[arg(long, value_name = "PATH", required = true)]
    crawl: Vec<PathBuf>,
    /// Channels to keep, one id per line (`retained.txt` from `ingest`).
    #[arg(long, value_name = "PATH")]
    retained: PathBuf,
    /// Output embedding.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Also write the walks, one per line.
    #[arg(long, value_name = "PATH")]
    walks_out: Option<PathBuf>,
    /// Return parameter.
    #[arg(long, default_value_t = WalkConfig::default().p)]
    p: f64,
    /// In-out parameter.
    #[arg(long, default_value_t = WalkConfig::default().q)]
    q: f64,
    #[arg(long, default_value_t = WalkConfig::default().walk_length)]
    walk_length: usize,
    #[arg(long, default_value_t = WalkConfig::default().walks_per_node)]
    walks_per_node: usize,
    /// Largest deg(prev) x deg(cur) given a precomputed second-order table.
    #[arg(long, default_value_t = WalkConfig::default().alias_cap)]
    alias_cap: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = SgnsConfig::default().dim)]
    dim: usize,
    /// Context window on each side.
    #[arg(long, default_value_t = SgnsConfig::default().window)]
    window: usize,
    /// Negative samples per positive pair.
    #[arg(long, default_value_t = SgnsConfig::default().negatives)]
    negatives: usize,
    #[arg(long, default_value_t = SgnsConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = SgnsConfig::default().learning_rate)]
    learning_rate: f64,
    /// Training workers; more than one trades reproducibility for speed.
    #[arg(long, default_value_t = SgnsConfig::default().workers)]
    workers: usize,
}

pub fn rec(ctx: &Ctx, a: RecArgs) -> anyhow::Result<()> {
    let retained = io::read("retained channels", &a.retained, io::parse_id_list)?;
    let mut records = Vec::new();
    for p in &a.crawl {
        let parsed = io::read("crawl records", p, parse_crawl_records)?;
        if parsed.skipped > 0 {
            log::warn!(
                "{}: {} malformed records skipped",
                p.display(),
                parsed.skipped
            );
        }
        records.extend(parsed.records);
    }
    let (graph, _) = build_rec_graph(&records, &retained)?;
    log::info!(
        "co-recommendation graph: {} channels, {} edges",
        graph.n_nodes(),
        graph.n_edges()
    );

    let walk_cfg = WalkConfig {
        p: a.p,
        q: a.q,
        walk_length: a.walk_length,
        walks_per_node: a.walks_per_node,
        seed: ctx.stage_seed("embed-rec/walks"),
        alias_cap: a.alias_cap,
    };
    let sgns_cfg = SgnsConfig {
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        seed: ctx.stage_seed("embed-rec/sgns"),
        workers: a.workers,
    };
    let walks = walks_to_ids(&graph, &generate_walks(&graph, &walk_cfg)?);
    log::info!("{} walks", walks.len());
    if let Some(p) = &a.walks_out {
        io::write("walks", p, |w| write_walks(w, &walks))?;
    }
    let corpus = Corpus::from_sequences(&walks);
    let (table, report) = train_sgns(&corpus, &sgns_cfg).context("training skip-gram")?;
    for (e, loss) in report.epoch_losses.iter().enumerate() {
        log::info!("epoch {}: loss {loss:.6}", e + 1);
    }
    io::write("recommendation embedding", &a.out, |w| table.write_to(w))
}

#[derive(Debug, clap::Args)]
pub struct ConArgs {
    /// Per-video text vectors (`video_id title|description c1 .. cd`).
    #[arg(long, value_name = "PATH")]
    vectors: PathBuf,
    /// Videos of each channel (`videos.tsv` from `ingest`).
    #[arg(long, value_name = "PATH")]
    videos: PathBuf,
    /// Output embedding.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

pub fn con(_ctx: &Ctx, a: ConArgs) -> anyhow::Result<()> {
    let vectors = io::read("video vectors", &a.vectors, parse_video_vectors)?;
    let index = io::read("channel videos", &a.videos, io::parse_channel_index)?;
    let (table, report) = aggregate_content(&vectors, &index)?;
    if !report.omitted.is_empty() {
        log::warn!(
            "{} channels have no vectorized video and are omitted",
            report.omitted.len()
        );
    }
    if report.videos_without_vectors > 0 {
        log::info!(
            "{} listed videos have no vectors",
            report.videos_without_vectors
        );
    }
    io::write("content embedding", &a.out, |w| table.write_to(w))
}
