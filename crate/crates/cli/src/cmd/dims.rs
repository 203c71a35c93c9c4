use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use tube2vec::dimensions::{
    build_dimension, build_ness_dimension, parse_dimension_seeds, project, sample_bins,
    transfer_dimension, DimensionScores, DEFAULT_DIM_EDGES, DEFAULT_NESS_EDGES, DEFAULT_PER_BIN,
};
use tube2vec::evaluation::{fmt_rate, ResultTable};
use tube2vec::text::fmt_real;
use tube2vec::Provenance;

use super::ForestArgs;
use crate::io;
use crate::Ctx;

/// Writes `<name>.scores` and `<name>-ness.scores` under `--out-dir` for
/// every dimension in the seed file.
#[derive(Debug, clap::Args)]
pub struct DimsArgs {
    /// Reference subreddit vectors.
    #[arg(long, value_name = "PATH")]
    subreddits: PathBuf,
    /// Social channel embedding to score.
    #[arg(long, value_name = "PATH")]
    embedding: PathBuf,
    /// Seed pairs: `dimension,low_subreddit,high_subreddit` per line.
    #[arg(long, value_name = "PATH")]
    seeds: PathBuf,
    /// Directory for the score files.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Keep raw cosine scores instead of z-scores.
    #[arg(long)]
    raw: bool,
}

fn finish(s: DimensionScores, raw: bool) -> anyhow::Result<DimensionScores> {
    if raw {
        Ok(s)
    } else {
        let name = s.dimension.clone();
        s.standardize()
            .with_context(|| format!("standardizing `{name}`"))
    }
}

pub fn dims(_ctx: &Ctx, a: DimsArgs) -> anyhow::Result<()> {
    let s = io::load_embedding(&a.subreddits, Provenance::External).context("subreddit vectors")?;
    let c = io::load_embedding(&a.embedding, Provenance::Soc)?;
    let seeds = io::read("dimension seeds", &a.seeds, parse_dimension_seeds)?;
    if seeds.is_empty() {
        anyhow::bail!("{}: no dimensions defined", a.seeds.display());
    }
    let mut table = ResultTable::new("", &["dimension", "scored", "omitted"]);
    for (name, pairs) in &seeds {
        let specs = [
            build_dimension(&s, name, pairs),
            build_ness_dimension(&s, name, pairs),
        ];
        for spec in specs {
            let spec = spec.with_context(|| format!("building dimension `{name}`"))?;
            let (scores, omitted) = project(&c, &spec)?;
            let scores = finish(scores, a.raw)?;
            let path = a
                .out_dir
                .join(format!("{}.scores", io::file_stem(&spec.name)));
            io::save_scores(&path, &scores)?;
            table.push(vec![
                spec.name.clone(),
                scores.len().to_string(),
                omitted.len().to_string(),
            ]);
        }
    }
    print!("{}", table.to_text());
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct TransferArgs {
    /// Embedding to carry the scores over to.
    #[arg(long, value_name = "PATH")]
    target: PathBuf,
    /// Which embedding the target is.
    #[arg(long, default_value = "con")]
    provenance: Provenance,
    /// Scores to learn from (usually from `dims`).
    #[arg(long, value_name = "PATH")]
    scores: PathBuf,
    /// Predicted scores for every channel of the target.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Report z-scores instead of raw predictions.
    #[arg(long)]
    standardize: bool,
    #[command(flatten)]
    forest: ForestArgs,
}

pub fn transfer(ctx: &Ctx, a: TransferArgs) -> anyhow::Result<()> {
    let target = io::load_embedding(&a.target, a.provenance)?;
    let train = io::load_scores(&a.scores)?;
    let seed = ctx.stage_seed(&format!("transfer/{}/{}", train.dimension, a.provenance));
    let t = transfer_dimension(&target, &train, &a.forest.config(seed))
        .with_context(|| format!("transferring `{}` to {}", train.dimension, a.provenance))?;
    let scores = finish(t.scores, !a.standardize)?;
    io::save_scores(&a.out, &scores)?;
    let r2 = t.oob_r2.map_or_else(|| "undefined".into(), fmt_rate);
    println!(
        "{}\t{}\ttrained on {}\tout-of-bag R2 {r2}",
        train.dimension, a.provenance, t.n_train
    );
    Ok(())
}

fn edges(s: &[f64]) -> String {
    s.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(",")
}

/// Writes `channel_id,dim_low,dim_high,ness_low,ness_high` for every sampled
/// channel and prints the bin populations.
#[derive(Debug, clap::Args)]
pub struct BinsArgs {
    /// Standardized dimension scores.
    #[arg(long, value_name = "PATH")]
    scores: PathBuf,
    /// Standardized -ness scores.
    #[arg(long, value_name = "PATH")]
    ness: PathBuf,
    /// Bin edges along the dimension.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
          default_values_t = DEFAULT_DIM_EDGES)]
    dim_edges: Vec<f64>,
    /// Bin edges along the -ness dimension.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
          default_values_t = DEFAULT_NESS_EDGES)]
    ness_edges: Vec<f64>,
    /// Channels drawn per bin.
    #[arg(long, default_value_t = DEFAULT_PER_BIN)]
    per_bin: usize,
    /// Sampled channels with their bins, as CSV.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

pub fn bins(ctx: &Ctx, a: BinsArgs) -> anyhow::Result<()> {
    let scores = io::load_scores(&a.scores)?;
    let ness = io::load_scores(&a.ness)?;
    let seed = ctx.stage_seed(&format!("sample-bins/{}", scores.dimension));
    let sample = sample_bins(&scores, &ness, &a.dim_edges, &a.ness_edges, a.per_bin, seed)?;
    for w in &sample.warnings {
        log::warn!("{w}");
    }
    if !sample.excluded.is_empty() {
        log::info!(
            "{} channels fall outside the bin edges and are excluded",
            sample.excluded.len()
        );
    }
    io::write("bin sample", &a.out, |w| {
        writeln!(w, "channel_id,dim_low,dim_high,ness_low,ness_high")?;
        for b in &sample.bins {
            for id in &b.sampled {
                writeln!(
                    w,
                    "{id},{},{}",
                    edges(&[b.dim_interval.0, b.dim_interval.1]),
                    edges(&[b.ness_interval.0, b.ness_interval.1])
                )?;
            }
        }
        Ok(())
    })?;
    let mut table = ResultTable::new(
        format!("{} bins", scores.dimension),
        &["dimension", "ness", "population", "sampled"],
    );
    for b in &sample.bins {
        table.push(vec![
            format!("({}]", edges(&[b.dim_interval.0, b.dim_interval.1])),
            format!("({}]", edges(&[b.ness_interval.0, b.ness_interval.1])),
            b.population.to_string(),
            b.sampled.len().to_string(),
        ]);
    }
    print!("{}", table.to_text());
    Ok(())
}
