use std::ffi::OsString;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmd;
mod config;
mod io;

const GLOBAL: &str = "Global options";

/// Channel embeddings from social sharing, content and recommendations, and
/// the tools to evaluate them.
#[derive(Debug, Parser)]
#[command(name = "tube2vec", version, arg_required_else_help = true)]
struct Cli {
    /// Global seed; every random stage derives its own seed from this and its name.
    #[arg(long, global = true, default_value_t = 0, help_heading = GLOBAL)]
    seed: u64,

    /// Worker threads for parallel stages (0 = one per core). Results do not
    /// depend on this, except for `embed-rec --workers`.
    #[arg(long, global = true, default_value_t = 1, help_heading = GLOBAL)]
    threads: usize,

    /// TOML file with default flag values: top-level keys for global flags,
    /// one `[subcommand]` table per subcommand. Command-line flags win.
    #[arg(long, global = true, value_name = "PATH", help_heading = GLOBAL)]
    config: Option<std::path::PathBuf>,

    /// More log output on standard error (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count, help_heading = GLOBAL)]
    verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose", help_heading = GLOBAL)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter channels and tuples and build the sharing matrix.
    Ingest(cmd::ingest::Args),
    /// Social embedding: sharing matrix times subreddit vectors.
    EmbedSoc(cmd::embed::SocArgs),
    /// Recommendation embedding: node2vec on the co-recommendation graph.
    EmbedRec(cmd::embed::RecArgs),
    /// Content embedding: mean of per-video text vectors.
    EmbedCon(cmd::embed::ConArgs),
    /// Build social dimensions from seed pairs and score channels on them.
    Dims(cmd::dims::DimsArgs),
    /// Carry dimension scores over to another embedding with a forest regressor.
    Transfer(cmd::dims::TransferArgs),
    /// Stratified sample of channels by dimension and -ness score.
    SampleBins(cmd::dims::BinsArgs),
    /// Fit latent scores to pairwise comparisons.
    PlFit(cmd::rank::PlArgs),
    /// Category separability: mean F1 of a forest classifier.
    EvalCategory(cmd::eval::CategoryArgs),
    /// Draw odd-one-out triplets from embeddings.
    SampleTriplets(cmd::eval::SampleArgs),
    /// Agreement of embeddings with rater odd-one-out choices.
    EvalTriplets(cmd::eval::TripletArgs),
    /// Rank correlation of dimension scores with labels or reference scores.
    EvalRank(cmd::rank::EvalArgs),
    /// Pooled two-proportion z-test.
    Ztest(cmd::rank::ZArgs),
}

/// Names as typed on the command line, for locating the subcommand in argv.
pub(crate) const SUBCOMMANDS: [&str; 13] = [
    "ingest",
    "embed-soc",
    "embed-rec",
    "embed-con",
    "dims",
    "transfer",
    "sample-bins",
    "pl-fit",
    "eval-category",
    "sample-triplets",
    "eval-triplets",
    "eval-rank",
    "ztest",
];

/// Seeds and settings shared by every subcommand.
pub(crate) struct Ctx {
    pub seed: u64,
}

impl Ctx {
    pub fn stage_seed(&self, name: &str) -> u64 {
        tube2vec::seed::derive_seed(self.seed, name)
    }
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("TUBE2VEC_LOG")
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn run(cli: Cli) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()?;
    let ctx = Ctx { seed: cli.seed };
    match cli.command {
        Command::Ingest(a) => cmd::ingest::run(&ctx, a),
        Command::EmbedSoc(a) => cmd::embed::soc(&ctx, a),
        Command::EmbedRec(a) => cmd::embed::rec(&ctx, a),
        Command::EmbedCon(a) => cmd::embed::con(&ctx, a),
        Command::Dims(a) => cmd::dims::dims(&ctx, a),
        Command::Transfer(a) => cmd::dims::transfer(&ctx, a),
        Command::SampleBins(a) => cmd::dims::bins(&ctx, a),
        Command::PlFit(a) => cmd::rank::pl_fit(&ctx, a),
        Command::EvalCategory(a) => cmd::eval::category(&ctx, a),
        Command::SampleTriplets(a) => cmd::eval::sample(&ctx, a),
        Command::EvalTriplets(a) => cmd::eval::triplets(&ctx, a),
        Command::EvalRank(a) => cmd::rank::eval(&ctx, a),
        Command::Ztest(a) => cmd::rank::ztest(&ctx, a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        // Help and version exit 0, everything else 2.
        Err(e) => e.exit(),
    };
    init_logging(cli.verbose, cli.quiet);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
