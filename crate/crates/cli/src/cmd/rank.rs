use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use tube2vec::dimensions::DimensionScores;
use tube2vec::evaluation::{fmt_rate, ResultTable};
use tube2vec::ranking::{
    fit_plackett_luce, label_rank, parse_comparisons, parse_labels, tau_c, tau_c_difference_ci,
    two_proportion_ztest, PlConfig,
};

use crate::io::{self, Named};
use crate::Ctx;

/// Writes `<dimension>.pl` under `--out-dir`: the log of each item's fitted
/// score, in the dimension-scores format.
#[derive(Debug, clap::Args)]
pub struct PlArgs {
    /// Comparison records (`dimension,winner,loser,rater_id`).
    #[arg(long, value_name = "PATH")]
    comparisons: PathBuf,
    /// Fit only these dimensions (all by default); repeatable.
    #[arg(long)]
    dimension: Vec<String>,
    /// Pseudo-wins and pseudo-losses per item against a reference item.
    #[arg(long, default_value_t = PlConfig::default().prior)]
    prior: f64,
    /// Convergence threshold on log-scores.
    #[arg(long, default_value_t = PlConfig::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = PlConfig::default().max_iter)]
    max_iter: usize,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

pub fn pl_fit(_ctx: &Ctx, a: PlArgs) -> anyhow::Result<()> {
    let records = io::read("comparisons", &a.comparisons, parse_comparisons)?;
    let mut by_dim: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::new();
    for r in &records {
        by_dim
            .entry(&r.dimension)
            .or_default()
            .push((&r.winner, &r.loser));
    }
    for d in &a.dimension {
        if !by_dim.contains_key(d.as_str()) {
            bail!(
                "{}: no comparisons for dimension `{d}`",
                a.comparisons.display()
            );
        }
    }
    let cfg = PlConfig {
        tol: a.tol,
        max_iter: a.max_iter,
        prior: a.prior,
    };
    let mut table = ResultTable::new(
        "",
        &[
            "dimension",
            "items",
            "comparisons",
            "iterations",
            "converged",
            "log-likelihood",
        ],
    );
    for (dim, pairs) in &by_dim {
        if !a.dimension.is_empty() && !a.dimension.iter().any(|d| d == dim) {
            continue;
        }
        let fit = fit_plackett_luce(pairs.iter().copied(), &cfg)
            .with_context(|| format!("fitting dimension `{dim}`"))?;
        for w in &fit.warnings {
            log::warn!("{dim}: {w}");
        }
        if !fit.converged {
            log::warn!("{dim}: no convergence after {} iterations", fit.iterations);
        }
        let scores = DimensionScores {
            dimension: dim.to_string(),
            scores: fit
                .scores
                .iter()
                .map(|(k, s)| (k.clone(), s.ln()))
                .collect(),
            standardized: false,
        };
        io::save_scores(
            &a.out_dir.join(format!("{}.pl", io::file_stem(dim))),
            &scores,
        )?;
        table.push(vec![
            dim.to_string(),
            fit.scores.len().to_string(),
            pairs.len().to_string(),
            fit.iterations.to_string(),
            fit.converged.to_string(),
            format!("{:.4}", fit.log_likelihood),
        ]);
    }
    print!("{}", table.to_text());
    Ok(())
}

/// Prints τc of each embedding's scores against the target, then bootstrap
/// intervals for the difference between every pair of embeddings.
#[derive(Debug, clap::Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["labels", "reference"])))]
pub struct EvalArgs {
    /// Dimension scores of one embedding as NAME=PATH; repeatable.
    #[arg(long = "scores", value_name = "NAME=PATH", required = true)]
    scores: Vec<Named>,
    /// Ordinal labels (`channel_id,label`).
    #[arg(long, value_name = "PATH")]
    labels: Option<PathBuf>,
    /// Reference scores, e.g. from `pl-fit`.
    #[arg(long, value_name = "PATH")]
    reference: Option<PathBuf>,
    /// Bootstrap resamples for the pairwise differences (0 to skip).
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    /// Confidence level of the intervals.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Also write the correlation table as CSV.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Target values keyed by channel.
fn target(a: &EvalArgs) -> anyhow::Result<(String, BTreeMap<String, f64>)> {
    if let Some(p) = &a.labels {
        let labels = io::read("labels", p, parse_labels)?;
        let ranks = labels
            .iter()
            .map(|(id, l)| {
                let r = label_rank(l)
                    .with_context(|| format!("{}: unknown label `{l}` for `{id}`", p.display()))?;
                Ok((id.clone(), f64::from(r)))
            })
            .collect::<anyhow::Result<_>>()?;
        return Ok(("labels".into(), ranks));
    }
    let p = a.reference.as_ref().expect("clap enforces one target");
    let r = io::load_scores(p)?;
    Ok((format!("{} reference", r.dimension), r.scores))
}

pub fn eval(ctx: &Ctx, a: EvalArgs) -> anyhow::Result<()> {
    let (what, y) = target(&a)?;
    let mut runs: Vec<(String, DimensionScores)> = Vec::new();
    for n in &a.scores {
        let name = n.provenance.to_string();
        if runs.iter().any(|(m, _)| *m == name) {
            bail!("scores for `{name}` given twice");
        }
        runs.push((name, io::load_scores(&n.path)?));
    }

    let mut table = ResultTable::new(
        format!("tau-c against {what}"),
        &["embedding", "n", "tau_c"],
    );
    for (name, s) in &runs {
        let (x, t): (Vec<f64>, Vec<f64>) = s
            .scores
            .iter()
            .filter_map(|(id, v)| Some((*v, *y.get(id)?)))
            .unzip();
        let tau =
            tau_c(&x, &t).with_context(|| format!("{name}: tau-c over {} channels", x.len()))?;
        table.push(vec![name.clone(), x.len().to_string(), fmt_rate(tau)]);
    }
    print!("{}", table.to_text());
    if let Some(p) = &a.out {
        io::write_text("correlation table", p, &table.to_csv())?;
    }

    if a.bootstrap == 0 || runs.len() < 2 {
        return Ok(());
    }
    let mut diffs = ResultTable::new(
        format!(
            "tau-c differences, {}% bootstrap intervals",
            a.level * 100.0
        ),
        &["pair", "n", "difference", "lower", "upper"],
    );
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (na, sa) = &runs[i];
            let (nb, sb) = &runs[j];
            let mut xa = Vec::new();
            let mut xb = Vec::new();
            let mut t = Vec::new();
            for (id, v) in &sa.scores {
                if let (Some(w), Some(yv)) = (sb.scores.get(id), y.get(id)) {
                    xa.push(*v);
                    xb.push(*w);
                    t.push(*yv);
                }
            }
            let seed = ctx.stage_seed(&format!("eval-rank/{na}-{nb}"));
            let ci = tau_c_difference_ci(&xa, &xb, &t, a.bootstrap, a.level, seed)
                .with_context(|| format!("bootstrapping {na} - {nb}"))?;
            diffs.push(vec![
                format!("{na} - {nb}"),
                t.len().to_string(),
                fmt_rate(ci.estimate),
                fmt_rate(ci.lower),
                fmt_rate(ci.upper),
            ]);
        }
    }
    println!();
    print!("{}", diffs.to_text());
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct ZArgs {
    /// Successes in the first sample.
    #[arg(long)]
    hits1: u64,
    /// Size of the first sample.
    #[arg(long)]
    n1: u64,
    #[arg(long)]
    hits2: u64,
    #[arg(long)]
    n2: u64,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

pub fn ztest(_ctx: &Ctx, a: ZArgs) -> anyhow::Result<()> {
    let t = two_proportion_ztest(a.hits1, a.n1, a.hits2, a.n2, a.alpha)?;
    println!("z\tp_value\tsignificant");
    println!("{:.4}\t{:.6}\t{}", t.z, t.p_value, t.significant);
    Ok(())
}
