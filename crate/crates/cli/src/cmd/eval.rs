use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use tube2vec::evaluation::{
    agreement_table, eval_category, fmt_rate, parse_judgments, parse_triplets, sample_triplets,
    write_triplets, CategoryConfig, ResultTable, Triplet,
};
use tube2vec::Error;

use super::ForestArgs;
use crate::io::{self, Named};
use crate::Ctx;

/// Prints the mean F1 of every category (rows) for every embedding (columns).
#[derive(Debug, clap::Args)]
pub struct CategoryArgs {
    /// Embedding as NAME=PATH, NAME one of soc, con, rec, external; repeatable.
    #[arg(long, value_name = "NAME=PATH", required = true)]
    embedding: Vec<Named>,
    /// Channel categories (`channel_id,category`).
    #[arg(long, value_name = "PATH")]
    categories: PathBuf,
    /// Category to separate from the rest; repeatable.
    #[arg(long, required = true)]
    category: Vec<String>,
    /// Repetitions per category.
    #[arg(long, default_value_t = CategoryConfig::default().reps)]
    reps: usize,
    /// Channels drawn from inside and from outside the category, each.
    #[arg(long, default_value_t = CategoryConfig::default().per_class)]
    per_class: usize,
    /// Share of each sample used for training.
    #[arg(long, default_value_t = CategoryConfig::default().train_fraction)]
    train_fraction: f64,
    /// Shuffle labels before training, for a chance baseline.
    #[arg(long)]
    permute_labels: bool,
    #[command(flatten)]
    forest: ForestArgs,
    /// Also write the table as CSV.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn category(ctx: &Ctx, a: CategoryArgs) -> anyhow::Result<()> {
    let tables = io::load_named(&a.embedding)?;
    let cats = io::read("categories", &a.categories, io::parse_categories)?;
    let names: Vec<String> = tables.iter().map(|t| t.provenance().to_string()).collect();
    let mut header = vec!["category"];
    header.extend(names.iter().map(String::as_str));
    let title = if a.permute_labels {
        "mean F1, permuted labels"
    } else {
        "mean F1"
    };
    let mut out = ResultTable::new(title, &header);
    for target in &a.category {
        let mut row = vec![target.clone()];
        for t in &tables {
            let cfg = CategoryConfig {
                reps: a.reps,
                per_class: a.per_class,
                train_fraction: a.train_fraction,
                permute_labels: a.permute_labels,
                forest: a.forest.config(0),
                seed: ctx.stage_seed(&format!("eval-category/{target}/{}", t.provenance())),
            };
            let report = eval_category(t, &cats, target, &cfg)
                .with_context(|| format!("category `{target}` on {}", t.provenance()))?;
            row.push(fmt_rate(report.mean_f1));
        }
        out.push(row);
    }
    print!("{}", out.to_text());
    if let Some(p) = &a.out {
        io::write_text("category table", p, &out.to_csv())?;
    }
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct SampleArgs {
    /// Embedding as NAME=PATH; repeatable. Triplets are drawn from each.
    #[arg(long, value_name = "NAME=PATH", required = true)]
    embedding: Vec<Named>,
    /// Neighbor ranks for the odd member; comma-separated or repeated.
    #[arg(long, value_delimiter = ',', default_values_t = [110, 220, 440])]
    k: Vec<usize>,
    /// Triplets per embedding and k.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

pub fn sample(ctx: &Ctx, a: SampleArgs) -> anyhow::Result<()> {
    let tables = io::load_named(&a.embedding)?;
    let mut all = Vec::new();
    for t in &tables {
        for &k in &a.k {
            let seed = ctx.stage_seed(&format!("sample-triplets/{}/k{k}", t.provenance()));
            let s = sample_triplets(t, k, a.n, seed)
                .with_context(|| format!("sampling from {} at k = {k}", t.provenance()))?;
            for w in &s.warnings {
                log::warn!("{}: {w}", t.provenance());
            }
            all.extend(s.triplets);
        }
    }
    log::info!("{} triplets", all.len());
    io::write("triplets", &a.out, |w| write_triplets(w, &all))
}

/// Prints agreement rates per minimum number of agreeing raters, for all
/// triplets and for the triplets of each source embedding.
#[derive(Debug, clap::Args)]
pub struct TripletArgs {
    /// Triplets, as written by `sample-triplets`.
    #[arg(long, value_name = "PATH")]
    triplets: PathBuf,
    /// Rater votes (`triplet_id,vote1,..,vote5`).
    #[arg(long, value_name = "PATH")]
    judgments: PathBuf,
    /// Embedding to score as NAME=PATH; repeatable.
    #[arg(long, value_name = "NAME=PATH", required = true)]
    embedding: Vec<Named>,
    /// Minimum raters agreeing on the modal choice; comma-separated or repeated.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4, 5])]
    min_workers: Vec<usize>,
    /// Also write the tables as CSV.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn triplets(_ctx: &Ctx, a: TripletArgs) -> anyhow::Result<()> {
    let tables = io::load_named(&a.embedding)?;
    let triplets: BTreeMap<String, Triplet> = io::read("triplets", &a.triplets, parse_triplets)?
        .into_iter()
        .map(|t| (t.id.clone(), t))
        .collect();
    let judgments = io::read("judgments", &a.judgments, parse_judgments)?;

    // Only triplets every embedding can place are comparable.
    let n_judged = judgments.len();
    let mut judgments: Vec<_> = judgments
        .into_iter()
        .filter(|j| {
            triplets.get(&j.triplet_id).is_none_or(|t| {
                tables
                    .iter()
                    .all(|e| t.members().iter().all(|m| e.contains(m)))
            })
        })
        .collect();
    if judgments.len() < n_judged {
        log::warn!(
            "{} judged triplets have members missing from some embedding and are left out",
            n_judged - judgments.len()
        );
    }
    judgments.sort_by(|x, y| x.triplet_id.cmp(&y.triplet_id));

    let names: Vec<String> = tables.iter().map(|t| t.provenance().to_string()).collect();
    let mut header = vec!["min votes", "n"];
    header.extend(names.iter().map(String::as_str));
    let mut csv_header = vec!["source"];
    csv_header.extend(&header);
    let mut csv = ResultTable::new("", &csv_header);

    let mut sources: Vec<Option<String>> = vec![None];
    let mut seen: Vec<String> = triplets.values().map(|t| t.source.to_string()).collect();
    seen.sort();
    seen.dedup();
    sources.extend(seen.into_iter().map(Some));

    let mut first = true;
    for source in &sources {
        let subset: Vec<_> = judgments
            .iter()
            .filter(|j| {
                source.is_none()
                    || triplets
                        .get(&j.triplet_id)
                        .is_some_and(|t| Some(t.source.to_string()) == *source)
            })
            .cloned()
            .collect();
        if subset.is_empty() {
            continue;
        }
        let label = source.clone().unwrap_or_else(|| "all".into());
        let mut table = ResultTable::new(format!("agreement, {label} triplets"), &header);
        for &w in &a.min_workers {
            let mut row = vec![w.to_string(), String::new()];
            let mut n = 0;
            for t in &tables {
                match agreement_table(&subset, &triplets, t, w) {
                    Ok(ag) => {
                        n = ag.n;
                        row.push(fmt_rate(ag.rate));
                    }
                    Err(Error::Undefined(_)) => row.push("n/a".into()),
                    Err(e) => return Err(e).with_context(|| format!("scoring {}", t.provenance())),
                }
            }
            row[1] = n.to_string();
            let mut csv_row = vec![label.clone()];
            csv_row.extend(row.iter().cloned());
            csv.push(csv_row);
            table.push(row);
        }
        if !first {
            println!();
        }
        first = false;
        print!("{}", table.to_text());
    }
    if let Some(p) = &a.out {
        io::write_text("agreement table", p, &csv.to_csv())?;
    }
    Ok(())
}
