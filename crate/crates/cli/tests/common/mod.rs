//! Runs the bundled mini dataset through every subcommand of the binary.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// The built binary. Unit tests of the binary crate do not get
/// `CARGO_BIN_EXE_*`, so they look next to their own executable instead.
pub fn bin() -> PathBuf {
    match option_env!("CARGO_BIN_EXE_tube2vec") {
        Some(p) => PathBuf::from(p),
        None => {
            let exe = std::env::current_exe().expect("test executable path");
            let dir = exe
                .parent()
                .and_then(Path::parent)
                .expect("target directory");
            dir.join(format!("tube2vec{}", std::env::consts::EXE_SUFFIX))
        }
    }
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("TUBE2VEC_LOG")
        .output()
        .expect("binary runs")
}

/// Every subcommand in pipeline order. Returns each step's standard output
/// keyed by step name.
pub fn pipeline(out: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let data = data_dir();
    let d = |f: &str| data.join(f).to_string_lossy().into_owned();
    let o = |f: &str| out.join(f).to_string_lossy().into_owned();
    let emb = |name: &str| format!("{name}={}", o(&format!("{name}.emb")));
    let config = d("config.toml");
    let steps: Vec<(&str, Vec<String>)> = vec![
        (
            "ingest",
            vec![
                "ingest".into(),
                "--tuples".into(),
                d("tuples.tsv"),
                "--channels".into(),
                d("channels.jsonl"),
                "--video-map".into(),
                d("video_map.tsv"),
                "--out".into(),
                o("ingest"),
            ],
        ),
        (
            "embed-soc",
            vec![
                "embed-soc".into(),
                "--matrix".into(),
                o("ingest/sharing.mtx"),
                "--subreddits".into(),
                d("subreddits.emb"),
                "--out".into(),
                o("soc.emb"),
            ],
        ),
        (
            "embed-con",
            vec![
                "embed-con".into(),
                "--vectors".into(),
                d("video_vectors.txt"),
                "--videos".into(),
                o("ingest/videos.tsv"),
                "--out".into(),
                o("con.emb"),
            ],
        ),
        (
            "embed-rec",
            vec![
                "embed-rec".into(),
                "--crawl".into(),
                d("crawl.tsv"),
                "--retained".into(),
                o("ingest/retained.txt"),
                "--out".into(),
                o("rec.emb"),
                "--walks-out".into(),
                o("walks.txt"),
            ],
        ),
        (
            "dims",
            vec![
                "dims".into(),
                "--subreddits".into(),
                d("subreddits.emb"),
                "--embedding".into(),
                o("soc.emb"),
                "--seeds".into(),
                d("dimension_seeds.csv"),
                "--out-dir".into(),
                o("dims"),
            ],
        ),
        (
            "transfer-con",
            vec![
                "transfer".into(),
                "--target".into(),
                o("con.emb"),
                "--provenance".into(),
                "con".into(),
                "--scores".into(),
                o("dims/partisan.scores"),
                "--out".into(),
                o("dims/partisan.con.scores"),
            ],
        ),
        (
            "transfer-rec",
            vec![
                "transfer".into(),
                "--target".into(),
                o("rec.emb"),
                "--provenance".into(),
                "rec".into(),
                "--scores".into(),
                o("dims/partisan.scores"),
                "--out".into(),
                o("dims/partisan.rec.scores"),
            ],
        ),
        (
            "sample-bins",
            vec![
                "sample-bins".into(),
                "--scores".into(),
                o("dims/partisan.scores"),
                "--ness".into(),
                o("dims/partisan-ness.scores"),
                "--out".into(),
                o("bins.csv"),
            ],
        ),
        (
            "pl-fit",
            vec![
                "pl-fit".into(),
                "--comparisons".into(),
                d("comparisons.csv"),
                "--out-dir".into(),
                o("pl"),
            ],
        ),
        (
            "eval-category",
            vec![
                "eval-category".into(),
                "--embedding".into(),
                emb("soc"),
                "--embedding".into(),
                emb("con"),
                "--embedding".into(),
                emb("rec"),
                "--categories".into(),
                o("ingest/categories.csv"),
                "--category".into(),
                "Gaming".into(),
                "--out".into(),
                o("category.csv"),
            ],
        ),
        (
            "sample-triplets",
            vec![
                "sample-triplets".into(),
                "--embedding".into(),
                emb("soc"),
                "--embedding".into(),
                emb("con"),
                "--embedding".into(),
                emb("rec"),
                "--out".into(),
                o("triplets.csv"),
            ],
        ),
        (
            "eval-triplets",
            vec![
                "eval-triplets".into(),
                "--triplets".into(),
                d("triplets.csv"),
                "--judgments".into(),
                d("judgments.csv"),
                "--embedding".into(),
                emb("soc"),
                "--embedding".into(),
                emb("con"),
                "--embedding".into(),
                emb("rec"),
                "--out".into(),
                o("agreement.csv"),
            ],
        ),
        (
            "eval-rank-labels",
            vec![
                "eval-rank".into(),
                "--scores".into(),
                format!("soc={}", o("dims/partisan.scores")),
                "--scores".into(),
                format!("con={}", o("dims/partisan.con.scores")),
                "--scores".into(),
                format!("rec={}", o("dims/partisan.rec.scores")),
                "--labels".into(),
                d("labels.csv"),
                "--out".into(),
                o("rank.csv"),
            ],
        ),
        (
            "eval-rank-pl",
            vec![
                "eval-rank".into(),
                "--scores".into(),
                format!("soc={}", o("dims/partisan.scores")),
                "--reference".into(),
                o("pl/partisan.pl"),
            ],
        ),
        (
            "ztest",
            vec![
                "ztest".into(),
                "--hits1".into(),
                "90".into(),
                "--n1".into(),
                "100".into(),
                "--hits2".into(),
                "50".into(),
                "--n2".into(),
                "100".into(),
            ],
        ),
    ];

    let mut stdout = BTreeMap::new();
    for (name, args) in steps {
        let mut full: Vec<&str> = vec!["--config", &config, "--quiet"];
        full.extend(args.iter().map(String::as_str));
        let r = run(&full);
        if !r.status.success() {
            return Err(format!(
                "{name} failed with {}: {}",
                r.status,
                String::from_utf8_lossy(&r.stderr)
            ));
        }
        stdout.insert(name.to_string(), r.stdout);
    }
    Ok(stdout)
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}
