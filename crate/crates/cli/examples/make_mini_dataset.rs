//! Writes the small synthetic dataset under `data/mini/` (or the directory
//! given as the first argument).
//!
//! Channels belong to one of four topics and carry a latent partisan lean and
//! audience age. Every file is drawn from that ground truth: subreddit
//! vectors, sharing tuples, channel records, recommendation crawls, per-video
//! text vectors, crowd comparisons, ordinal labels and odd-one-out votes.
//!
//! ```text
//! cargo run -p tube2vec-cli --example make_mini_dataset
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use tube2vec::ingest::{ChannelRecord, VideoRecord, COLLECTION_START};
use tube2vec::ranking::PARTISAN_LABELS;
use tube2vec::seed::{rng_from, StageRng};

const SEED: u64 = 20_221_006;
const TOPICS: [(&str, &str, usize); 4] = [
    ("gaming", "Gaming", 120),
    ("music", "Music", 70),
    ("news", "News & Politics", 70),
    ("learn", "Education", 40),
];
/// Subreddit vector layout: one axis per topic, then lean, then age.
const S_DIM: usize = 6;
const LEAN_AXIS: usize = 4;
const AGE_AXIS: usize = 5;
const TEXT_DIM: usize = 12;
const VIDEOS_PER_CHANNEL: usize = 3;
/// Records that the channel filters must drop: low subscriber counts and
/// another language.
const FILTERED: usize = 10;
const SPAM_VIDEOS: usize = 30;

struct Channel {
    id: String,
    topic: usize,
    lean: f64,
    age: f64,
}

struct Subreddit {
    name: String,
    vector: Vec<f64>,
    topic: Option<usize>,
    lean: f64,
    age: f64,
}

fn video_id(c: &Channel, j: usize) -> String {
    format!("{}v{j}", c.id)
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let p = dir.join(name);
    Ok(BufWriter::new(
        File::create(&p).with_context(|| format!("creating {}", p.display()))?,
    ))
}

fn subreddits(rng: &mut StageRng) -> Vec<Subreddit> {
    let noise = Normal::new(0.0, 0.1).unwrap();
    let mut out = Vec::new();
    let mut push = |name: String, topic: Option<usize>, lean: f64, age: f64, rng: &mut StageRng| {
        let mut v: Vec<f64> = (0..S_DIM).map(|_| noise.sample(rng)).collect();
        if let Some(t) = topic {
            v[t] += 1.0;
        }
        v[LEAN_AXIS] += lean;
        v[AGE_AXIS] += age;
        out.push(Subreddit {
            name,
            vector: v,
            topic,
            lean,
            age,
        });
    };
    for (t, (name, _, _)) in TOPICS.iter().enumerate() {
        for k in 1..=6 {
            push(format!("{name}_{k:02}"), Some(t), 0.0, 0.0, rng);
        }
    }
    for k in 1..=4 {
        let l = 0.5 + 0.33 * (k - 1) as f64;
        push(format!("left_{k:02}"), None, -l, 0.0, rng);
        push(format!("right_{k:02}"), None, l, 0.0, rng);
    }
    push("center_01".into(), None, 0.0, 0.0, rng);
    for k in 1..=3 {
        let a = 0.6 + 0.4 * (k - 1) as f64;
        push(format!("young_{k:02}"), None, 0.0, -a, rng);
        push(format!("old_{k:02}"), None, 0.0, a, rng);
    }
    out
}

fn channels(rng: &mut StageRng) -> Vec<Channel> {
    let std = Normal::new(0.0, 1.0).unwrap();
    let mut out = Vec::new();
    for (t, (name, _, n)) in TOPICS.iter().enumerate() {
        for i in 0..*n {
            out.push(Channel {
                id: format!("UC{name}{i:03}"),
                topic: t,
                lean: std.sample(rng),
                age: std.sample(rng),
            });
        }
    }
    out
}

/// Draw a subreddit with weight `exp(-(x - key)^2 / 0.5)` among `pool`.
fn nearest<'a>(
    pool: &[&'a Subreddit],
    key: f64,
    f: impl Fn(&Subreddit) -> f64,
    rng: &mut StageRng,
) -> &'a Subreddit {
    pool.choose_weighted(rng, |s| (-(f(s) - key).powi(2) / 0.5).exp())
        .unwrap()
}

fn timestamp(rng: &mut StageRng) -> i64 {
    COLLECTION_START + rng.random_range(0..300_000_000)
}

fn write_subreddits(dir: &Path, subs: &[Subreddit]) -> anyhow::Result<()> {
    let mut w = create(dir, "subreddits.emb")?;
    writeln!(w, "{} {S_DIM}", subs.len())?;
    let mut sorted: Vec<&Subreddit> = subs.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    for s in sorted {
        write!(w, "{}", s.name)?;
        for x in &s.vector {
            write!(w, " {x:.4}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn write_tuples(
    dir: &Path,
    chans: &[Channel],
    subs: &[Subreddit],
    rng: &mut StageRng,
) -> anyhow::Result<()> {
    let mut w = create(dir, "tuples.tsv")?;
    let political: Vec<&Subreddit> = subs
        .iter()
        .filter(|s| s.topic.is_none() && s.age == 0.0)
        .collect();
    let ages: Vec<&Subreddit> = subs
        .iter()
        .filter(|s| s.topic.is_none() && s.lean == 0.0 && s.age != 0.0)
        .collect();
    let source = |rng: &mut StageRng| {
        if rng.random_bool(0.3) {
            "post"
        } else {
            "comment"
        }
    };
    for c in chans {
        let topical: Vec<&Subreddit> = subs.iter().filter(|s| s.topic == Some(c.topic)).collect();
        let (p_topic, p_lean) = if TOPICS[c.topic].0 == "news" {
            (0.35, 0.45)
        } else {
            (0.6, 0.2)
        };
        for _ in 0..rng.random_range(7..12) {
            let u: f64 = rng.random();
            let s = if u < p_topic {
                *topical.choose(rng).unwrap()
            } else if u < p_topic + p_lean {
                nearest(&political, c.lean, |s| s.lean, rng)
            } else {
                nearest(&ages, c.age, |s| s.age, rng)
            };
            let video = video_id(c, rng.random_range(0..VIDEOS_PER_CHANNEL));
            let author = format!("u{:04}", rng.random_range(0..500));
            writeln!(
                w,
                "{}\t{video}\t{author}\t{}\t{}",
                s.name,
                source(rng),
                timestamp(rng)
            )?;
        }
    }
    // One author linking more videos than the spam threshold allows.
    for i in 0..SPAM_VIDEOS {
        let c = &chans[i * 7 % chans.len()];
        let video = video_id(c, i % VIDEOS_PER_CHANNEL);
        writeln!(w, "promo_hub\t{video}\tspambot\tpost\t{}", timestamp(rng))?;
    }
    // Videos nobody can map to a channel.
    for i in 0..5 {
        writeln!(
            w,
            "gaming_01\tgone{i:02}\tu0001\tcomment\t{}",
            timestamp(rng)
        )?;
    }
    // Malformed lines: a bad source and a timestamp outside the window.
    writeln!(
        w,
        "gaming_02\tUCgaming000v0\tu0002\tvote\t{}",
        timestamp(rng)
    )?;
    writeln!(w, "gaming_02\tUCgaming000v0\tu0002\tpost\t100")?;
    Ok(())
}

fn record(
    id: &str,
    category: &str,
    subscribers: u64,
    language: &str,
    rng: &mut StageRng,
) -> ChannelRecord {
    let videos: Vec<VideoRecord> = (0..VIDEOS_PER_CHANNEL)
        .map(|j| VideoRecord {
            video_id: format!("{id}v{j}"),
            title: format!("{category} video {j}"),
            description: String::new(),
            category: category.to_string(),
            views: rng.random_range(1_000..1_000_000),
            caption_language: None,
        })
        .collect();
    ChannelRecord {
        channel_id: id.to_string(),
        name: id.to_string(),
        description: String::new(),
        subscribers: Some(subscribers),
        views: videos.iter().map(|v| v.views).sum(),
        created_at: COLLECTION_START,
        category_votes: ChannelRecord::tally_votes(&videos),
        language: language.to_string(),
        videos,
    }
}

fn write_channels(dir: &Path, chans: &[Channel], rng: &mut StageRng) -> anyhow::Result<()> {
    let mut w = create(dir, "channels.jsonl")?;
    let mut map = create(dir, "video_map.tsv")?;
    let mut emit = |r: ChannelRecord, w: &mut BufWriter<File>| -> anyhow::Result<()> {
        for v in &r.videos {
            writeln!(map, "{}\t{}", v.video_id, r.channel_id)?;
        }
        writeln!(w, "{}", serde_json::to_string(&r)?)?;
        Ok(())
    };
    for c in chans {
        let subs = rng.random_range(150_000..5_000_000);
        let mut r = record(&c.id, TOPICS[c.topic].1, subs, "en", rng);
        // One off-topic upload; the majority vote still finds the topic.
        if rng.random_bool(0.3) {
            r.videos[2].category = "People & Blogs".into();
            r.category_votes = ChannelRecord::tally_votes(&r.videos);
        }
        emit(r, &mut w)?;
    }
    for i in 0..FILTERED {
        emit(
            record(&format!("UCsmall{i:03}"), "Gaming", 40_000, "en", rng),
            &mut w,
        )?;
        emit(
            record(&format!("UCforeign{i:03}"), "Music", 900_000, "de", rng),
            &mut w,
        )?;
    }
    Ok(())
}

fn write_crawl(dir: &Path, chans: &[Channel], rng: &mut StageRng) -> anyhow::Result<()> {
    let mut w = create(dir, "crawl.tsv")?;
    let mut by_topic: Vec<Vec<&Channel>> = vec![Vec::new(); TOPICS.len()];
    for c in chans {
        by_topic[c.topic].push(c);
    }
    for c in chans {
        for j in 0..2 {
            let recs: Vec<String> = (0..6)
                .map(|_| {
                    let d = if rng.random_bool(0.85) {
                        // Within a topic, channels of similar lean are favored.
                        *by_topic[c.topic]
                            .choose_weighted(rng, |d| (-(d.lean - c.lean).powi(2)).exp())
                            .unwrap()
                    } else {
                        chans.choose(rng).unwrap()
                    };
                    let v = video_id(d, rng.random_range(0..VIDEOS_PER_CHANNEL));
                    format!("{v}:{}", d.id)
                })
                .collect();
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                video_id(c, j),
                c.id,
                1_650_000_000 + rng.random_range(0..1_000_000),
                recs.join(" ")
            )?;
        }
    }
    // A recommendation of a channel that does not pass the filters.
    writeln!(
        w,
        "UCgaming000v0\tUCgaming000\t1650000000\tUCsmall000v0:UCsmall000"
    )?;
    Ok(())
}

fn write_vectors(dir: &Path, chans: &[Channel], rng: &mut StageRng) -> anyhow::Result<()> {
    let std = Normal::new(0.0, 1.0).unwrap();
    let centroids: Vec<Vec<f64>> = (0..TOPICS.len())
        .map(|_| (0..TEXT_DIM).map(|_| 1.5 * std.sample(rng)).collect())
        .collect();
    let lean_dir: Vec<f64> = (0..TEXT_DIM).map(|_| 0.5 * std.sample(rng)).collect();
    let mut w = create(dir, "video_vectors.txt")?;
    for c in chans {
        for j in 0..VIDEOS_PER_CHANNEL {
            // The last video of every tenth channel was never vectorized.
            if j == VIDEOS_PER_CHANNEL - 1 && c.id.ends_with('0') {
                continue;
            }
            for field in ["title", "description"] {
                write!(w, "{} {field}", video_id(c, j))?;
                for k in 0..TEXT_DIM {
                    let x = centroids[c.topic][k] + c.lean * lean_dir[k] + std.sample(rng);
                    write!(w, " {x:.4}")?;
                }
                writeln!(w)?;
            }
        }
    }
    Ok(())
}

fn write_seeds(dir: &Path) -> anyhow::Result<()> {
    let mut w = create(dir, "dimension_seeds.csv")?;
    writeln!(w, "# dimension,low,high")?;
    for k in 1..=4 {
        writeln!(w, "partisan,left_{k:02},right_{k:02}")?;
    }
    for k in 1..=3 {
        writeln!(w, "age,young_{k:02},old_{k:02}")?;
    }
    Ok(())
}

fn write_comparisons(dir: &Path, chans: &[Channel], rng: &mut StageRng) -> anyhow::Result<()> {
    let items: Vec<&Channel> = chans
        .iter()
        .filter(|c| TOPICS[c.topic].0 == "news")
        .collect();
    let mut w = create(dir, "comparisons.csv")?;
    writeln!(w, "dimension,winner,loser,rater_id")?;
    for n in 0..800 {
        let pair: Vec<&&Channel> = items.choose_multiple(rng, 2).collect();
        let (a, b) = (pair[0], pair[1]);
        // "More to the right" wins with Bradley-Terry odds.
        let p = 1.0 / (1.0 + (-1.5 * (a.lean - b.lean)).exp());
        let (win, lose) = if rng.random_bool(p) { (a, b) } else { (b, a) };
        writeln!(w, "partisan,{},{},r{:02}", win.id, lose.id, n % 25)?;
    }
    Ok(())
}

fn write_labels(dir: &Path, chans: &[Channel], rng: &mut StageRng) -> anyhow::Result<()> {
    const CUTS: [f64; 6] = [-1.5, -0.9, -0.3, 0.3, 0.9, 1.5];
    let mut labelled: Vec<&Channel> = chans
        .iter()
        .filter(|c| TOPICS[c.topic].0 == "news")
        .collect();
    labelled.extend(
        chans
            .iter()
            .filter(|c| TOPICS[c.topic].0 != "news")
            .take(20),
    );
    labelled.sort_by(|a, b| a.id.cmp(&b.id));
    let noise = Normal::new(0.0, 0.3).unwrap();
    let mut w = create(dir, "labels.csv")?;
    writeln!(w, "channel_id,label")?;
    for c in labelled {
        let x = c.lean + noise.sample(rng);
        let rank = CUTS.iter().filter(|&&e| x > e).count();
        writeln!(w, "{},{}", c.id, PARTISAN_LABELS[rank])?;
    }
    Ok(())
}

fn write_triplets(dir: &Path, chans: &[Channel], rng: &mut StageRng) -> anyhow::Result<()> {
    let mut t = create(dir, "triplets.csv")?;
    let mut j = create(dir, "judgments.csv")?;
    writeln!(t, "triplet_id,a,b,c,source,k")?;
    writeln!(j, "triplet_id,vote1,vote2,vote3,vote4,vote5")?;
    let sources = ["soc", "con", "rec"];
    let ks = [110, 220];
    let mut serial: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for n in 0..120 {
        let (si, ki) = (n % 3, (n / 3) % 2);
        let a = chans.choose(rng).unwrap();
        let same: Vec<&Channel> = chans
            .iter()
            .filter(|x| x.topic == a.topic && x.id != a.id)
            .collect();
        let b = same
            .choose_weighted(rng, |x| (-(x.lean - a.lean).powi(2)).exp())
            .unwrap();
        let other: Vec<&Channel> = chans.iter().filter(|x| x.topic != a.topic).collect();
        let c = other.choose(rng).unwrap();
        let s = serial.entry((si, ki)).or_insert(0);
        let id = format!("{}-k{}-{:05}", sources[si], ks[ki], *s);
        *s += 1;
        writeln!(
            t,
            "{id},{},{},{},{},{}",
            a.id, b.id, c.id, sources[si], ks[ki]
        )?;
        let members = [&a.id, &b.id, &c.id];
        let votes: Vec<&String> = (0..5)
            .map(|_| {
                if rng.random_bool(0.75) {
                    &c.id
                } else {
                    *members.choose(rng).unwrap()
                }
            })
            .collect();
        let votes: Vec<&str> = votes.iter().map(|s| s.as_str()).collect();
        writeln!(j, "{id},{}", votes.join(","))?;
    }
    Ok(())
}

const CONFIG: &str = "\
# Settings for running every subcommand on this dataset in seconds.
seed = 42

[ingest]
max-videos-per-author = 25

[embed-rec]
dim = 16
walk-length = 20
walks-per-node = 5
window = 5
epochs = 3

[transfer]
trees = 50

[eval-category]
reps = 10
per-class = 100
trees = 50

[sample-triplets]
k = [110, 220]
n = 40

[eval-rank]
bootstrap = 200
";

fn main() -> anyhow::Result<()> {
    let dir: PathBuf = std::env::args_os()
        .nth(1)
        .map_or_else(|| PathBuf::from("data/mini"), PathBuf::from);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut rng = rng_from(SEED);
    let subs = subreddits(&mut rng);
    let chans = channels(&mut rng);
    write_subreddits(&dir, &subs)?;
    write_tuples(&dir, &chans, &subs, &mut rng)?;
    write_channels(&dir, &chans, &mut rng)?;
    write_crawl(&dir, &chans, &mut rng)?;
    write_vectors(&dir, &chans, &mut rng)?;
    write_seeds(&dir)?;
    write_comparisons(&dir, &chans, &mut rng)?;
    write_labels(&dir, &chans, &mut rng)?;
    write_triplets(&dir, &chans, &mut rng)?;
    fs::write(dir.join("config.toml"), CONFIG)?;
    println!("wrote {}", dir.display());
    Ok(())
}
