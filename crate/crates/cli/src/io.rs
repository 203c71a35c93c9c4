//! Reading and writing files on behalf of the subcommands, with error
//! messages that name the file and its role.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use tube2vec::dimensions::DimensionScores;
use tube2vec::{text, EmbeddingTable, Provenance};

/// Parse the file at `path` with `parse`.
pub fn read<T>(
    role: &str,
    path: &Path,
    parse: impl FnOnce(BufReader<File>) -> tube2vec::Result<T>,
) -> anyhow::Result<T> {
    text::open(path)
        .and_then(|r| parse(r).map_err(|e| e.in_file(path)))
        .with_context(|| format!("reading {role}"))
}

/// Create `path` (and its parent directory) and fill it with `write`.
pub fn write(
    role: &str,
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> tube2vec::Result<()>,
) -> anyhow::Result<()> {
    let go = || -> tube2vec::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = text::create(path)?;
        write(&mut w)?;
        w.flush()?;
        Ok(())
    };
    go().map_err(|e| e.in_file(path))
        .with_context(|| format!("writing {role}"))?;
    log::info!("wrote {role} to {}", path.display());
    Ok(())
}

pub fn write_text(role: &str, path: &Path, s: &str) -> anyhow::Result<()> {
    write(role, path, |w| Ok(w.write_all(s.as_bytes())?))
}

pub fn load_embedding(path: &Path, provenance: Provenance) -> anyhow::Result<EmbeddingTable> {
    EmbeddingTable::load(path, provenance)
        .with_context(|| format!("reading {provenance} embedding"))
}

pub fn load_scores(path: &Path) -> anyhow::Result<DimensionScores> {
    read("dimension scores", path, DimensionScores::read_from)
}

pub fn save_scores(path: &Path, s: &DimensionScores) -> anyhow::Result<()> {
    write("dimension scores", path, |w| s.write_to(w))
}

/// `NAME=PATH` on the command line, NAME being an embedding provenance.
#[derive(Clone, Debug)]
pub struct Named {
    pub provenance: Provenance,
    pub path: PathBuf,
}

impl FromStr for Named {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, path) = s
            .split_once('=')
            .ok_or_else(|| format!("expected NAME=PATH, got `{s}`"))?;
        let provenance = name.parse().map_err(|e| format!("{e}"))?;
        if path.is_empty() {
            return Err("empty path".into());
        }
        Ok(Named {
            provenance,
            path: path.into(),
        })
    }
}

/// Load every named embedding, refusing two with the same name.
pub fn load_named(list: &[Named]) -> anyhow::Result<Vec<EmbeddingTable>> {
    let mut seen = HashSet::new();
    list.iter()
        .map(|n| {
            if !seen.insert(n.provenance) {
                bail!("embedding `{}` given twice", n.provenance);
            }
            load_embedding(&n.path, n.provenance)
        })
        .collect()
}

/// `channel_id<TAB>video_id video_id ...`: the videos listed for each channel.
pub fn write_channel_index<W: Write>(
    w: &mut W,
    index: &BTreeMap<String, Vec<String>>,
) -> tube2vec::Result<()> {
    for (c, videos) in index {
        writeln!(w, "{c}\t{}", videos.join(" "))?;
    }
    Ok(())
}

pub fn parse_channel_index<R: BufRead>(r: R) -> tube2vec::Result<BTreeMap<String, Vec<String>>> {
    let mut out = BTreeMap::new();
    for line in text::content_lines(r) {
        let (n, line) = line?;
        let (c, videos) = line.split_once('\t').unwrap_or((line.as_str(), ""));
        let c = c.trim();
        if c.is_empty() {
            return Err(parse_error(n, "empty channel id"));
        }
        let videos = videos.split_whitespace().map(str::to_owned).collect();
        if out.insert(c.to_owned(), videos).is_some() {
            return Err(parse_error(n, &format!("channel `{c}` listed twice")));
        }
    }
    Ok(out)
}

/// `channel_id,category`, with a header line.
pub fn write_categories<W: Write>(
    w: &mut W,
    cats: &BTreeMap<String, String>,
) -> tube2vec::Result<()> {
    writeln!(w, "channel_id,category")?;
    for (c, cat) in cats {
        writeln!(w, "{c},{cat}")?;
    }
    Ok(())
}

pub fn parse_categories<R: BufRead>(r: R) -> tube2vec::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in text::content_lines(r) {
        let (n, line) = line?;
        let Some((id, cat)) = line.split_once(',') else {
            return Err(parse_error(n, "expected `channel_id,category`"));
        };
        let (id, cat) = (id.trim(), cat.trim());
        if n == 1 && id == "channel_id" {
            continue;
        }
        if id.is_empty() || cat.is_empty() {
            return Err(parse_error(n, "empty field"));
        }
        if out.insert(id.to_owned(), cat.to_owned()).is_some() {
            return Err(parse_error(n, &format!("channel `{id}` listed twice")));
        }
    }
    Ok(out)
}

/// One id per line.
pub fn parse_id_list<R: BufRead>(r: R) -> tube2vec::Result<BTreeSet<String>> {
    text::content_lines(r)
        .map(|l| l.map(|(_, s)| s.trim().to_owned()))
        .collect()
}

fn parse_error(line: usize, message: &str) -> tube2vec::Error {
    tube2vec::Error::Parse {
        line,
        message: message.to_owned(),
    }
}

/// File-name-safe form of a dimension name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
