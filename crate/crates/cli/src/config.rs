//! `--config` files.
//!
//! A config is TOML whose top-level scalar keys are global flags and whose
//! tables are named after subcommands, each holding that subcommand's flags:
//!
//! ```toml
//! seed = 7
//!
//! [embed-rec]
//! dim = 16
//! walk-length = 20
//! ```
//!
//! Entries are turned into `--key=value` arguments placed ahead of the user's
//! own, and dropped when the user passes the same flag, so the command line
//! always wins. Tables for other subcommands are ignored; unknown keys are
//! rejected by the argument parser like any unknown flag.

use std::ffi::{OsStr, OsString};
use std::path::PathBuf;

use anyhow::{bail, Context};
use toml::{Table, Value};

use crate::SUBCOMMANDS;

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn subcommand_index(argv: &[OsString]) -> Option<usize> {
    argv.iter()
        .position(|a| SUBCOMMANDS.iter().any(|s| OsStr::new(s) == a))
}

fn given(argv: &[OsString], flag: &str) -> bool {
    let eq = format!("{flag}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&eq)
    })
}

fn scalar(key: &str, v: &Value) -> anyhow::Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Datetime(d) => d.to_string(),
        Value::Boolean(_) | Value::Array(_) | Value::Table(_) => {
            bail!("`{key}`: expected a string or a number")
        }
    })
}

/// `--key=value` arguments for one table of entries.
fn flags(table: &Table, section: &str) -> anyhow::Result<Vec<(String, Vec<String>)>> {
    let mut out = Vec::new();
    for (key, v) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        let ctx = || format!("[{section}] {key}");
        let args = match v {
            Value::Boolean(true) => vec![flag.clone()],
            Value::Boolean(false) => vec![],
            Value::Array(items) => items
                .iter()
                .map(|x| Ok(format!("{flag}={}", scalar(key, x)?)))
                .collect::<anyhow::Result<_>>()
                .with_context(ctx)?,
            Value::Table(_) => bail!("{}: nested tables are not allowed", ctx()),
            x => vec![format!("{flag}={}", scalar(key, x).with_context(ctx)?)],
        };
        out.push((flag, args));
    }
    Ok(out)
}

/// `argv` with the config entries spliced in, or `argv` itself when no
/// config is given.
pub fn merge(argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let doc: Table = text
        .parse()
        .with_context(|| format!("config {}", path.display()))?;
    let sub = subcommand_index(&argv);

    let mut globals = Table::new();
    let mut section = None;
    for (key, v) in &doc {
        match v {
            Value::Table(t) => {
                if !SUBCOMMANDS.contains(&key.as_str()) {
                    bail!(
                        "config {}: unknown section [{key}]; sections are named after subcommands",
                        path.display()
                    );
                }
                if sub.is_some_and(|i| argv[i] == OsStr::new(key)) {
                    section = Some((key.as_str(), t));
                }
            }
            _ => {
                globals.insert(key.clone(), v.clone());
            }
        }
    }

    let ctx = || format!("config {}", path.display());
    let mut out: Vec<OsString> = argv[..1].to_vec();
    for (flag, args) in flags(&globals, "top level").with_context(ctx)? {
        if !given(&argv, &flag) {
            out.extend(args.into_iter().map(OsString::from));
        }
    }
    match (sub, section) {
        (Some(i), Some((name, table))) => {
            out.extend(argv[1..=i].iter().cloned());
            for (flag, args) in flags(table, name).with_context(ctx)? {
                if !given(&argv[i + 1..], &flag) {
                    out.extend(args.into_iter().map(OsString::from));
                }
            }
            out.extend(argv[i + 1..].iter().cloned());
        }
        _ => out.extend(argv[1..].iter().cloned()),
    }
    Ok(out)
}
