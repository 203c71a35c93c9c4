//! Small helpers shared by the line-oriented file formats.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Shortest decimal string that parses back to exactly `x`.
///
/// This carries at least as many significant digits as the value needs (up to
/// 17), so write -> read -> write is byte-identical.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn parse_real(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("not a number: `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{s}`")));
    }
    Ok(v)
}

pub fn parse_count(s: &str, line: usize) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("not a non-negative integer: `{s}`")))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::from(e).in_file(path))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::from(e).in_file(path))
}

/// Iterate non-blank lines with 1-based line numbers.
pub fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((i + 1, l))),
            Err(e) => Some(Err(Error::from(e))),
        })
}

pub fn write_line<W: Write>(w: &mut W, fields: &[&str], sep: char) -> Result<()> {
    let mut first = true;
    for f in fields {
        if !first {
            write!(w, "{sep}")?;
        }
        first = false;
        w.write_all(f.as_bytes())?;
    }
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats_plain_and_scientific() {
        assert_eq!(fmt_real(0.75), "0.75");
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-3.0), "-3");
        assert_eq!(fmt_real(1.5e-9), "1.5e-9");
    }

    proptest! {
        #[test]
        fn real_formatting_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = fmt_real(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
            prop_assert_eq!(fmt_real(back), s);
        }
    }
}
