//! Text serialization of a fitted forest.
//!
//! ```text
//! forest classifier          (or: forest regressor)
//! features 3
//! classes 0 1                (classifiers only)
//! oob 0.93                   (or: oob none)
//! trees 100
//! tree 3
//! split 0 0.5 1 2
//! leaf 1 0
//! leaf 0 1
//! tree ...
//! ```
//! Node lines follow their tree header in index order. Reals use the
//! shortest representation that reads back exactly.

use std::io::{BufRead, Write};
use std::path::Path;

use super::{Forest, ForestKind, Node, Tree};
use crate::error::{Error, Result};
use crate::text::{self, fmt_real, parse_count, parse_real};

impl Forest {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        match &self.kind {
            ForestKind::Classifier { classes } => {
                writeln!(w, "forest classifier")?;
                writeln!(w, "features {}", self.n_features)?;
                let c: Vec<String> = classes.iter().map(usize::to_string).collect();
                writeln!(w, "classes {}", c.join(" "))?;
            }
            ForestKind::Regressor => {
                writeln!(w, "forest regressor")?;
                writeln!(w, "features {}", self.n_features)?;
            }
        }
        match self.oob {
            Some(v) => writeln!(w, "oob {}", fmt_real(v))?,
            None => writeln!(w, "oob none")?,
        }
        writeln!(w, "trees {}", self.trees.len())?;
        for t in &self.trees {
            writeln!(w, "tree {}", t.nodes.len())?;
            for node in &t.nodes {
                match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => writeln!(w, "split {feature} {} {left} {right}", fmt_real(*threshold))?,
                    Node::Leaf(v) => {
                        let vals: Vec<String> = v.iter().map(|x| fmt_real(*x)).collect();
                        writeln!(w, "leaf {}", vals.join(" "))?
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Forest> {
        let mut lines = text::content_lines(r);
        let mut next = |what: &str| -> Result<(usize, Vec<String>)> {
            match lines.next() {
                Some(l) => {
                    let (n, l) = l?;
                    Ok((n, l.split_whitespace().map(str::to_string).collect()))
                }
                None => Err(Error::invalid(format!("forest file ends before {what}"))),
            }
        };
        fn keyed<'a>(line: &'a (usize, Vec<String>), key: &str) -> Result<&'a [String]> {
            match line.1.split_first() {
                Some((k, rest)) if k == key => Ok(rest),
                _ => Err(Error::parse(line.0, format!("expected `{key}`"))),
            }
        }
        fn single(line: &(usize, Vec<String>), key: &str) -> Result<u64> {
            match keyed(line, key)? {
                [v] => parse_count(v, line.0),
                _ => Err(Error::parse(line.0, format!("`{key}` takes one value"))),
            }
        }

        let head = next("the header")?;
        let kind_word = keyed(&head, "forest")?.first().cloned().unwrap_or_default();
        let n_features = single(&next("the feature count")?, "features")? as usize;
        let kind = match kind_word.as_str() {
            "classifier" => {
                let l = next("the class list")?;
                let classes = keyed(&l, "classes")?
                    .iter()
                    .map(|c| parse_count(c, l.0).map(|v| v as usize))
                    .collect::<Result<Vec<_>>>()?;
                if classes.len() < 2 || classes.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::parse(
                        l.0,
                        "classes must be at least two ascending labels",
                    ));
                }
                ForestKind::Classifier { classes }
            }
            "regressor" => ForestKind::Regressor,
            other => {
                return Err(Error::parse(
                    head.0,
                    format!("unknown forest kind `{other}`"),
                ))
            }
        };
        let leaf_len = match &kind {
            ForestKind::Classifier { classes } => classes.len(),
            ForestKind::Regressor => 1,
        };
        let l = next("the out-of-bag score")?;
        let oob = match keyed(&l, "oob")? {
            [v] if v == "none" => None,
            [v] => Some(parse_real(v, l.0)?),
            _ => return Err(Error::parse(l.0, "`oob` takes one value")),
        };
        let n_trees = single(&next("the tree count")?, "trees")? as usize;
        if n_trees == 0 {
            return Err(Error::invalid("forest has no trees"));
        }

        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            let h = next("a tree header")?;
            let n_nodes = single(&h, "tree")? as usize;
            if n_nodes == 0 {
                return Err(Error::parse(h.0, "empty tree"));
            }
            let mut nodes = Vec::with_capacity(n_nodes);
            for i in 0..n_nodes {
                let l = next("a tree node")?;
                let node = match l.1.split_first() {
                    Some((k, rest)) if k == "split" => match rest {
                        [f, t, a, b] => {
                            let feature = parse_count(f, l.0)? as usize;
                            let left = parse_count(a, l.0)? as usize;
                            let right = parse_count(b, l.0)? as usize;
                            if feature >= n_features
                                || left <= i
                                || right <= i
                                || left >= n_nodes
                                || right >= n_nodes
                            {
                                return Err(Error::parse(l.0, "split refers outside the tree"));
                            }
                            Node::Split {
                                feature,
                                threshold: parse_real(t, l.0)?,
                                left,
                                right,
                            }
                        }
                        _ => return Err(Error::parse(l.0, "split takes four values")),
                    },
                    Some((k, rest)) if k == "leaf" => {
                        if rest.len() != leaf_len {
                            return Err(Error::parse(
                                l.0,
                                format!("leaf needs {leaf_len} values, found {}", rest.len()),
                            ));
                        }
                        Node::Leaf(
                            rest.iter()
                                .map(|v| parse_real(v, l.0))
                                .collect::<Result<Vec<_>>>()?,
                        )
                    }
                    _ => return Err(Error::parse(l.0, "expected `split` or `leaf`")),
                };
                nodes.push(node);
            }
            trees.push(Tree { nodes });
        }
        if let Some(l) = lines.next() {
            let (n, _) = l?;
            return Err(Error::parse(n, "trailing content after the last tree"));
        }
        Ok(Forest {
            kind,
            n_features,
            trees,
            oob,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = text::create(path)?;
        self.write_to(&mut w).map_err(|e| e.in_file(path))?;
        w.flush().map_err(|e| Error::from(e).in_file(path))
    }

    pub fn load(path: &Path) -> Result<Forest> {
        Forest::read_from(text::open(path)?).map_err(|e| e.in_file(path))
    }
}
