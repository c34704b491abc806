//! Text formats.
//!
//! Graph: line 1 `n m b`, then `m` lines `u v`, then one line with the `b` boundary ids
//! (empty when `b = 0`). Forest: line 1 the SHA-256 hex digest of the host graph's text
//! form, then one edge id per line in ascending order.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::graph::Graph;

pub fn write_graph(g: &Graph) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} {} {}",
        g.vertex_count(),
        g.edge_count(),
        g.boundary().len()
    );
    for &(u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    let ids: Vec<String> = g.boundary().iter().map(usize::to_string).collect();
    let _ = writeln!(s, "{}", ids.join(" "));
    s
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| {
                Error::invalid(format!("line {lineno}: `{t}` is not a nonnegative integer"))
            })
        })
        .collect()
}

pub fn read_graph(text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::invalid("empty graph file"))?;
    let head = parse_numbers(header, ln)?;
    let [n, m, b] = head[..] else {
        return Err(Error::invalid(format!("line {ln}: expected `n m b`")));
    };
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::invalid(format!("expected {m} edge lines")))?;
        match parse_numbers(line, ln)?[..] {
            [u, v] => edges.push((u, v)),
            _ => return Err(Error::invalid(format!("line {ln}: expected `u v`"))),
        }
    }
    let boundary = match lines.next() {
        Some((ln, line)) => parse_numbers(line, ln)?,
        None if b == 0 => Vec::new(),
        None => return Err(Error::invalid("missing boundary line")),
    };
    if boundary.len() != b {
        return Err(Error::invalid(format!(
            "header declares {b} boundary vertices, found {}",
            boundary.len()
        )));
    }
    if let Some((ln, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::invalid(format!(
            "line {ln}: unexpected content `{extra}`"
        )));
    }
    Graph::new(n, edges, boundary)
}

/// SHA-256 of the graph's text form, hex encoded.
pub fn graph_hash(g: &Graph) -> String {
    hex::encode(Sha256::digest(write_graph(g).as_bytes()))
}

pub fn write_forest(f: &Forest<'_>) -> String {
    let mut s = graph_hash(f.host());
    s.push('\n');
    for e in f.edges() {
        let _ = writeln!(s, "{e}");
    }
    s
}

/// Parses a forest file and checks that it was written for `host`.
pub fn read_forest<'g>(host: &'g Graph, text: &str) -> Result<Forest<'g>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, hash) = lines
        .next()
        .ok_or_else(|| Error::invalid("empty forest file"))?;
    if hash.trim() != graph_hash(host) {
        return Err(Error::invalid(
            "forest file was written for a different host graph",
        ));
    }
    let mut edges = Vec::new();
    for (ln, line) in lines {
        edges.extend(parse_numbers(line, ln)?);
    }
    Forest::new(host, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_box;
    use crate::rng::RandomStream;
    use crate::sampler::wilson_tree;

    #[test]
    fn graph_round_trip() {
        let g = build_box(2, 4).unwrap();
        let text = write_graph(&g);
        let h = read_graph(&text).unwrap();
        assert_eq!(write_graph(&h), text);
        assert_eq!(h.edges(), g.edges());
        assert_eq!(h.boundary(), g.boundary());

        let k2 = read_graph("2 1 0\n0 1\n").unwrap();
        assert_eq!(k2.edge_count(), 1);
        let loops = read_graph("2 3 1\n0 1\n0 1\n1 1\n0\n").unwrap();
        assert_eq!(
            read_graph(&write_graph(&loops)).unwrap().edges(),
            loops.edges()
        );
    }

    #[test]
    fn graph_errors() {
        assert!(read_graph("").is_err());
        assert!(read_graph("2 1 0\n").is_err());
        assert!(read_graph("2 1 1\n0 1\n").is_err());
        assert!(read_graph("2 1 0\n0 x\n").is_err());
        assert!(read_graph("2 1 0\n0 5\n\n").is_err());
        assert!(read_graph("2 1 0\n0 1\n\n9\n").is_err());
    }

    #[test]
    fn forest_round_trip() {
        let g = build_box(2, 5).unwrap();
        let t = wilson_tree(&g, 0, RandomStream::new(5, 5)).unwrap();
        let text = write_forest(&t);
        let back = read_forest(&g, &text).unwrap();
        assert_eq!(back.edges(), t.edges());
        assert_eq!(write_forest(&back), text);
        let other = build_box(2, 4).unwrap();
        assert!(read_forest(&other, &text).is_err());
    }
}
