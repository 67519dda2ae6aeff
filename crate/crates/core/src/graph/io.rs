use std::collections::HashSet;
use std::fmt::Write;

use super::Graph;
use crate::error::{Error, Result};

/// Parses an edge-list document: a header line `n m`, then `m` lines `j k`
/// with 1-indexed endpoints. Blank lines are ignored.
pub fn load_graph(text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, detail: "empty document".into() })?;
    let [n, m] = parse_pair(hline, header)?;

    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    for (line, text) in lines {
        let [j, k] = parse_pair(line, text)?;
        for v in [j, k] {
            if v == 0 || v > n {
                return Err(Error::IndexOutOfRange { line, vertex: v, n });
            }
        }
        if j == k {
            return Err(Error::SelfLoop { line, vertex: j });
        }
        let key = (j.min(k) - 1, j.max(k) - 1);
        if !seen.insert(key) {
            return Err(Error::DuplicateEdge { line, j, k });
        }
        edges.push(key);
    }
    if edges.len() != m {
        return Err(Error::Parse { line: hline, detail: format!("header declares {m} edges, found {}", edges.len()) });
    }
    Graph::new(n, edges)
}

fn parse_pair(line: usize, text: &str) -> Result<[usize; 2]> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::Parse { line, detail: format!("expected two integers, got {text:?}") });
    }
    let mut out = [0; 2];
    for (slot, f) in out.iter_mut().zip(&fields) {
        *slot = f.parse().map_err(|_| Error::Parse { line, detail: format!("not a nonnegative integer: {f:?}") })?;
    }
    Ok(out)
}

/// Writes `g` in the edge-list format accepted by [`load_graph`].
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for &(j, k) in g.edges() {
        let _ = writeln!(out, "{} {}", j + 1, k + 1);
    }
    out
}
