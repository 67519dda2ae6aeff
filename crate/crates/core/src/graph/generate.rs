use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Graph;
use crate::error::{Error, Result};

/// Deterministic graph families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GraphKind {
    Complete,
    Cycle,
    /// Vertex `j` joined to `j ± o (mod n)` for each offset `o`.
    Circulant(Vec<usize>),
    /// Erdős–Rényi: each pair present independently with probability `p`.
    Gnp(f64),
    /// Uniform-ish random `d`-regular graph from the pairing model.
    RandomRegular(usize),
}

/// Builds a graph of the given family. The output is a pure function of
/// `(kind, n, seed)`; deterministic families ignore the seed.
pub fn generate(kind: &GraphKind, n: usize, seed: u64) -> Result<Graph> {
    match kind {
        GraphKind::Complete => Graph::new(n, (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k)))),
        GraphKind::Cycle => {
            if n < 3 {
                return Err(Error::InvalidParameters(format!("cycle needs n >= 3, got {n}")));
            }
            Graph::new(n, (0..n).map(|j| (j, (j + 1) % n)))
        }
        GraphKind::Circulant(offsets) => circulant(n, offsets),
        GraphKind::Gnp(p) => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidParameters(format!("gnp probability {p} not in [0, 1]")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for j in 0..n {
                for k in j + 1..n {
                    if rng.random::<f64>() < *p {
                        edges.push((j, k));
                    }
                }
            }
            Graph::new(n, edges)
        }
        GraphKind::RandomRegular(d) => random_regular(n, *d, seed),
    }
}

fn circulant(n: usize, offsets: &[usize]) -> Result<Graph> {
    if offsets.is_empty() {
        return Err(Error::InvalidParameters("circulant needs at least one offset".into()));
    }
    let mut edges = BTreeSet::new();
    for &o in offsets {
        if o == 0 || 2 * o > n {
            return Err(Error::InvalidParameters(format!("circulant offset {o} not in 1..={}", n / 2)));
        }
        for j in 0..n {
            let k = (j + o) % n;
            edges.insert((j.min(k), j.max(k)));
        }
    }
    if edges.len() != offsets.iter().map(|&o| if 2 * o == n { n / 2 } else { n }).sum::<usize>() {
        return Err(Error::InvalidParameters("circulant offsets overlap".into()));
    }
    Graph::new(n, edges)
}

/// Pairing model with incremental rejection: join random free points that
/// form a legal edge, restarting if the partial pairing gets stuck.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n || !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidParameters(format!("no {d}-regular graph on {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..10_000 {
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut edges = BTreeSet::new();
        while !points.is_empty() {
            let mut placed = false;
            for _ in 0..100 {
                let a = rng.random_range(0..points.len());
                let b = rng.random_range(0..points.len());
                let (u, v) = (points[a], points[b]);
                if a == b || u == v || edges.contains(&(u.min(v), u.max(v))) {
                    continue;
                }
                edges.insert((u.min(v), u.max(v)));
                let (hi, lo) = (a.max(b), a.min(b));
                points.swap_remove(hi);
                points.swap_remove(lo);
                placed = true;
                break;
            }
            if !placed && !has_legal_pair(&points, &edges) {
                continue 'attempt;
            }
        }
        return Graph::new(n, edges);
    }
    Err(Error::InvalidParameters(format!("failed to sample a {d}-regular graph on {n} vertices")))
}

fn has_legal_pair(points: &[usize], edges: &BTreeSet<(usize, usize)>) -> bool {
    points
        .iter()
        .enumerate()
        .any(|(i, &u)| points[i + 1..].iter().any(|&v| u != v && !edges.contains(&(u.min(v), u.max(v)))))
}

/// Parses a generator spec.
///
/// Accepted forms: `k:n`, `c:n`, `circ:n:1,2`, and the general
/// `kind:n:seed[:params]` with kinds `complete`, `cycle`, `circulant`,
/// `gnp` (param `p`) and `rr`/`random-regular` (param `d`). The two-field
/// and circulant shorthands take seed 0.
pub fn parse_generator_spec(spec: &str) -> Result<(GraphKind, usize, u64)> {
    let bad = |why: &str| Error::InvalidParameters(format!("generator spec {spec:?}: {why}"));
    let fields: Vec<&str> = spec.split(':').collect();
    if fields.len() < 2 {
        return Err(bad("expected kind:n[:seed][:params]"));
    }
    let n: usize = fields[1].parse().map_err(|_| bad("vertex count is not an integer"))?;
    let seed_at = |i: usize| -> Result<u64> {
        fields.get(i).map_or(Ok(0), |s| s.parse().map_err(|_| bad("seed is not an integer")))
    };
    let param = |i: usize| fields.get(i).copied().ok_or_else(|| bad("missing parameter"));
    let kind = match fields[0] {
        "k" | "complete" => {
            if fields.len() > 3 {
                return Err(bad("too many fields"));
            }
            return Ok((GraphKind::Complete, n, seed_at(2)?));
        }
        "c" | "cycle" => {
            if fields.len() > 3 {
                return Err(bad("too many fields"));
            }
            return Ok((GraphKind::Cycle, n, seed_at(2)?));
        }
        "circ" | "circulant" => {
            let (seed, list) = match fields.len() {
                3 => (0, fields[2]),
                4 => (seed_at(2)?, fields[3]),
                _ => return Err(bad("expected circ:n:offsets or circ:n:seed:offsets")),
            };
            let offsets = list
                .split(',')
                .map(|o| o.trim().parse().map_err(|_| bad("offset is not an integer")))
                .collect::<Result<Vec<usize>>>()?;
            return Ok((GraphKind::Circulant(offsets), n, seed));
        }
        "gnp" => GraphKind::Gnp(param(3)?.parse().map_err(|_| bad("p is not a number"))?),
        "rr" | "random-regular" => GraphKind::RandomRegular(param(3)?.parse().map_err(|_| bad("d is not an integer"))?),
        other => return Err(bad(&format!("unknown kind {other:?}"))),
    };
    if fields.len() != 4 {
        return Err(bad("expected kind:n:seed:param"));
    }
    Ok((kind, n, seed_at(2)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_families() {
        assert_eq!(generate(&GraphKind::Complete, 4, 0).unwrap().m(), 6);
        assert_eq!(generate(&GraphKind::Cycle, 4, 0).unwrap().m(), 4);
        let g = generate(&GraphKind::Circulant(vec![1, 2]), 10, 0).unwrap();
        assert_eq!(g.m(), 20);
        assert!(g.degrees().iter().all(|&d| d == 4));
    }

    #[test]
    fn inadmissible_parameters() {
        assert!(generate(&GraphKind::RandomRegular(3), 7, 1).is_err());
        assert!(generate(&GraphKind::RandomRegular(7), 7, 1).is_err());
        assert!(generate(&GraphKind::Circulant(vec![0]), 7, 1).is_err());
        assert!(generate(&GraphKind::Circulant(vec![1, 6]), 7, 1).is_err());
        assert!(generate(&GraphKind::Gnp(1.5), 7, 1).is_err());
        assert!(generate(&GraphKind::Cycle, 2, 1).is_err());
    }

    #[test]
    fn random_regular_is_regular() {
        for seed in 0..20 {
            let g = generate(&GraphKind::RandomRegular(6), 15 + (seed as usize % 2) * 3, seed).unwrap();
            assert!(g.degrees().iter().all(|&d| d == 6));
        }
    }

    #[test]
    fn seeded_families_are_pure() {
        for kind in [GraphKind::Gnp(0.4), GraphKind::RandomRegular(4)] {
            let a = generate(&kind, 20, 7).unwrap();
            let b = generate(&kind, 20, 7).unwrap();
            let c = generate(&kind, 20, 8).unwrap();
            assert_eq!(a.edges(), b.edges());
            assert_ne!(a.edges(), c.edges());
        }
    }

    #[test]
    fn spec_strings() {
        assert_eq!(parse_generator_spec("k:9").unwrap(), (GraphKind::Complete, 9, 0));
        assert_eq!(parse_generator_spec("c:5").unwrap(), (GraphKind::Cycle, 5, 0));
        assert_eq!(parse_generator_spec("circ:10:1,2").unwrap(), (GraphKind::Circulant(vec![1, 2]), 10, 0));
        assert_eq!(parse_generator_spec("circulant:10:3:1,2").unwrap(), (GraphKind::Circulant(vec![1, 2]), 10, 3));
        assert_eq!(parse_generator_spec("gnp:8:42:0.5").unwrap(), (GraphKind::Gnp(0.5), 8, 42));
        assert_eq!(parse_generator_spec("rr:12:1:4").unwrap(), (GraphKind::RandomRegular(4), 12, 1));
        assert!(parse_generator_spec("gnp:8:1").is_err());
        assert!(parse_generator_spec("tree:8").is_err());
        assert!(parse_generator_spec("k").is_err());
    }
}
