//! Undirected simple graphs and imbalance sequences.

mod generate;
mod io;
mod spectral;

pub use generate::{generate, parse_generator_spec, GraphKind};
pub use io::{load_graph, write_edge_list};
pub use spectral::{cheeger_exact, lambda2, Lambda2, CHEEGER_MAX_N};

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// An undirected simple graph on vertices `0..n`.
///
/// Edges are stored canonically as `(j, k)` with `j < k`, sorted
/// lexicographically. The position of an edge in [`Graph::edges`] is its
/// canonical index, used by every per-edge vector in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
    #[serde(skip)]
    index: HashMap<(usize, usize), usize>,
}

impl Graph {
    /// Builds a graph from 0-indexed edges, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon = Vec::new();
        for (j, k) in edges {
            if j >= n || k >= n {
                return Err(Error::InvalidGraph(format!("edge {j}-{k} out of range for n = {n}")));
            }
            if j == k {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {j}")));
            }
            canon.push((j.min(k), j.max(k)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate edge {}-{}", w[0].0, w[0].1)));
        }
        Ok(Self::from_canonical(n, canon))
    }

    fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        let mut index = HashMap::with_capacity(edges.len());
        for (e, &(j, k)) in edges.iter().enumerate() {
            adjacency[j].push(k);
            adjacency[k].push(j);
            index.insert((j, k), e);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Graph { n, edges, adjacency, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.adjacency[j]
    }

    pub fn degree(&self, j: usize) -> usize {
        self.adjacency[j].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Canonical index of the edge `{j, k}`, in either order.
    pub fn edge_index(&self, j: usize, k: usize) -> Option<usize> {
        self.index.get(&(j.min(k), j.max(k))).copied()
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.edge_index(j, k).is_some()
    }

    /// Connected-component label per vertex (labels in order of first
    /// appearance) and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &u in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().1 == 1
    }

    /// Vertex lists of each connected component, each sorted ascending.
    pub fn component_vertices(&self) -> Vec<Vec<usize>> {
        let (label, count) = self.components();
        let mut parts = vec![Vec::new(); count];
        for (v, &c) in label.iter().enumerate() {
            parts[c].push(v);
        }
        parts
    }

    /// Subgraph induced by `vertices`, relabelled `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(j, k)| local[j] != usize::MAX && local[k] != usize::MAX)
            .map(|&(j, k)| (local[j].min(local[k]), local[j].max(local[k])))
            .collect();
        edges.sort_unstable();
        Graph::from_canonical(vertices.len(), edges)
    }

    /// The graph with the given edges deleted (vertices kept).
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Result<Graph> {
        let mut keep = vec![true; self.m()];
        for &(j, k) in removed {
            let e = self
                .edge_index(j, k)
                .ok_or_else(|| Error::InvalidGraph(format!("edge {j}-{k} is not in the graph")))?;
            keep[e] = false;
        }
        let edges = self.edges.iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| *e).collect();
        Ok(Graph::from_canonical(self.n, edges))
    }

    /// Unweighted Laplacian.
    pub fn laplacian(&self) -> DMatrix<f64> {
        self.weighted_laplacian(&vec![1.0; self.m()])
    }

    /// Laplacian with one weight per canonical edge.
    pub fn weighted_laplacian(&self, weights: &[f64]) -> DMatrix<f64> {
        assert_eq!(weights.len(), self.m());
        let mut l = DMatrix::zeros(self.n, self.n);
        for (&(j, k), &w) in self.edges.iter().zip(weights) {
            l[(j, j)] += w;
            l[(k, k)] += w;
            l[(j, k)] -= w;
            l[(k, j)] -= w;
        }
        l
    }

    /// Neighbour sets as bitmasks; only for `n <= 64`.
    pub fn neighbor_masks(&self) -> Vec<u64> {
        assert!(self.n <= 64, "bitmask view needs n <= 64");
        self.adjacency.iter().map(|nbrs| nbrs.iter().fold(0u64, |acc, &u| acc | (1 << u))).collect()
    }

    /// Number of edges with exactly one endpoint in the vertex set `mask`.
    pub fn boundary_size(&self, mask: u64) -> usize {
        self.edges.iter().filter(|&&(j, k)| ((mask >> j) & 1) != ((mask >> k) & 1)).count()
    }
}

/// A target imbalance vector `b`, indexed by vertex.
///
/// Values are real for feasibility and merit solving; counting operations
/// additionally require integers of the right parity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImbalanceSeq(Vec<f64>);

/// Tolerance on `|sum b|` for real-valued sequences.
pub const IMBALANCE_SUM_TOL: f64 = 1e-12;

impl ImbalanceSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidImbalance("non-finite entry".into()));
        }
        let sum: f64 = values.iter().sum();
        if sum.abs() > IMBALANCE_SUM_TOL {
            return Err(Error::InvalidImbalance(format!("entries sum to {sum}, expected 0")));
        }
        Ok(ImbalanceSeq(values))
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        let sum: i64 = values.iter().sum();
        if sum != 0 {
            return Err(Error::InvalidImbalance(format!("entries sum to {sum}, expected 0")));
        }
        Ok(ImbalanceSeq(values.iter().map(|&v| v as f64).collect()))
    }

    pub fn zeros(n: usize) -> Self {
        ImbalanceSeq(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// `b_max = max |b_j|`.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// The entries as integers, if every entry is integral.
    pub fn as_integers(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|&v| (v.fract() == 0.0 && v.abs() < 1e15).then_some(v as i64)).collect()
    }

    pub fn check_len(&self, g: &Graph) -> Result<()> {
        if self.len() != g.n() {
            return Err(Error::InvalidImbalance(format!(
                "length {} does not match vertex count {}",
                self.len(),
                g.n()
            )));
        }
        Ok(())
    }

    /// Out-degrees `s_j = (d_j + b_j) / 2` that an orientation with these
    /// imbalances must have.
    ///
    /// Errors with [`Error::Parity`] when some `b_j` and `d_j` differ in
    /// parity and with [`Error::Infeasible`] when `|b_j| > d_j`.
    pub fn out_degrees(&self, g: &Graph) -> Result<Vec<usize>> {
        self.check_len(g)?;
        let ints =
            self.as_integers().ok_or_else(|| Error::InvalidImbalance("counting requires integer imbalances".into()))?;
        let mut out = Vec::with_capacity(g.n());
        for (j, &b) in ints.iter().enumerate() {
            let d = g.degree(j) as i64;
            if (d + b).rem_euclid(2) != 0 {
                return Err(Error::Parity { vertex: j });
            }
            if b.abs() > d {
                return Err(Error::Infeasible);
            }
            out.push(((d + b) / 2) as usize);
        }
        Ok(out)
    }

    /// Entrywise difference `self - other`.
    pub fn minus(&self, other: &ImbalanceSeq) -> Result<ImbalanceSeq> {
        if self.len() != other.len() {
            return Err(Error::InvalidImbalance("length mismatch".into()));
        }
        ImbalanceSeq::new(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// Imbalance vector of the orientation described by `forward`, where
/// `forward[e]` means canonical edge `e = (j, k)` is oriented `j -> k`.
pub fn imbalance_of(g: &Graph, forward: impl Fn(usize) -> bool) -> Vec<i64> {
    let mut b = vec![0i64; g.n()];
    for (e, &(j, k)) in g.edges().iter().enumerate() {
        if forward(e) {
            b[j] += 1;
            b[k] -= 1;
        } else {
            b[j] -= 1;
            b[k] += 1;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_duplicates() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn degree_sum_is_twice_edges() {
        let g = generate(&GraphKind::Circulant(vec![1, 3]), 11, 0).unwrap();
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.m());
        for (e, &(j, k)) in g.edges().iter().enumerate() {
            assert!(j < k);
            assert!(g.neighbors(j).contains(&k));
            assert_eq!(g.edge_index(k, j), Some(e));
        }
    }

    #[test]
    fn components_of_two_triangles() {
        let g = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_eq!(g.components().1, 2);
        assert!(!g.is_connected());
        assert_eq!(g.component_vertices(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(g.induced(&[3, 4, 5]).m(), 3);
    }

    #[test]
    fn imbalance_sum_checked() {
        assert!(ImbalanceSeq::new(vec![1.0, 0.5]).is_err());
        assert!(ImbalanceSeq::new(vec![0.1, 0.2, -0.3]).is_ok());
        assert!(ImbalanceSeq::from_integers(&[1, -2]).is_err());
    }

    #[test]
    fn out_degrees_parity_and_range() {
        let k3 = generate(&GraphKind::Complete, 3, 0).unwrap();
        let b = ImbalanceSeq::from_integers(&[1, -1, 0]).unwrap();
        assert_eq!(b.out_degrees(&k3), Err(Error::Parity { vertex: 0 }));
        let b = ImbalanceSeq::from_integers(&[4, -4, 0]).unwrap();
        assert_eq!(b.out_degrees(&k3), Err(Error::Infeasible));
        let b = ImbalanceSeq::from_integers(&[2, -2, 0]).unwrap();
        assert_eq!(b.out_degrees(&k3).unwrap(), vec![2, 0, 1]);
    }

    #[test]
    fn without_edges_keeps_vertices() {
        let g = generate(&GraphKind::Complete, 4, 0).unwrap();
        let h = g.without_edges(&[(1, 0), (2, 3)]).unwrap();
        assert_eq!(h.n(), 4);
        assert_eq!(h.m(), 4);
        assert!(!h.has_edge(0, 1));
        assert!(g.without_edges(&[(0, 0)]).is_err());
    }
}
