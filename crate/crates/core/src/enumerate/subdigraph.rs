use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use super::exact::exact_count_dp;
use super::log_biguint;
use crate::error::{Error, Result};
use crate::graph::{Graph, ImbalanceSeq};

/// Checks that `arcs` are distinct edges of `g`; returns the imbalance of
/// the oriented subgraph and its per-vertex degrees.
fn oriented_subgraph(g: &Graph, arcs: &[(usize, usize)]) -> Result<(Vec<i64>, Vec<usize>)> {
    let mut seen = HashSet::new();
    let mut imb = vec![0i64; g.n()];
    let mut deg = vec![0usize; g.n()];
    for &(u, v) in arcs {
        if u >= g.n() || v >= g.n() || !g.has_edge(u, v) {
            return Err(Error::Precondition(format!("arc {u}->{v} is not an edge of G")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::Precondition(format!("edge {u}-{v} oriented twice")));
        }
        imb[u] += 1;
        imb[v] -= 1;
        deg[u] += 1;
        deg[v] += 1;
    }
    Ok((imb, deg))
}

/// Probability that a uniform orientation of `g` with imbalances `b`
/// contains the oriented subgraph `arcs`:
/// `N(G - H, b - b') / N(G, b)`, both counts by coefficient extraction.
pub fn subdigraph_probability_exact(g: &Graph, arcs: &[(usize, usize)], b: &ImbalanceSeq) -> Result<BigRational> {
    let (imb_h, _) = oriented_subgraph(g, arcs)?;
    let undirected: Vec<(usize, usize)> = arcs.to_vec();
    let rest = g.without_edges(&undirected)?;
    let b_h = ImbalanceSeq::from_integers(&imb_h)?;
    let total = exact_count_dp(g, b)?;
    if total.is_zero() {
        return Err(Error::Infeasible);
    }
    let hits = exact_count_dp(&rest, &b.minus(&b_h)?)?;
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
}

/// Leading-order probability that a random Eulerian orientation of `g`
/// contains a fixed Eulerian orientation of `H`:
/// `2^{-m_H} Π_j (1 - h_j/d_j)^{-1/2}`.
pub fn subdigraph_probability_asymptotic(g: &Graph, arcs: &[(usize, usize)], b: &ImbalanceSeq) -> Result<f64> {
    b.check_len(g)?;
    if !b.is_zero() {
        return Err(Error::Precondition("the asymptotic form needs b = 0".into()));
    }
    if let Some(vertex) = (0..g.n()).find(|&j| g.degree(j) % 2 == 1) {
        return Err(Error::Parity { vertex });
    }
    let (imb_h, deg_h) = oriented_subgraph(g, arcs)?;
    if imb_h.iter().any(|&x| x != 0) {
        return Err(Error::Precondition("the oriented subgraph must be Eulerian".into()));
    }
    let mut log_p = -(arcs.len() as f64) * std::f64::consts::LN_2;
    for (j, &h) in deg_h.iter().enumerate() {
        if h == 0 {
            continue;
        }
        let d = g.degree(j);
        if h >= d {
            return Err(Error::Precondition(format!("H uses every edge at vertex {j}")));
        }
        log_p -= 0.5 * (1.0 - h as f64 / d as f64).ln();
    }
    Ok(log_p.exp())
}

/// Leading-order expected number of directed Hamiltonian cycles in a random
/// Eulerian orientation: `2^{-n+1} N_H exp(Σ_j 1/d_j)`, where `N_H` counts
/// the undirected Hamiltonian cycles of `g`.
pub fn hamiltonian_expectation(g: &Graph, hamiltonian_cycles: &BigUint) -> Result<f64> {
    let Some(log_nh) = log_biguint(hamiltonian_cycles) else {
        return Ok(0.0);
    };
    if let Some(j) = (0..g.n()).find(|&j| g.degree(j) == 0) {
        return Err(Error::Precondition(format!("vertex {j} is isolated")));
    }
    let inv_deg: f64 = g.degrees().iter().map(|&d| 1.0 / d as f64).sum();
    Ok((log_nh - (g.n() as f64 - 1.0) * std::f64::consts::LN_2 + inv_deg).exp())
}
