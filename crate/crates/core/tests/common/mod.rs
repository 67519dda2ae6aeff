#![allow(dead_code)]

use orientcount::feasibility::FeasibilityStatus;
use orientcount::graph::{generate, GraphKind};
use orientcount::{Graph, ImbalanceSeq};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G(n, p) re-drawn with derived seeds until it is connected.
pub fn random_connected(n: usize, p: f64, seed: u64) -> Graph {
    (0..)
        .map(|t| generate(&GraphKind::Gnp(p), n, seed.wrapping_mul(1000).wrapping_add(t)).unwrap())
        .find(|g| g.is_connected())
        .unwrap()
}

/// Keeps at most `m` edges, chosen at random.
pub fn thin(g: &Graph, m: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = g.edges().to_vec();
    while edges.len() > m {
        let i = rng.random_range(0..edges.len());
        edges.swap_remove(i);
    }
    Graph::new(g.n(), edges).unwrap()
}

/// Imbalance vector of a uniformly random orientation; always feasible.
pub fn random_orientation_b(g: &Graph, rng: &mut ChaCha8Rng) -> ImbalanceSeq {
    let mut b = vec![0i64; g.n()];
    for &(j, k) in g.edges() {
        let s = if rng.random::<bool>() { 1 } else { -1 };
        b[j] += s;
        b[k] -= s;
    }
    ImbalanceSeq::from_integers(&b).unwrap()
}

/// Feasibility from the cut conditions, by enumerating every vertex subset.
pub fn feasibility_by_cuts(g: &Graph, b: &[f64]) -> FeasibilityStatus {
    let n = g.n();
    let mut tight = false;
    for mask in 1u64..(1 << n) {
        let load: f64 = (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| b[v]).sum();
        let cut = g.edges().iter().filter(|&&(j, k)| (mask >> j & 1) != (mask >> k & 1)).count() as f64;
        if load > cut + 1e-9 {
            return FeasibilityStatus::Infeasible;
        }
        if cut > 0.0 && (load - cut).abs() <= 1e-9 {
            tight = true;
        }
    }
    if tight {
        FeasibilityStatus::Boundary
    } else {
        FeasibilityStatus::StrictlyFeasible
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
