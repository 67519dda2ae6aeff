//! Exact orientation counts.

use std::collections::HashMap;

use nalgebra::Complex;
use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feasibility::{check_feasible, FeasibilityStatus};
use crate::graph::{Graph, ImbalanceSeq};
use crate::mle::solve_merits;

pub const BRUTEFORCE_MAX_EDGES: usize = 30;
/// Default bound on `Π_j (s_j + 1)` for [`exact_count_dp`].
pub const DP_STATE_CAP: u128 = 100_000_000;
pub const QUADRATURE_MAX_N: usize = 5;

/// Out-degree targets, or `None` when no orientation can match `b`.
fn targets(g: &Graph, b: &ImbalanceSeq) -> Result<Option<Vec<usize>>> {
    match b.out_degrees(g) {
        Ok(s) => Ok(Some(s)),
        Err(Error::Parity { .. } | Error::Infeasible) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Counts orientations with imbalances `b` by trying all `2^m` of them.
pub fn exact_count_bruteforce(g: &Graph, b: &ImbalanceSeq) -> Result<BigUint> {
    let m = g.m();
    if m > BRUTEFORCE_MAX_EDGES {
        return Err(Error::SizeLimit(format!("brute force needs m <= {BRUTEFORCE_MAX_EDGES}, got {m}")));
    }
    let Some(s) = targets(g, b)? else {
        return Ok(BigUint::zero());
    };
    let target: Vec<i64> = s.iter().enumerate().map(|(j, &s)| 2 * s as i64 - g.degree(j) as i64).collect();
    let edges = g.edges();

    // High bits enumerate prefixes in parallel; low bits walk a Gray code.
    let high = m.min(8);
    let low = m - high;
    let count: u64 = (0u64..1 << high)
        .into_par_iter()
        .map(|prefix| {
            let forward = |e: usize, low_bits: u64| -> bool {
                if e < low {
                    (low_bits >> e) & 1 == 1
                } else {
                    (prefix >> (e - low)) & 1 == 1
                }
            };
            let mut imb = crate::graph::imbalance_of(g, |e| forward(e, 0));
            let mut mismatched = imb.iter().zip(&target).filter(|(a, b)| a != b).count();
            let mut hits = u64::from(mismatched == 0);
            let mut bits = 0u64;
            for step in 1u64..1 << low {
                let e = step.trailing_zeros() as usize;
                bits ^= 1 << e;
                let (j, k) = edges[e];
                let delta = if (bits >> e) & 1 == 1 { 2 } else { -2 };
                for (v, d) in [(j, delta), (k, -delta)] {
                    let before = imb[v] == target[v];
                    imb[v] += d;
                    let after = imb[v] == target[v];
                    match (before, after) {
                        (true, false) => mismatched += 1,
                        (false, true) => mismatched -= 1,
                        _ => {}
                    }
                }
                hits += u64::from(mismatched == 0);
            }
            hits
        })
        .sum();
    Ok(BigUint::from(count))
}

pub fn exact_count_dp(g: &Graph, b: &ImbalanceSeq) -> Result<BigUint> {
    exact_count_dp_with_cap(g, b, DP_STATE_CAP)
}

/// Coefficient of `Π x_j^{s_j}` in `Π_{jk} (x_j + x_k)`, by sweeping edges
/// and keeping a sparse map from partial out-degree vectors to counts.
///
/// Edges are processed in ascending order of their larger endpoint. A
/// coordinate is pruned when it exceeds `s_j` or can no longer reach it,
/// and is reset to zero once its vertex has no edges left, so finished
/// vertices do not split states.
pub fn exact_count_dp_with_cap(g: &Graph, b: &ImbalanceSeq, cap: u128) -> Result<BigUint> {
    let Some(s) = targets(g, b)? else {
        return Ok(BigUint::zero());
    };
    let budget = s.iter().try_fold(1u128, |acc, &x| acc.checked_mul(x as u128 + 1));
    if budget.is_none_or(|v| v > cap) {
        return Err(Error::SizeLimit(format!("DP state budget exceeds {cap}")));
    }

    let mut order: Vec<(usize, usize)> = g.edges().to_vec();
    order.sort_by_key(|&(j, k)| (k, j));
    let mut remaining: Vec<usize> = g.degrees();
    let target: Vec<u16> = s.iter().map(|&x| x as u16).collect();

    let mut states: HashMap<Vec<u16>, BigUint> = HashMap::new();
    states.insert(vec![0; g.n()], BigUint::from(1u32));
    for &(j, k) in &order {
        remaining[j] -= 1;
        remaining[k] -= 1;
        let mut next: HashMap<Vec<u16>, BigUint> = HashMap::with_capacity(states.len() * 2);
        for (state, count) in states {
            for winner in [j, k] {
                let mut st = state.clone();
                st[winner] += 1;
                let ok = [j, k].iter().all(|&v| {
                    let c = st[v] as usize;
                    c <= s[v] && c + remaining[v] >= s[v]
                });
                if !ok {
                    continue;
                }
                for v in [j, k] {
                    if remaining[v] == 0 {
                        st[v] = 0;
                    }
                }
                *next.entry(st).or_default() += &count;
            }
        }
        states = next;
        if states.is_empty() {
            return Ok(BigUint::zero());
        }
    }
    // Vertices with no edges at all never got reset; they must have s_j = 0.
    let finish: Vec<u16> = (0..g.n()).map(|v| if g.degree(v) == 0 { target[v] } else { 0 }).collect();
    Ok(states.remove(&finish).unwrap_or_default())
}

/// Exact count via the contour-integral representation
/// `N = π^{-n} P^{-1} ∫_{(R mod π)^n} F(θ) dθ`, with the global rotation
/// removed by fixing `θ_n = 0` and the remaining torus sampled on a
/// `grid^(n-1)` rectangle lattice. `F` is a trigonometric polynomial, so the
/// rule is exact once `grid` exceeds half the largest frequency.
pub fn exact_count_quadrature(g: &Graph, b: &ImbalanceSeq, grid: usize) -> Result<f64> {
    let n = g.n();
    if n > QUADRATURE_MAX_N {
        return Err(Error::SizeLimit(format!("quadrature needs n <= {QUADRATURE_MAX_N}, got {n}")));
    }
    if grid == 0 {
        return Err(Error::Precondition("grid must be positive".into()));
    }
    let Some(s) = targets(g, b)? else {
        return Ok(0.0);
    };
    // Any positive radii give the same integral; the merits keep |F| flat.
    let r = match check_feasible(g, b)?.status {
        FeasibilityStatus::StrictlyFeasible => solve_merits(g, b)?.r,
        _ => vec![1.0; n],
    };
    let bv: Vec<f64> = b.values().to_vec();
    let edges = g.edges();
    let coef: Vec<(f64, f64)> =
        edges.iter().map(|&(j, k)| (1.0 / (1.0 + r[k] / r[j]), 1.0 / (1.0 + r[j] / r[k]))).collect();
    let log_p: f64 = s.iter().zip(&r).map(|(&s, &x)| s as f64 * x.ln()).sum::<f64>()
        - edges.iter().map(|&(j, k)| (r[j] + r[k]).ln()).sum::<f64>();

    let dims = n.saturating_sub(1);
    let points = grid.checked_pow(dims as u32).ok_or_else(|| Error::SizeLimit("grid too fine".into()))?;
    let step = std::f64::consts::PI / grid as f64;
    let eval = |idx: usize| -> f64 {
        let mut theta = vec![0.0; n];
        let mut rest = idx;
        for t in theta.iter_mut().take(dims) {
            *t = (rest % grid) as f64 * step;
            rest /= grid;
        }
        let phase: f64 = -bv.iter().zip(&theta).map(|(b, t)| b * t).sum::<f64>();
        let mut acc = Complex::from_polar(1.0, phase);
        for (&(j, k), &(cf, cb)) in edges.iter().zip(&coef) {
            let x = theta[j] - theta[k];
            acc *= Complex::from_polar(cf, x) + Complex::from_polar(cb, -x);
        }
        acc.re
    };
    // Fixed chunking keeps the reduction order independent of scheduling.
    let chunk = 4096;
    let partial: Vec<f64> = (0..points.div_ceil(chunk))
        .into_par_iter()
        .map(|c| (c * chunk..((c + 1) * chunk).min(points)).map(eval).sum::<f64>())
        .collect();
    let mean = partial.iter().sum::<f64>() / points as f64;
    Ok(mean * (-log_p).exp())
}

/// [`exact_count_quadrature`] with the grid doubled from 8 until two
/// successive values differ by less than `1e-8`.
pub fn exact_count_quadrature_auto(g: &Graph, b: &ImbalanceSeq) -> Result<(f64, usize)> {
    let mut grid = 8;
    let mut prev = exact_count_quadrature(g, b, grid)?;
    while grid < 512 {
        grid *= 2;
        let next = exact_count_quadrature(g, b, grid)?;
        if (next - prev).abs() < 1e-8 {
            return Ok((next, grid));
        }
        prev = next;
    }
    Ok((prev, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    fn ints(v: &[i64]) -> ImbalanceSeq {
        ImbalanceSeq::from_integers(v).unwrap()
    }

    #[test]
    fn brute_force_values() {
        let k3 = generate(&GraphKind::Complete, 3, 0).unwrap();
        assert_eq!(exact_count_bruteforce(&k3, &ImbalanceSeq::zeros(3)).unwrap(), BigUint::from(2u32));
        let k4 = generate(&GraphKind::Complete, 4, 0).unwrap();
        assert_eq!(exact_count_bruteforce(&k4, &ints(&[1, 1, -1, -1])).unwrap(), BigUint::from(4u32));
        let edge = Graph::new(2, [(0, 1)]).unwrap();
        assert_eq!(exact_count_bruteforce(&edge, &ints(&[1, -1])).unwrap(), BigUint::from(1u32));
        assert_eq!(exact_count_bruteforce(&k3, &ints(&[1, -1, 0])).unwrap(), BigUint::zero());
        let k9 = generate(&GraphKind::Complete, 9, 0).unwrap();
        assert!(matches!(exact_count_bruteforce(&k9, &ImbalanceSeq::zeros(9)), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn brute_force_k5_tournaments() {
        let k5 = generate(&GraphKind::Complete, 5, 0).unwrap();
        assert_eq!(exact_count_bruteforce(&k5, &ImbalanceSeq::zeros(5)).unwrap(), BigUint::from(24u32));
    }

    #[test]
    fn dp_values() {
        let k5 = generate(&GraphKind::Complete, 5, 0).unwrap();
        assert_eq!(exact_count_dp(&k5, &ImbalanceSeq::zeros(5)).unwrap(), BigUint::from(24u32));
        let k4 = generate(&GraphKind::Complete, 4, 0).unwrap();
        assert_eq!(exact_count_dp(&k4, &ints(&[1, 1, -1, -1])).unwrap(), BigUint::from(4u32));
        let c4 = generate(&GraphKind::Cycle, 4, 0).unwrap();
        assert_eq!(exact_count_dp(&c4, &ImbalanceSeq::zeros(4)).unwrap(), BigUint::from(2u32));
        let empty = Graph::new(3, []).unwrap();
        assert_eq!(exact_count_dp(&empty, &ImbalanceSeq::zeros(3)).unwrap(), BigUint::from(1u32));
        assert!(matches!(exact_count_dp_with_cap(&k5, &ImbalanceSeq::zeros(5), 100), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn dp_larger_tournaments() {
        let k7 = generate(&GraphKind::Complete, 7, 0).unwrap();
        assert_eq!(exact_count_dp(&k7, &ImbalanceSeq::zeros(7)).unwrap(), BigUint::from(2640u32));
    }

    #[test]
    fn quadrature_values() {
        let k3 = generate(&GraphKind::Complete, 3, 0).unwrap();
        assert!((exact_count_quadrature(&k3, &ImbalanceSeq::zeros(3), 64).unwrap() - 2.0).abs() < 1e-9);
        let k4 = generate(&GraphKind::Complete, 4, 0).unwrap();
        assert!((exact_count_quadrature(&k4, &ints(&[1, 1, -1, -1]), 48).unwrap() - 4.0).abs() < 1e-6);
        let edge = Graph::new(2, [(0, 1)]).unwrap();
        assert!((exact_count_quadrature(&edge, &ints(&[1, -1]), 32).unwrap() - 1.0).abs() < 1e-12);
        // Boundary instance falls back to unit radii.
        assert!((exact_count_quadrature(&k3, &ints(&[2, -2, 0]), 16).unwrap() - 1.0).abs() < 1e-9);
        let (q, grid) = exact_count_quadrature_auto(&k4, &ints(&[1, 1, -1, -1])).unwrap();
        assert!((q - 4.0).abs() < 1e-8 && grid >= 16);
        let k6 = generate(&GraphKind::Complete, 6, 0).unwrap();
        assert!(matches!(exact_count_quadrature(&k6, &ImbalanceSeq::zeros(6), 8), Err(Error::SizeLimit(_))));
    }
}
