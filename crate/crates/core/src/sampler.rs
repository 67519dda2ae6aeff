//! Independent random orientations under edge parameters `λ`, and an
//! exhaustive check of when such a model is uniform given its imbalances.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::{log_p, Orientation};
use crate::error::{Error, Result};
use crate::graph::{Graph, ImbalanceSeq};
use crate::mle::LambdaMatrix;

/// Largest edge count [`verify_conditional_uniformity`] enumerates.
pub const UNIFORMITY_MAX_EDGES: usize = 16;
const UNIFORMITY_TOL: f64 = 1e-12;
const MERIT_FORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrientationModel {
    pub lam: LambdaMatrix,
    pub seed: u64,
}

impl OrientationModel {
    pub fn new(lam: LambdaMatrix, seed: u64) -> Result<Self> {
        if lam.is_degenerate() {
            return Err(Error::InvalidParameters("every λ must lie strictly inside (0, 1)".into()));
        }
        Ok(OrientationModel { lam, seed })
    }
}

/// Sample number `index` from `model`. Each sample has its own ChaCha
/// stream keyed by `(seed, index)`, so results do not depend on the order
/// or thread in which samples are drawn.
pub fn sample_orientation(model: &OrientationModel, g: &Graph, index: u64) -> Orientation {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(index);
    let forward = (0..g.m()).map(|e| rng.random::<f64>() < model.lam.forward(e)).collect();
    Orientation { forward }
}

/// Samples `0..count`, drawn in parallel.
pub fn sample_orientations(model: &OrientationModel, g: &Graph, count: u64) -> Vec<Orientation> {
    (0..count).into_par_iter().map(|i| sample_orientation(model, g, i)).collect()
}

/// Merits reconstructed from `λ` along a spanning forest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeritFit {
    /// Normalised to geometric mean 1 on each component.
    pub r: Vec<f64>,
    /// Largest `|log(λ_jk/λ_kj) - log(r_j/r_k)|` over all edges; zero up to
    /// rounding exactly when `λ` has merit form.
    pub max_log_error: f64,
}

impl MeritFit {
    pub fn is_merit_form(&self) -> bool {
        self.max_log_error <= MERIT_FORM_TOL
    }
}

/// Fixes `r = 1` at a root of each component, propagates
/// `r_k = r_j λ_kj / λ_jk` along a BFS tree and measures how far the
/// remaining edges are from satisfying the same relation.
pub fn merits_from_lambda(g: &Graph, lam: &LambdaMatrix) -> Result<MeritFit> {
    if lam.len() != g.m() {
        return Err(Error::Precondition("λ does not match the graph".into()));
    }
    if lam.is_degenerate() {
        return Err(Error::InvalidParameters("every λ must lie strictly inside (0, 1)".into()));
    }
    let n = g.n();
    let log_odds = |j: usize, k: usize| -> f64 {
        let e = g.edge_index(j, k).expect("edge");
        let (a, b) = (lam.forward(e).ln(), lam.backward(e).ln());
        if j < k {
            a - b
        } else {
            b - a
        }
    };
    let mut beta = vec![f64::NAN; n];
    for root in 0..n {
        if !beta[root].is_nan() {
            continue;
        }
        beta[root] = 0.0;
        let mut members = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(j) = queue.pop_front() {
            for &k in g.neighbors(j) {
                if beta[k].is_nan() {
                    beta[k] = beta[j] - log_odds(j, k);
                    members.push(k);
                    queue.push_back(k);
                }
            }
        }
        let mean = members.iter().map(|&v| beta[v]).sum::<f64>() / members.len() as f64;
        for &v in &members {
            beta[v] -= mean;
        }
    }
    let max_log_error =
        g.edges().iter().map(|&(j, k)| (log_odds(j, k) - (beta[j] - beta[k])).abs()).fold(0.0, f64::max);
    Ok(MeritFit { r: beta.iter().map(|b| b.exp()).collect(), max_log_error })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityReport {
    pub orientations: u64,
    /// Number of distinct imbalance vectors seen.
    pub groups: usize,
    /// Largest `max/min - 1` of orientation probabilities within a group.
    pub max_group_spread: f64,
    pub total_probability: f64,
    pub merit_form: bool,
    /// Largest relative gap between a group's probability and
    /// `exp(log P(G, b, r))` for the reconstructed merits; only meaningful
    /// when `merit_form` holds.
    pub max_log_p_gap: Option<f64>,
    pub uniform: bool,
    pub passed: bool,
}

/// Enumerates all `2^m` orientations, groups their probabilities by
/// imbalance vector and checks that each group is constant. For merit-form
/// parameters the common value must also equal `P(G, b, r)`. `passed`
/// records whether the outcome agrees with merit form: uniform when `λ` is
/// of merit form, non-uniform otherwise.
pub fn verify_conditional_uniformity(g: &Graph, lam: &LambdaMatrix) -> Result<UniformityReport> {
    let m = g.m();
    if m > UNIFORMITY_MAX_EDGES {
        return Err(Error::SizeLimit(format!("exhaustive check needs m <= {UNIFORMITY_MAX_EDGES}, got {m}")));
    }
    let fit = merits_from_lambda(g, lam)?;

    let mut groups: HashMap<Vec<i64>, (f64, f64, u64)> = HashMap::new();
    let mut total = 0.0;
    for bits in 0u64..1 << m {
        let forward = |e: usize| (bits >> e) & 1 == 1;
        let p: f64 = (0..m).map(|e| if forward(e) { lam.forward(e) } else { lam.backward(e) }).product();
        total += p;
        let entry = groups.entry(crate::graph::imbalance_of(g, forward)).or_insert((p, p, 0));
        entry.0 = entry.0.min(p);
        entry.1 = entry.1.max(p);
        entry.2 += 1;
    }
    let max_group_spread = groups.values().map(|&(lo, hi, _)| hi / lo - 1.0).fold(0.0, f64::max);
    let uniform = max_group_spread <= UNIFORMITY_TOL;

    let merit_form = fit.is_merit_form();
    let max_log_p_gap = if merit_form {
        let mut gap: f64 = 0.0;
        for (b, &(lo, hi, _)) in &groups {
            let lp = log_p(g, &ImbalanceSeq::from_integers(b)?, &fit.r)?;
            let expect = lp.exp();
            gap = gap.max(((lo - expect) / expect).abs()).max(((hi - expect) / expect).abs());
        }
        Some(gap)
    } else {
        None
    };
    let total_ok = (total - 1.0).abs() <= UNIFORMITY_TOL * 16.0;
    let passed = total_ok
        && if merit_form { uniform && max_log_p_gap.is_some_and(|x| x <= UNIFORMITY_TOL * 100.0) } else { !uniform };
    Ok(UniformityReport {
        orientations: 1 << m,
        groups: groups.len(),
        max_group_spread,
        total_probability: total,
        merit_form,
        max_log_p_gap,
        uniform,
        passed,
    })
}
