//! Bradley–Terry merits solving the balance equations
//! `sum_{k ~ j} (r_j - r_k) / (r_j + r_k) = b_j`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{check_feasible, scale_to_integers, FeasibilityStatus};
use crate::graph::{cheeger_exact, lambda2, Graph, ImbalanceSeq, CHEEGER_MAX_N};

/// Edge-ratio cap beyond which an instance is treated as boundary-feasible.
pub const DIVERGENCE_RATIO: f64 = 1e10;
/// Sweeps without residual progress before declaring stagnation.
pub const STAGNATION_WINDOW: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Starting merits; all ones when absent.
    pub initial: Option<Vec<f64>>,
    /// Finish with Newton steps on `log r` once the residual drops below 1e-6.
    pub newton_polish: bool,
    /// Run the flow-based feasibility check first and refuse boundary or
    /// infeasible input up front. Skipped for irrational `b`.
    pub precheck: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-12, max_iter: 100_000, initial: None, newton_polish: false, precheck: true }
    }
}

/// Positive merits normalised to geometric mean 1 on each component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeritVector {
    pub r: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Edge win probabilities, per canonical edge `e = (j, k)` with `j < k`.
///
/// Usually built from merits, in which case `λ_jk = r_j / (r_j + r_k)`.
/// [`LambdaMatrix::from_probabilities`] admits arbitrary parameters, which
/// the sampler uses when testing for merit form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaMatrix {
    forward: Vec<f64>,
    backward: Vec<f64>,
}

impl LambdaMatrix {
    pub fn from_merits(g: &Graph, r: &[f64]) -> Self {
        let (forward, backward) = g
            .edges()
            .iter()
            .map(|&(j, k)| {
                let s = r[j] + r[k];
                (r[j] / s, r[k] / s)
            })
            .unzip();
        LambdaMatrix { forward, backward }
    }

    /// General orientation parameters: `p[e]` is the probability that
    /// canonical edge `e = (j, k)` is oriented `j -> k`.
    pub fn from_probabilities(g: &Graph, p: Vec<f64>) -> Result<Self> {
        if p.len() != g.m() || p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Precondition("need one probability in [0, 1] per edge".into()));
        }
        let backward = p.iter().map(|x| 1.0 - x).collect();
        Ok(LambdaMatrix { forward: p, backward })
    }

    /// `λ_jk` for canonical edge `e = (j, k)`.
    pub fn forward(&self, e: usize) -> f64 {
        self.forward[e]
    }

    /// `λ_kj` for canonical edge `e = (j, k)`.
    pub fn backward(&self, e: usize) -> f64 {
        self.backward[e]
    }

    /// `λ_jk` for an edge `{j, k}` of `g` in either order.
    pub fn get(&self, g: &Graph, j: usize, k: usize) -> Option<f64> {
        let e = g.edge_index(j, k)?;
        Some(if j < k { self.forward[e] } else { self.backward[e] })
    }

    /// `λ_jk λ_kj`.
    pub fn product(&self, e: usize) -> f64 {
        self.forward[e] * self.backward[e]
    }

    /// `λ_jk - λ_kj`.
    pub fn difference(&self, e: usize) -> f64 {
        self.forward[e] - self.backward[e]
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.forward.iter().any(|&p| p <= 0.0 || p >= 1.0)
    }

    /// Expected imbalance `sum_k (λ_jk - λ_kj)` at every vertex.
    pub fn expected_imbalance(&self, g: &Graph) -> Vec<f64> {
        let mut out = vec![0.0; g.n()];
        for (e, &(j, k)) in g.edges().iter().enumerate() {
            let d = self.difference(e);
            out[j] += d;
            out[k] -= d;
        }
        out
    }
}

pub fn lambda_matrix(r: &MeritVector, g: &Graph) -> LambdaMatrix {
    LambdaMatrix::from_merits(g, &r.r)
}

/// `max_j |sum_k (r_j - r_k)/(r_j + r_k) - b_j|`.
pub fn balance_residual(g: &Graph, r: &[f64], b: &[f64]) -> f64 {
    let mut net = vec![0.0; g.n()];
    for &(j, k) in g.edges() {
        let d = (r[j] - r[k]) / (r[j] + r[k]);
        net[j] += d;
        net[k] -= d;
    }
    net.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Largest `max(r_j/r_k, r_k/r_j)` over edges.
pub fn max_edge_ratio(g: &Graph, r: &[f64]) -> f64 {
    g.edges().iter().map(|&(j, k)| (r[j] / r[k]).max(r[k] / r[j])).fold(1.0, f64::max)
}

/// Largest `|log(r_j / r_k)|` over pairs in the same component.
pub fn max_log_ratio(g: &Graph, r: &[f64]) -> f64 {
    g.component_vertices()
        .iter()
        .map(|c| {
            let logs = c.iter().map(|&v| r[v].ln());
            let (lo, hi) = logs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn normalise(r: &mut [f64], components: &[Vec<usize>]) {
    for c in components {
        let mean_log = c.iter().map(|&v| r[v].ln()).sum::<f64>() / c.len() as f64;
        let scale = (-mean_log).exp();
        for &v in c {
            r[v] *= scale;
        }
    }
}

pub fn solve_merits(g: &Graph, b: &ImbalanceSeq) -> Result<MeritVector> {
    solve_merits_with(g, b, &SolverOptions::default())
}

/// Minorise–maximise fixed point `r_j <- s_j / sum_{k ~ j} 1/(r_j + r_k)`
/// with `s_j = (d_j + b_j)/2`, renormalised after every sweep.
pub fn solve_merits_with(g: &Graph, b: &ImbalanceSeq, opts: &SolverOptions) -> Result<MeritVector> {
    b.check_len(g)?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let n = g.n();
    let components = g.component_vertices();
    for c in &components {
        let s: f64 = c.iter().map(|&v| b.values()[v]).sum();
        if s.abs() > 1e-9 {
            return Err(Error::InvalidImbalance("imbalances must sum to zero on every component".into()));
        }
    }
    if opts.precheck && scale_to_integers(b).is_ok() {
        match check_feasible(g, b)?.status {
            FeasibilityStatus::StrictlyFeasible => {}
            FeasibilityStatus::Boundary => {
                return Err(Error::Degenerate("boundary-feasible imbalances have no finite merits".into()))
            }
            FeasibilityStatus::Infeasible => return Err(Error::Infeasible),
        }
    }

    let bv = b.values();
    let wins: Vec<f64> = (0..n).map(|j| (g.degree(j) as f64 + bv[j]) / 2.0).collect();
    let mut r = match &opts.initial {
        Some(init) => {
            if init.len() != n || init.iter().any(|&x| !x.is_finite() || x <= 0.0) {
                return Err(Error::Precondition("initial merits must be positive and finite".into()));
            }
            init.clone()
        }
        None => vec![1.0; n],
    };
    normalise(&mut r, &components);

    let mut next = vec![0.0; n];
    let mut residual = balance_residual(g, &r, bv);
    let mut checkpoint = residual;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        for j in 0..n {
            let denom: f64 = g.neighbors(j).iter().map(|&k| 1.0 / (r[j] + r[k])).sum();
            next[j] = if denom > 0.0 { wins[j] / denom } else { r[j] };
        }
        std::mem::swap(&mut r, &mut next);
        if r.iter().any(|&x| !x.is_finite() || x <= 0.0) {
            return Err(Error::Degenerate("a merit collapsed to zero or overflowed".into()));
        }
        normalise(&mut r, &components);
        iterations += 1;
        residual = balance_residual(g, &r, bv);

        if opts.newton_polish && residual < 1e-6 && residual > opts.tol {
            if let Some((polished, res)) = newton_polish(g, &r, bv, &components, opts.tol) {
                r = polished;
                residual = res;
            }
        }
        if residual <= opts.tol {
            return Ok(MeritVector { r, residual, iterations });
        }
        if max_edge_ratio(g, &r) > DIVERGENCE_RATIO {
            return Err(Error::Degenerate(format!("edge merit ratio exceeded {DIVERGENCE_RATIO:e}")));
        }
        if iterations % STAGNATION_WINDOW == 0 {
            if residual >= checkpoint * (1.0 - 1e-3) {
                return Err(Error::Degenerate(format!(
                    "residual stalled at {residual:e} over {STAGNATION_WINDOW} sweeps"
                )));
            }
            checkpoint = residual;
        }
    }
    Err(Error::NotConverged { iterations, residual })
}

/// Newton iteration on `β = log r`; the Jacobian of the balance map is the
/// Laplacian with edge weights `2 λ_jk λ_kj`.
fn newton_polish(g: &Graph, r: &[f64], b: &[f64], components: &[Vec<usize>], tol: f64) -> Option<(Vec<f64>, f64)> {
    let n = g.n();
    let mut r = r.to_vec();
    let mut residual = balance_residual(g, &r, b);
    let mut pin = DMatrix::zeros(n, n);
    for c in components {
        let w = 1.0 / c.len() as f64;
        for &u in c {
            for &v in c {
                pin[(u, v)] = w;
            }
        }
    }
    for _ in 0..20 {
        let lam = LambdaMatrix::from_merits(g, &r);
        let weights: Vec<f64> = (0..g.m()).map(|e| 2.0 * lam.product(e)).collect();
        let jac = g.weighted_laplacian(&weights) + &pin;
        let expected = lam.expected_imbalance(g);
        let rhs = DVector::from_iterator(n, expected.iter().zip(b).map(|(x, y)| y - x));
        let step = jac.cholesky()?.solve(&rhs);
        let mut trial: Vec<f64> = r.iter().zip(step.iter()).map(|(x, s)| x * s.exp()).collect();
        normalise(&mut trial, components);
        let res = balance_residual(g, &trial, b);
        if res.is_nan() || res >= residual {
            break;
        }
        r = trial;
        residual = res;
        if residual <= tol {
            break;
        }
    }
    Some((r, residual))
}

/// Upper bound on `max |log(r_j / r_k)|` for a connected graph with
/// `|sum_U b| <= (1 - delta) |∂U|`:
/// `35Δ/(δh) · log(n/(δh)) · log(1/δ)`.
///
/// Uses the exact Cheeger constant when `n <= 22` and `λ₂/2` otherwise.
pub fn tameness_bound(g: &Graph, b: &ImbalanceSeq, delta: f64) -> Result<f64> {
    b.check_len(g)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Precondition(format!("delta = {delta} not in (0, 1]")));
    }
    if g.n() < 10 {
        return Err(Error::Precondition("tameness bound needs n >= 10".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let h = cheeger_lower(g)?;
    Ok(tameness_formula(g.n(), g.max_degree(), h, delta))
}

fn tameness_formula(n: usize, max_degree: usize, h: f64, delta: f64) -> f64 {
    let dh = delta * h;
    35.0 * max_degree as f64 / dh * (n as f64 / dh).ln() * (1.0 / delta).ln()
}

/// Exact `h(G)` for small graphs, otherwise the spectral lower bound `λ₂/2`.
fn cheeger_lower(g: &Graph) -> Result<f64> {
    if g.n() <= CHEEGER_MAX_N {
        let h = cheeger_exact(g)?;
        Ok(*h.numer() as f64 / *h.denom() as f64)
    } else {
        Ok(lambda2(g)?.value / 2.0)
    }
}

/// Instance diagnostics for the asymptotic regime.
///
/// `eps` and `gamma` are the constants of the density and expansion
/// assumptions; they are asymptotic, so the report carries the raw ratios
/// and only the convenience flag `a2_holds` uses `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub n: usize,
    pub delta_max: usize,
    pub eps: f64,
    pub gamma: f64,
    /// `Δ / n^{1/3 + ε}`.
    pub a1_margin: f64,
    pub h_exact: Option<f64>,
    pub lambda2: f64,
    /// `max(h exact, λ₂ / 2)`.
    pub h_lower: f64,
    pub gamma_est: f64,
    pub a2_holds: bool,
    /// `max_{jk} max(r_j/r_k, r_k/r_j) - 1`.
    #[serde(rename = "R")]
    pub r_stat: f64,
    /// `R² (n/Δ) log(2n/Δ)`, to be compared against `log n`.
    pub a3_stat: f64,
    pub log_n: f64,
    /// `R³ Δ^{-3/2 + ε/2} n`.
    pub err1: f64,
    /// `Δ^{-3 + ε} n`.
    pub err2: f64,
    pub b_max: f64,
    /// `b_max / (Δ^{3/2} n^{-1/2} / log(2n/Δ))`.
    pub sufficient_ratio: f64,
    pub sufficient_ok: bool,
    /// The `delta` fed to the tameness bound, when one is available.
    pub tameness_delta: Option<f64>,
    pub tameness_bound: Option<f64>,
    pub max_log_ratio: f64,
}

pub fn assumption_report(
    g: &Graph,
    b: &ImbalanceSeq,
    r: &MeritVector,
    eps: f64,
    gamma: f64,
) -> Result<AssumptionReport> {
    b.check_len(g)?;
    let n = g.n();
    let delta_max = g.max_degree();
    let dm = delta_max as f64;
    let nf = n as f64;
    let l2 = if n >= 2 { lambda2(g)?.value } else { 0.0 };
    let h_exact = if (2..=CHEEGER_MAX_N).contains(&n) {
        let h = cheeger_exact(g)?;
        Some(*h.numer() as f64 / *h.denom() as f64)
    } else {
        None
    };
    let h_lower = h_exact.unwrap_or(0.0).max(l2 / 2.0);
    let r_stat = max_edge_ratio(g, &r.r) - 1.0;
    let log_term = if delta_max > 0 { (2.0 * nf / dm).ln() } else { 0.0 };
    let b_max = b.max_abs();
    let sufficient_scale = dm.powf(1.5) / nf.sqrt() / log_term;

    let tameness_delta = if n > CHEEGER_MAX_N {
        (h_lower > 0.0).then(|| 1.0 - b_max / h_lower)
    } else {
        crate::feasibility::max_cut_load(g, b)?.map(|load| 1.0 - load)
    };
    let tameness_bound = match tameness_delta {
        Some(d) if d > 0.0 && n >= 10 && g.is_connected() => Some(tameness_formula(n, delta_max, h_lower, d.min(1.0))),
        _ => None,
    };

    Ok(AssumptionReport {
        n,
        delta_max,
        eps,
        gamma,
        a1_margin: dm / nf.powf(1.0 / 3.0 + eps),
        h_exact,
        lambda2: l2,
        h_lower,
        gamma_est: if delta_max > 0 { h_lower / dm } else { 0.0 },
        a2_holds: h_lower >= gamma * dm,
        r_stat,
        a3_stat: r_stat * r_stat * (nf / dm) * log_term,
        log_n: nf.ln(),
        err1: r_stat.powi(3) * dm.powf(-1.5 + eps / 2.0) * nf,
        err2: dm.powf(-3.0 + eps) * nf,
        b_max,
        sufficient_ratio: b_max / sufficient_scale,
        sufficient_ok: b_max <= sufficient_scale,
        tameness_delta,
        tameness_bound,
        max_log_ratio: max_log_ratio(g, &r.r),
    })
}
