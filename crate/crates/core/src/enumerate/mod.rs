//! Orientation counts: the asymptotic formula, the Eulerian closed form,
//! exact oracles and subdigraph-occurrence probabilities.

mod exact;
mod subdigraph;

pub use exact::{
    exact_count_bruteforce, exact_count_dp, exact_count_dp_with_cap, exact_count_quadrature,
    exact_count_quadrature_auto, BRUTEFORCE_MAX_EDGES, DP_STATE_CAP, QUADRATURE_MAX_N,
};
pub use subdigraph::{hamiltonian_expectation, subdigraph_probability_asymptotic, subdigraph_probability_exact};

use std::f64::consts::PI;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::correction::{correction_bundle, expvar_leading, log_spanning_tree_weight, PsiTerms};
use crate::error::{Error, Result};
use crate::feasibility::{check_feasible, FeasibilityStatus};
use crate::graph::{Graph, ImbalanceSeq};
use crate::mle::{assumption_report, lambda_matrix, solve_merits, AssumptionReport, MeritVector};

/// One direction bit per canonical edge: `true` means `j -> k` for `j < k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orientation {
    pub forward: Vec<bool>,
}

impl Orientation {
    pub fn imbalance(&self, g: &Graph) -> Vec<i64> {
        crate::graph::imbalance_of(g, |e| self.forward[e])
    }

    /// `+` for `j -> k`, `-` for `k -> j`, in canonical edge order.
    pub fn to_sign_string(&self) -> String {
        self.forward.iter().map(|&f| if f { '+' } else { '-' }).collect()
    }

    /// The orientation as directed arcs `(tail, head)`.
    pub fn arcs(&self, g: &Graph) -> Vec<(usize, usize)> {
        g.edges().iter().zip(&self.forward).map(|(&(j, k), &f)| if f { (j, k) } else { (k, j) }).collect()
    }
}

/// Natural-log factors of the asymptotic formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factors {
    /// `-((n-1)/2) log π`.
    pub log_pi_term: f64,
    pub log_p: f64,
    /// `½ log(Δ n)`.
    pub half_log_dn: f64,
    /// `½ log |A|`.
    pub half_log_det_a: f64,
    pub psi: f64,
}

impl Factors {
    pub fn log_count(&self) -> f64 {
        self.log_pi_term - self.log_p + self.half_log_dn - self.half_log_det_a + self.psi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    /// Natural log of the estimated count.
    pub log_count: f64,
    pub factors: Factors,
    /// Components of `ψ`; absent for the Eulerian closed form, which uses the
    /// leading approximation of `E f4` only.
    pub terms: Option<PsiTerms>,
    pub diagnostics: AssumptionReport,
    #[serde(serialize_with = "ser_opt_biguint")]
    pub exact: Option<BigUint>,
}

impl CountResult {
    pub fn log10_count(&self) -> f64 {
        self.log_count / std::f64::consts::LN_10
    }

    pub fn estimate(&self) -> f64 {
        self.log_count.exp()
    }

    /// `estimate / exact - 1`, when an exact count is attached and nonzero.
    pub fn relative_error(&self) -> Option<f64> {
        let exact = self.exact.as_ref()?;
        let log_exact = log_biguint(exact)?;
        Some((self.log_count - log_exact).exp_m1())
    }
}

fn ser_opt_biguint<S: Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_str(&x.to_string()),
        None => s.serialize_none(),
    }
}

/// Natural log of a positive big integer.
pub fn log_biguint(x: &BigUint) -> Option<f64> {
    if x.bits() == 0 {
        return None;
    }
    let shift = x.bits().saturating_sub(64);
    let top: BigUint = x >> shift;
    let mantissa = top.to_u64_digits().first().copied().unwrap_or(0) as f64;
    Some(mantissa.ln() + shift as f64 * std::f64::consts::LN_2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ZeroReason {
    /// Some `b_j` differs in parity from `d_j`.
    Parity {
        vertex: usize,
    },
    Infeasible,
}

/// The asymptotic count, or an exact zero when no orientation can exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(clippy::large_enum_variant)]
pub enum CountOutcome {
    Zero(ZeroReason),
    Estimate(CountResult),
}

/// `log P(G, b) = Σ_j s_j log r_j - Σ_{jk} log(r_j + r_k)`, the probability
/// of any single orientation with imbalances `b` under merits `r`.
pub fn log_p(g: &Graph, b: &ImbalanceSeq, r: &[f64]) -> Result<f64> {
    let s = b.out_degrees(g)?;
    let wins: f64 = s.iter().zip(r).map(|(&s, &x)| s as f64 * x.ln()).sum();
    let pairs: f64 = g.edges().iter().map(|&(j, k)| (r[j] + r[k]).ln()).sum();
    Ok(wins - pairs)
}

/// Asymptotic number of orientations of a connected `g` with imbalances `b`.
pub fn asymptotic_count(g: &Graph, b: &ImbalanceSeq, eps: f64, gamma: f64) -> Result<CountOutcome> {
    b.check_len(g)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    match b.out_degrees(g) {
        Err(Error::Parity { vertex }) => return Ok(CountOutcome::Zero(ZeroReason::Parity { vertex })),
        Err(Error::Infeasible) => return Ok(CountOutcome::Zero(ZeroReason::Infeasible)),
        Err(e) => return Err(e),
        Ok(_) => {}
    }
    match check_feasible(g, b)?.status {
        FeasibilityStatus::Infeasible => return Ok(CountOutcome::Zero(ZeroReason::Infeasible)),
        FeasibilityStatus::Boundary => {
            return Err(Error::Degenerate(
                "boundary-feasible imbalances: every orientation is forced across a tight cut".into(),
            ))
        }
        FeasibilityStatus::StrictlyFeasible => {}
    }
    let merits = solve_merits(g, b)?;
    Ok(CountOutcome::Estimate(count_from_merits(g, b, &merits, eps, gamma)?))
}

/// Assembles the asymptotic formula from already-solved merits.
pub fn count_from_merits(
    g: &Graph,
    b: &ImbalanceSeq,
    merits: &MeritVector,
    eps: f64,
    gamma: f64,
) -> Result<CountResult> {
    let lam = lambda_matrix(merits, g);
    let bundle = correction_bundle(g, &lam)?;
    let n = g.n() as f64;
    let factors = Factors {
        log_pi_term: -(n - 1.0) / 2.0 * PI.ln(),
        log_p: log_p(g, b, &merits.r)?,
        half_log_dn: 0.5 * (g.max_degree() as f64 * n).ln(),
        half_log_det_a: 0.5 * bundle.log_det.log_det,
        psi: bundle.terms.psi,
    };
    Ok(CountResult {
        log_count: factors.log_count(),
        factors,
        terms: Some(bundle.terms),
        diagnostics: assumption_report(g, b, merits, eps, gamma)?,
        exact: None,
    })
}

/// Eulerian orientations from the closed form
/// `2^{m+(n-1)/2} π^{-(n-1)/2} κ(G)^{-1/2} exp(-¼ Σ (1/d_j + 1/d_k)²)`.
///
/// The factors are reported in the same shape as [`asymptotic_count`], with
/// `ψ` replaced by its leading term.
pub fn eulerian_count(g: &Graph, eps: f64, gamma: f64) -> Result<CountResult> {
    if let Some(vertex) = (0..g.n()).find(|&j| g.degree(j) % 2 == 1) {
        return Err(Error::Parity { vertex });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n() as f64;
    let m = g.m() as f64;
    let ln2 = std::f64::consts::LN_2;
    let log_kappa = log_spanning_tree_weight(g, &vec![1.0; g.m()])?;
    let half_log_dn = 0.5 * (g.max_degree() as f64 * n).ln();
    // With λ ≡ ½ the edge weight is ½, so Δ n κ(G, r) = Δ n κ(G) 2^{-(n-1)}.
    let factors = Factors {
        log_pi_term: -(n - 1.0) / 2.0 * PI.ln(),
        log_p: -m * ln2,
        half_log_dn,
        half_log_det_a: half_log_dn + 0.5 * (log_kappa - (n - 1.0) * ln2),
        psi: expvar_leading(g),
    };
    let b = ImbalanceSeq::zeros(g.n());
    let merits = MeritVector { r: vec![1.0; g.n()], residual: 0.0, iterations: 0 };
    Ok(CountResult {
        log_count: factors.log_count(),
        factors,
        terms: None,
        diagnostics: assumption_report(g, &b, &merits, eps, gamma)?,
        exact: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    fn ints(v: &[i64]) -> ImbalanceSeq {
        ImbalanceSeq::from_integers(v).unwrap()
    }

    #[test]
    fn log_p_values() {
        let k3 = generate(&GraphKind::Complete, 3, 0).unwrap();
        let lp = log_p(&k3, &ImbalanceSeq::zeros(3), &[1.0; 3]).unwrap();
        assert!((lp - (1.0f64 / 8.0).ln()).abs() < 1e-15);
        let k4 = generate(&GraphKind::Complete, 4, 0).unwrap();
        let lp = log_p(&k4, &ints(&[1, 1, -1, -1]), &[3.0, 3.0, 1.0, 1.0]).unwrap();
        assert!((lp - (27.0f64 / 1024.0).ln()).abs() < 1e-14);
        assert_eq!(log_p(&k3, &ints(&[1, -1, 0]), &[1.0; 3]), Err(Error::Parity { vertex: 0 }));
    }

    #[test]
    fn triangle_count() {
        let k3 = generate(&GraphKind::Complete, 3, 0).unwrap();
        let CountOutcome::Estimate(c) = asymptotic_count(&k3, &ImbalanceSeq::zeros(3), 0.1, 0.1).unwrap() else {
            panic!("expected an estimate");
        };
        let expect = -PI.ln() + 3.0 * 2f64.ln() + 0.5 * 6f64.ln() - 0.5 * 4.5f64.ln() - 19.0 / 54.0;
        assert!((c.log_count - expect).abs() < 1e-12);
        assert!((c.estimate() - 2.068).abs() < 1e-3);
    }

    #[test]
    fn zero_counts() {
        let k3 = generate(&GraphKind::Complete, 3, 0).unwrap();
        assert_eq!(
            asymptotic_count(&k3, &ints(&[1, -1, 0]), 0.1, 0.1).unwrap(),
            CountOutcome::Zero(ZeroReason::Parity { vertex: 0 })
        );
        assert_eq!(
            asymptotic_count(&k3, &ints(&[4, -4, 0]), 0.1, 0.1).unwrap(),
            CountOutcome::Zero(ZeroReason::Infeasible)
        );
        let c4 = generate(&GraphKind::Cycle, 4, 0).unwrap();
        assert_eq!(
            asymptotic_count(&c4, &ints(&[2, 2, -2, -2]), 0.1, 0.1).unwrap(),
            CountOutcome::Zero(ZeroReason::Infeasible)
        );
        assert!(matches!(asymptotic_count(&k3, &ints(&[2, -2, 0]), 0.1, 0.1), Err(Error::Degenerate(_))));
        let split = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(asymptotic_count(&split, &ImbalanceSeq::zeros(4), 0.1, 0.1), Err(Error::Disconnected));
    }

    #[test]
    fn eulerian_triangle() {
        let k3 = generate(&GraphKind::Complete, 3, 0).unwrap();
        let c = eulerian_count(&k3, 0.1, 0.1).unwrap();
        let expect = 4.0 * 2f64.ln() - PI.ln() - 0.5 * 3f64.ln() - 0.75;
        assert!((c.log_count - expect).abs() < 1e-12);
        let k4 = generate(&GraphKind::Complete, 4, 0).unwrap();
        assert!(matches!(eulerian_count(&k4, 0.1, 0.1), Err(Error::Parity { .. })));
    }

    #[test]
    fn big_log() {
        assert_eq!(log_biguint(&BigUint::from(0u32)), None);
        assert!((log_biguint(&BigUint::from(3230080u32)).unwrap() - 3230080f64.ln()).abs() < 1e-12);
        let big = BigUint::from(7u32).pow(200);
        assert!((log_biguint(&big).unwrap() - 200.0 * 7f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn orientation_helpers() {
        let c4 = generate(&GraphKind::Cycle, 4, 0).unwrap();
        let o = Orientation { forward: vec![true, false, true, false] };
        assert_eq!(o.to_sign_string(), "+-+-");
        assert_eq!(o.imbalance(&c4).iter().sum::<i64>(), 0);
        assert_eq!(o.arcs(&c4).len(), 4);
    }
}
