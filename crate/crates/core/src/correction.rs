//! Quadratic forms, determinants and the Gaussian correction exponent.
//!
//! `X` is the centred Gaussian on `R^n` with density proportional to
//! `exp(-xᵀAx)`, so `Cov X = Σ = (2A)⁻¹`. For a canonical edge `e = (j, k)`
//! put `Y_e = X_j - X_k` and write `v_e = Var Y_e`, `w = Cov(Y_e, Y_e')`.
//! With `c3 = λλ'(λ - λ')`, `c4 = λλ'(1 - 6λλ')` and
//! `c6 = λλ'(1 - 30λλ' + 120(λλ')²)` per edge, the polynomials are
//! `f3 = -4/3 Σ c3 Y³`, `f4 = 2/3 Σ c4 Y⁴`, `f6 = -4/45 Σ c6 Y⁶`, and
//! `ψ = E f4 + E f6 - ½ Var f3 + ½ Var f4`, evaluated in closed form with
//! Isserlis' theorem.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mle::LambdaMatrix;

/// Relative tolerance for the determinant cross-check.
pub const MATRIX_TREE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForms {
    /// Laplacian with edge weights `2 λ_jk λ_kj`.
    pub l: DMatrix<f64>,
    /// `(Δ/n) J + L`.
    pub a: DMatrix<f64>,
}

pub fn edge_weights(g: &Graph, lam: &LambdaMatrix) -> Vec<f64> {
    (0..g.m()).map(|e| 2.0 * lam.product(e)).collect()
}

pub fn build_matrices(g: &Graph, lam: &LambdaMatrix) -> QuadraticForms {
    let n = g.n();
    let l = g.weighted_laplacian(&edge_weights(g, lam));
    let a = DMatrix::from_element(n, n, g.max_degree() as f64 / n as f64) + &l;
    QuadraticForms { l, a }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogDet {
    /// `log |A|` from a Cholesky factorisation of `A`.
    pub log_det: f64,
    /// `log(Δ n κ(G, r))` with `κ` a cofactor of the weighted Laplacian.
    pub log_matrix_tree: f64,
}

fn cholesky_log_det(m: DMatrix<f64>) -> Result<f64> {
    let chol = m.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// `log κ(G, w)`: log of the weighted spanning-tree sum, as the determinant
/// of the Laplacian with the first row and column removed.
pub fn log_spanning_tree_weight(g: &Graph, weights: &[f64]) -> Result<f64> {
    let n = g.n();
    if n == 1 {
        return Ok(0.0);
    }
    let minor = g.weighted_laplacian(weights).view((1, 1), (n - 1, n - 1)).into_owned();
    cholesky_log_det(minor).map_err(|_| Error::Disconnected)
}

/// `log |A|`, cross-checked against the weighted Matrix-Tree identity
/// `|A| = Δ n κ(G, r)`.
pub fn log_det_a(a: &DMatrix<f64>, g: &Graph, lam: &LambdaMatrix) -> Result<LogDet> {
    let log_det = cholesky_log_det(a.clone())?;
    let log_kappa = log_spanning_tree_weight(g, &edge_weights(g, lam))?;
    let log_matrix_tree = (g.max_degree() as f64 * g.n() as f64).ln() + log_kappa;
    if (log_det - log_matrix_tree).abs() > MATRIX_TREE_TOL {
        return Err(Error::Inconsistent(format!("log|A| = {log_det} but log(Δnκ) = {log_matrix_tree}")));
    }
    Ok(LogDet { log_det, log_matrix_tree })
}

/// Covariances of the edge differences `Y_e = X_j - X_k`, `j < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCovariance {
    /// `Σ = (2A)⁻¹`.
    pub sigma: DMatrix<f64>,
    /// `v_e = Var Y_e` per canonical edge.
    pub var: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

impl EdgeCovariance {
    /// `Cov(Y_e, Y_f) = σ_jj' + σ_kk' - σ_jk' - σ_kj'`.
    pub fn cov(&self, e: usize, f: usize) -> f64 {
        let (j, k) = self.edges[e];
        let (jp, kp) = self.edges[f];
        let s = &self.sigma;
        s[(j, jp)] + s[(k, kp)] - s[(j, kp)] - s[(k, jp)]
    }
}

pub fn edge_covariances(a: &DMatrix<f64>, g: &Graph) -> Result<EdgeCovariance> {
    let chol = (a * 2.0).cholesky().ok_or(Error::NotPositiveDefinite)?;
    let sigma = chol.inverse();
    let edges = g.edges().to_vec();
    let var = edges.iter().map(|&(j, k)| sigma[(j, j)] + sigma[(k, k)] - 2.0 * sigma[(j, k)]).collect();
    Ok(EdgeCovariance { sigma, var, edges })
}

/// Number of perfect matchings of `m` items: `(m-1)!!` for even `m`, else 0.
pub fn pairings(m: u32) -> f64 {
    if m % 2 == 1 {
        0.0
    } else {
        (1..m).step_by(2).map(f64::from).product()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `E Z^s` for `Z ~ N(0, variance)`.
pub fn isserlis_moment(s: u32, variance: f64) -> f64 {
    if s % 2 == 1 {
        return 0.0;
    }
    pairings(s) * variance.powi(s as i32 / 2)
}

/// `Cov(Z1^s, Z2^t)` for a centred Gaussian pair with variances `v1`, `v2`
/// and covariance `w`.
pub fn isserlis_cov(s: u32, t: u32, v1: f64, v2: f64, w: f64) -> f64 {
    let mut total = 0.0;
    let mut u_fact = 1.0;
    for u in 1..=s.min(t) {
        u_fact *= f64::from(u);
        let (ps, pt) = (pairings(s - u), pairings(t - u));
        if ps == 0.0 || pt == 0.0 {
            continue;
        }
        total += binomial(s, u)
            * binomial(t, u)
            * u_fact
            * ps
            * pt
            * v1.powi(((s - u) / 2) as i32)
            * v2.powi(((t - u) / 2) as i32)
            * w.powi(u as i32);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiTerms {
    pub ef4: f64,
    pub ef6: f64,
    pub vf3: f64,
    pub vf4: f64,
    pub psi: f64,
}

/// Per-edge coefficients `(c3, c4, c6)`.
fn coefficients(lam: &LambdaMatrix, e: usize) -> (f64, f64, f64) {
    let p = lam.product(e);
    (p * lam.difference(e), p * (1.0 - 6.0 * p), p * (1.0 - 30.0 * p + 120.0 * p * p))
}

pub fn psi_terms(g: &Graph, lam: &LambdaMatrix, cov: &EdgeCovariance) -> PsiTerms {
    psi_terms_oriented(g, lam, cov, &vec![false; g.m()])
}

/// [`psi_terms`] with edge `e` read as `k -> j` wherever `flipped[e]`.
///
/// The result does not depend on the orientation; this entry point exists
/// so that can be checked.
pub fn psi_terms_oriented(g: &Graph, lam: &LambdaMatrix, cov: &EdgeCovariance, flipped: &[bool]) -> PsiTerms {
    let m = g.m();
    assert_eq!(flipped.len(), m);
    let sign: Vec<f64> = flipped.iter().map(|&f| if f { -1.0 } else { 1.0 }).collect();
    let coef: Vec<(f64, f64, f64)> = (0..m)
        .map(|e| {
            let (c3, c4, c6) = coefficients(lam, e);
            (c3 * sign[e], c4, c6)
        })
        .collect();

    let ef4 = 2.0 / 3.0 * (0..m).map(|e| coef[e].1 * isserlis_moment(4, cov.var[e])).sum::<f64>();
    let ef6 = -4.0 / 45.0 * (0..m).map(|e| coef[e].2 * isserlis_moment(6, cov.var[e])).sum::<f64>();

    let any_c3 = coef.iter().any(|c| c.0 != 0.0);
    // Row sums in parallel, then a fixed-order reduction.
    let rows: Vec<(f64, f64)> = (0..m)
        .into_par_iter()
        .map(|e| {
            let (mut s3, mut s4) = (0.0, 0.0);
            for f in 0..m {
                let w = cov.cov(e, f) * sign[e] * sign[f];
                let (v1, v2) = (cov.var[e], cov.var[f]);
                if any_c3 {
                    s3 += coef[e].0 * coef[f].0 * isserlis_cov(3, 3, v1, v2, w);
                }
                s4 += coef[e].1 * coef[f].1 * isserlis_cov(4, 4, v1, v2, w);
            }
            (s3, s4)
        })
        .collect();
    let vf3 = 16.0 / 9.0 * rows.iter().map(|r| r.0).sum::<f64>();
    let vf4 = 4.0 / 9.0 * rows.iter().map(|r| r.1).sum::<f64>();
    PsiTerms { ef4, ef6, vf3, vf4, psi: ef4 + ef6 - 0.5 * vf3 + 0.5 * vf4 }
}

/// Leading approximation of `E f4`: `-¼ Σ_{jk} (1/d_j + 1/d_k)²`.
pub fn expvar_leading(g: &Graph) -> f64 {
    -0.25 * g.edges().iter().map(|&(j, k)| (1.0 / g.degree(j) as f64 + 1.0 / g.degree(k) as f64).powi(2)).sum::<f64>()
}

/// Everything the asymptotic formula needs beyond `P(G, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionBundle {
    pub l: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub log_det: LogDet,
    pub covariance: EdgeCovariance,
    pub terms: PsiTerms,
}

pub fn correction_bundle(g: &Graph, lam: &LambdaMatrix) -> Result<CorrectionBundle> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let QuadraticForms { l, a } = build_matrices(g, lam);
    let log_det = log_det_a(&a, g, lam)?;
    let covariance = edge_covariances(&a, g)?;
    let terms = psi_terms(g, lam, &covariance);
    Ok(CorrectionBundle { l, a, log_det, covariance, terms })
}

/// Maximum absolute row sum of `A⁻¹`.
pub fn inverse_inf_norm(a: &DMatrix<f64>) -> Result<f64> {
    let inv = a.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.inverse();
    Ok(inv.row_iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max))
}

/// Bound `1/c + 18Δ/(ℓ_min h²) · log(n/h)` on `‖A⁻¹‖∞` for `A = (c/n)J + L`,
/// here with `c = Δ` and `ℓ_min` the smallest edge weight `2λλ'`.
pub fn inverse_norm_bound(g: &Graph, lam: &LambdaMatrix, h: f64) -> f64 {
    let delta = g.max_degree() as f64;
    let ell_min = edge_weights(g, lam).into_iter().fold(f64::INFINITY, f64::min);
    1.0 / delta + 18.0 * delta / (ell_min * h * h) * (g.n() as f64 / h).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    fn uniform(g: &Graph) -> LambdaMatrix {
        LambdaMatrix::from_merits(g, &vec![1.0; g.n()])
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn k4_matrices() {
        let g = generate(&GraphKind::Complete, 4, 0).unwrap();
        let QuadraticForms { l, a } = build_matrices(&g, &uniform(&g));
        for i in 0..4 {
            for j in 0..4 {
                let id = if i == j { 1.0 } else { 0.0 };
                close(l[(i, j)], 2.0 * id - 0.5, 1e-15);
                close(a[(i, j)], 2.0 * id + 0.25, 1e-15);
            }
        }
    }

    #[test]
    fn k3_matrix_a() {
        let g = generate(&GraphKind::Complete, 3, 0).unwrap();
        let a = build_matrices(&g, &uniform(&g)).a;
        for i in 0..3 {
            for j in 0..3 {
                close(a[(i, j)], if i == j { 1.5 } else { 0.0 } + 1.0 / 6.0, 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_quadratic_form() {
        let g = generate(&GraphKind::Gnp(0.5), 8, 3).unwrap();
        let r: Vec<f64> = (0..8).map(|i| 1.0 + 0.3 * i as f64).collect();
        let lam = LambdaMatrix::from_merits(&g, &r);
        let l = build_matrices(&g, &lam).l;
        let x = nalgebra::DVector::from_iterator(8, (0..8).map(|i| (i as f64 * 1.7).sin()));
        let lhs = (x.transpose() * &l * &x)[(0, 0)];
        let rhs: f64 =
            g.edges().iter().enumerate().map(|(e, &(j, k))| 2.0 * lam.product(e) * (x[j] - x[k]).powi(2)).sum();
        close(lhs, rhs, 1e-12);
        for i in 0..8 {
            close(l.row(i).sum(), 0.0, 1e-15);
        }
    }

    #[test]
    fn determinants() {
        for (kind, n, det) in
            [(GraphKind::Complete, 4, 24.0), (GraphKind::Complete, 3, 4.5), (GraphKind::Cycle, 4, 4.0)]
        {
            let g = generate(&kind, n, 0).unwrap();
            let lam = uniform(&g);
            let ld = log_det_a(&build_matrices(&g, &lam).a, &g, &lam).unwrap();
            close(ld.log_det.exp(), det, 1e-12);
            close(ld.log_matrix_tree.exp(), det, 1e-12);
        }
    }

    #[test]
    fn disconnected_a_is_singular() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let lam = uniform(&g);
        let a = build_matrices(&g, &lam).a;
        assert!(matches!(log_det_a(&a, &g, &lam), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn k4_covariances() {
        let g = generate(&GraphKind::Complete, 4, 0).unwrap();
        let cov = edge_covariances(&build_matrices(&g, &uniform(&g)).a, &g).unwrap();
        close(cov.sigma[(0, 0)], 11.0 / 48.0, 1e-15);
        close(cov.sigma[(0, 1)], -1.0 / 48.0, 1e-15);
        assert!(cov.var.iter().all(|&v| (v - 0.5).abs() < 1e-15));
        let e12 = g.edge_index(0, 1).unwrap();
        let e34 = g.edge_index(2, 3).unwrap();
        close(cov.cov(e12, e34), 0.0, 1e-15);
    }

    #[test]
    fn k3_covariances() {
        let g = generate(&GraphKind::Complete, 3, 0).unwrap();
        let cov = edge_covariances(&build_matrices(&g, &uniform(&g)).a, &g).unwrap();
        assert!(cov.var.iter().all(|&v| (v - 2.0 / 3.0).abs() < 1e-15));
        for e in 0..3 {
            for f in 0..3 {
                if e != f {
                    close(cov.cov(e, f).abs(), 1.0 / 3.0, 1e-15);
                }
            }
        }
    }

    #[test]
    fn isserlis_values() {
        close(isserlis_moment(4, 1.7), 3.0 * 1.7 * 1.7, 1e-14);
        close(isserlis_moment(6, 0.5), 15.0 * 0.125, 1e-15);
        assert_eq!(isserlis_moment(3, 2.0), 0.0);
        assert_eq!(isserlis_moment(0, 2.0), 1.0);
        let (v1, v2, w) = (0.7, 1.3, 0.4);
        close(isserlis_cov(3, 3, v1, v2, w), 9.0 * v1 * v2 * w + 6.0 * w.powi(3), 1e-14);
        close(isserlis_cov(4, 4, v1, v2, w), 72.0 * v1 * v2 * w * w + 24.0 * w.powi(4), 1e-13);
        // Same variable: Var Z^3 = 15 v^3.
        close(isserlis_cov(3, 3, 0.9, 0.9, 0.9), 15.0 * 0.9f64.powi(3), 1e-13);
        // Var Z^2 = 2 v^2 and Cov(Z, Z^2) = 0.
        close(isserlis_cov(2, 2, 1.5, 1.5, 1.5), 2.0 * 2.25, 1e-14);
        assert_eq!(isserlis_cov(1, 2, 1.0, 1.0, 0.5), 0.0);
        assert_eq!(isserlis_cov(0, 4, 1.0, 1.0, 0.5), 0.0);
    }

    #[test]
    fn k4_psi_components() {
        let g = generate(&GraphKind::Complete, 4, 0).unwrap();
        let t = correction_bundle(&g, &uniform(&g)).unwrap().terms;
        close(t.ef4, -3.0 / 8.0, 1e-14);
        close(t.ef6, -1.0 / 4.0, 1e-14);
        assert_eq!(t.vf3, 0.0);
    }

    #[test]
    fn k3_psi_components() {
        let g = generate(&GraphKind::Complete, 3, 0).unwrap();
        let t = correction_bundle(&g, &uniform(&g)).unwrap().terms;
        close(t.ef4, -1.0 / 3.0, 1e-14);
        close(t.ef6, -8.0 / 27.0, 1e-14);
        close(t.vf4, 5.0 / 9.0, 1e-14);
        close(t.psi, -19.0 / 54.0, 1e-14);
    }

    #[test]
    fn leading_term() {
        let k4 = generate(&GraphKind::Complete, 4, 0).unwrap();
        close(expvar_leading(&k4), -2.0 / 3.0, 1e-15);
        let k9 = generate(&GraphKind::Complete, 9, 0).unwrap();
        close(expvar_leading(&k9), -9.0 / 16.0, 1e-15);
        let c = generate(&GraphKind::Circulant(vec![1, 2]), 12, 0).unwrap();
        close(expvar_leading(&c), -(c.m() as f64) / 16.0, 1e-14);
    }

    #[test]
    fn flipping_edges_leaves_psi_unchanged() {
        let g = generate(&GraphKind::Complete, 5, 0).unwrap();
        let r = [2.0, 1.5, 1.0, 0.8, 0.5];
        let lam = LambdaMatrix::from_merits(&g, &r);
        let b = correction_bundle(&g, &lam).unwrap();
        let flips: Vec<bool> = (0..g.m()).map(|e| e % 3 == 1).collect();
        let t = psi_terms_oriented(&g, &lam, &b.covariance, &flips);
        for (x, y) in [(t.ef4, b.terms.ef4), (t.ef6, b.terms.ef6), (t.vf3, b.terms.vf3), (t.vf4, b.terms.vf4)] {
            close(x, y, 1e-14);
        }
        assert!(b.terms.vf3 > 0.0);
    }
}
