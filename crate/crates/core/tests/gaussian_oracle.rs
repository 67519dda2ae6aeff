//! Direct Gaussian sampling of the cubic, quartic and sextic forms, checked
//! against the closed-form moments used by the correction term.

mod common;

use nalgebra::DVector;
use orientcount::correction::{build_matrices, edge_covariances, psi_terms, PsiTerms};
use orientcount::graph::{generate, GraphKind};
use orientcount::mle::{solve_merits, LambdaMatrix};
use orientcount::{Graph, ImbalanceSeq};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const SAMPLES: usize = 10_000_000;
const CHUNKS: usize = 200;

/// Power sums of f3, f4, f6 over one chunk of samples.
#[derive(Default, Clone, Copy)]
struct Sums {
    f3: [f64; 4],
    f4: [f64; 4],
    f6: [f64; 2],
}

impl Sums {
    fn add(mut self, o: &Sums) -> Sums {
        for i in 0..4 {
            self.f3[i] += o.f3[i];
            self.f4[i] += o.f4[i];
        }
        for i in 0..2 {
            self.f6[i] += o.f6[i];
        }
        self
    }
}

struct Estimate {
    value: f64,
    se: f64,
}

/// Mean and variance estimates with standard errors from raw power sums.
fn mean_est(s: &[f64], n: f64) -> Estimate {
    let (m1, m2) = (s[0] / n, s[1] / n);
    Estimate { value: m1, se: ((m2 - m1 * m1) / n).sqrt() }
}

fn var_est(s: &[f64; 4], n: f64) -> Estimate {
    let [m1, m2, m3, m4] = s.map(|x| x / n);
    let var = m2 - m1 * m1;
    let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
    Estimate { value: var, se: ((mu4 - var * var) / n).sqrt() }
}

fn sample_forms(g: &Graph, lam: &LambdaMatrix, seed: u64) -> (Estimate, Estimate, Estimate, Estimate) {
    let forms = build_matrices(g, lam);
    let sigma = (forms.a * 2.0).try_inverse().unwrap();
    let chol = sigma.cholesky().unwrap().l();
    let coef: Vec<(f64, f64, f64)> = (0..g.m())
        .map(|e| {
            let p = lam.product(e);
            (p * lam.difference(e), p * (1.0 - 6.0 * p), p * (1.0 - 30.0 * p + 120.0 * p * p))
        })
        .collect();
    let n = g.n();
    let per_chunk = SAMPLES / CHUNKS;
    let sums = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = common::rng(seed.wrapping_mul(7919).wrapping_add(c as u64));
            let mut s = Sums::default();
            let mut z = DVector::zeros(n);
            for _ in 0..per_chunk {
                for v in z.iter_mut() {
                    *v = rng.sample::<f64, _>(StandardNormal);
                }
                let x = &chol * &z;
                let (mut f3, mut f4, mut f6) = (0.0, 0.0, 0.0);
                for (&(j, k), &(c3, c4, c6)) in g.edges().iter().zip(&coef) {
                    let y = x[j] - x[k];
                    let y2 = y * y;
                    f3 += c3 * y2 * y;
                    f4 += c4 * y2 * y2;
                    f6 += c6 * y2 * y2 * y2;
                }
                let (f3, f4, f6) = (-4.0 / 3.0 * f3, 2.0 / 3.0 * f4, -4.0 / 45.0 * f6);
                let mut p3 = 1.0;
                let mut p4 = 1.0;
                for i in 0..4 {
                    p3 *= f3;
                    p4 *= f4;
                    s.f3[i] += p3;
                    s.f4[i] += p4;
                }
                s.f6[0] += f6;
                s.f6[1] += f6 * f6;
            }
            s
        })
        .collect::<Vec<_>>()
        .iter()
        .fold(Sums::default(), |a, b| a.add(b));
    let total = (per_chunk * CHUNKS) as f64;
    (mean_est(&sums.f4, total), mean_est(&sums.f6, total), var_est(&sums.f3, total), var_est(&sums.f4, total))
}

fn check(name: &str, g: &Graph, lam: &LambdaMatrix, seed: u64) -> PsiTerms {
    let forms = build_matrices(g, lam);
    let cov = edge_covariances(&forms.a, g).unwrap();
    let exact = psi_terms(g, lam, &cov);
    let (ef4, ef6, vf3, vf4) = sample_forms(g, lam, seed);
    for (label, closed, mc) in
        [("Ef4", exact.ef4, ef4), ("Ef6", exact.ef6, ef6), ("Vf3", exact.vf3, vf3), ("Vf4", exact.vf4, vf4)]
    {
        let z = (closed - mc.value) / mc.se.max(1e-300);
        assert!(
            z.abs() <= 3.0 || (closed == 0.0 && mc.value.abs() < 1e-12),
            "{name} {label}: closed form {closed}, Monte Carlo {} ± {}",
            mc.value,
            mc.se
        );
    }
    exact
}

fn uniform(g: &Graph) -> LambdaMatrix {
    LambdaMatrix::from_merits(g, &vec![1.0; g.n()])
}

#[test]
fn triangle() {
    let g = generate(&GraphKind::Complete, 3, 0).unwrap();
    let t = check("K3", &g, &uniform(&g), 1);
    assert!((t.psi + 19.0 / 54.0).abs() < 1e-12);
}

#[test]
fn k4_balanced() {
    let g = generate(&GraphKind::Complete, 4, 0).unwrap();
    let lam = uniform(&g);
    let t = check("K4", &g, &lam, 2);
    let (ef4, ef6, _, _) = sample_forms(&g, &lam, 3);
    assert!((ef4.value + 3.0 / 8.0).abs() < 1e-3 && (t.ef4 + 3.0 / 8.0).abs() < 1e-12);
    assert!((ef6.value + 0.25).abs() < 1e-3 && (t.ef6 + 0.25).abs() < 1e-12);
}

#[test]
fn k4_unbalanced() {
    let g = generate(&GraphKind::Complete, 4, 0).unwrap();
    let b = ImbalanceSeq::from_integers(&[1, 1, -1, -1]).unwrap();
    let lam = LambdaMatrix::from_merits(&g, &solve_merits(&g, &b).unwrap().r);
    let t = check("K4 (1,1,-1,-1)", &g, &lam, 4);
    assert!(t.vf3 > 0.0);
}

#[test]
fn k5_unbalanced() {
    let g = generate(&GraphKind::Complete, 5, 0).unwrap();
    let b = ImbalanceSeq::from_integers(&[2, 0, 0, 0, -2]).unwrap();
    let lam = LambdaMatrix::from_merits(&g, &solve_merits(&g, &b).unwrap().r);
    check("K5 (2,0,0,0,-2)", &g, &lam, 5);
}

#[test]
fn sparse_six_vertices() {
    let g = common::random_connected(6, 0.5, 17);
    let r = [0.5, 1.0, 2.0, 1.5, 0.8, 3.0];
    check("G(6, 1/2)", &g, &LambdaMatrix::from_merits(&g, &r), 6);
}
