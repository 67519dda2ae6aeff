//! Runs every cheap internal consistency check that applies to one instance.

use serde::Serialize;

use crate::correction::{correction_bundle, expvar_leading, inverse_inf_norm, inverse_norm_bound};
use crate::enumerate::{
    asymptotic_count, eulerian_count, exact_count_bruteforce, exact_count_dp, exact_count_quadrature_auto,
    CountOutcome, QUADRATURE_MAX_N,
};
use crate::error::Result;
use crate::feasibility::{check_feasible, fractional_orientation, FeasibilityStatus};
use crate::graph::{cheeger_exact, lambda2, Graph, ImbalanceSeq, CHEEGER_MAX_N};
use crate::mle::{lambda_matrix, solve_merits_with, tameness_bound, SolverOptions};
use crate::sampler::{merits_from_lambda, verify_conditional_uniformity, UNIFORMITY_MAX_EDGES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub eps: f64,
    pub gamma: f64,
    pub tol: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { eps: 0.1, gamma: 0.1, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub status: FeasibilityStatus,
    pub checks: Vec<Check>,
    pub passed: bool,
}

struct Suite(Vec<Check>);

impl Suite {
    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.0.push(Check { name, passed, detail });
    }

    /// Records a check whose computation may itself fail.
    fn try_push(&mut self, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) {
        match f() {
            Ok((passed, detail)) => self.push(name, passed, detail),
            Err(e) => self.push(name, false, format!("{}: {e}", e.kind())),
        }
    }
}

const BRUTE_MAX_EDGES: usize = 20;
const DP_MAX_EDGES: usize = 60;

pub fn validate_instance(g: &Graph, b: &ImbalanceSeq, opts: &ValidateOptions) -> Result<ValidationReport> {
    b.check_len(g)?;
    let verdict = check_feasible(g, b)?;
    let mut suite = Suite(Vec::new());

    if verdict.status != FeasibilityStatus::Infeasible {
        suite.try_push("fractional_orientation", || {
            let net = fractional_orientation(g, b)?.net_imbalance(g);
            let worst = net
                .iter()
                .zip(b.values())
                .map(|(x, &y)| (*x.numer() as f64 / *x.denom() as f64 - y).abs())
                .fold(0.0, f64::max);
            Ok((worst <= 1e-9, format!("max |net - b| = {worst:e}")))
        });
    }

    if g.m() <= DP_MAX_EDGES {
        suite.try_push("oracle_agreement", || {
            let dp = exact_count_dp(g, b)?;
            let mut detail = format!("dp = {dp}");
            let mut ok = true;
            if g.m() <= BRUTE_MAX_EDGES {
                let brute = exact_count_bruteforce(g, b)?;
                ok &= brute == dp;
                detail += &format!(", brute = {brute}");
            }
            if g.n() <= QUADRATURE_MAX_N {
                let (q, _) = exact_count_quadrature_auto(g, b)?;
                let d: f64 = dp.to_string().parse().unwrap_or(f64::INFINITY);
                let rel = if d == 0.0 { q.abs() } else { (q / d - 1.0).abs() };
                ok &= rel <= 1e-6;
                detail += &format!(", quadrature = {q} (rel {rel:e})");
            }
            Ok((ok, detail))
        });
    }

    if verdict.status == FeasibilityStatus::StrictlyFeasible {
        let solver = SolverOptions { tol: opts.tol, ..SolverOptions::default() };
        match solve_merits_with(g, b, &solver) {
            Err(e) => suite.push("solver", false, format!("{}: {e}", e.kind())),
            Ok(merits) => {
                suite.push(
                    "solver",
                    merits.residual <= opts.tol,
                    format!("residual {:e} after {} sweeps", merits.residual, merits.iterations),
                );
                let lam = lambda_matrix(&merits, g);
                let expected = lam.expected_imbalance(g);
                let worst = expected.iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                suite.push("expected_imbalance", worst <= opts.tol * 10.0, format!("max |E b - b| = {worst:e}"));

                suite.try_push("merit_round_trip", || {
                    let fit = merits_from_lambda(g, &lam)?;
                    let (r, fr) = (&merits.r, &fit.r);
                    let ratio_err = g
                        .component_vertices()
                        .iter()
                        .flat_map(|comp| {
                            let base = (r[comp[0]] / fr[comp[0]]).ln();
                            comp.iter().map(move |&v| ((r[v] / fr[v]).ln() - base).abs())
                        })
                        .fold(0.0, f64::max);
                    Ok((ratio_err <= 1e-10 && fit.is_merit_form(), format!("max log-ratio error {ratio_err:e}")))
                });

                if g.m() <= UNIFORMITY_MAX_EDGES {
                    suite.try_push("conditional_uniformity", || {
                        let rep = verify_conditional_uniformity(g, &lam)?;
                        Ok((rep.passed, format!("{} groups, spread {:e}", rep.groups, rep.max_group_spread)))
                    });
                }

                if g.is_connected() && g.n() >= 2 {
                    suite.try_push("matrix_tree", || {
                        let bundle = correction_bundle(g, &lam)?;
                        let ld = bundle.log_det;
                        Ok((true, format!("log|A| = {}, log(Δnκ) = {}", ld.log_det, ld.log_matrix_tree)))
                    });
                    suite.try_push("formula_reassembly", || match asymptotic_count(g, b, opts.eps, opts.gamma)? {
                        CountOutcome::Estimate(c) => {
                            let gap = (c.log_count - c.factors.log_count()).abs();
                            Ok((gap <= 1e-12, format!("log count {}", c.log_count)))
                        }
                        CountOutcome::Zero(z) => Ok((false, format!("unexpected zero: {z:?}"))),
                    });
                    if b.is_zero() && g.degrees().iter().all(|d| d % 2 == 0) {
                        suite.try_push("eulerian_consistency", || {
                            let CountOutcome::Estimate(full) = asymptotic_count(g, b, opts.eps, opts.gamma)? else {
                                return Ok((false, "unexpected zero".into()));
                            };
                            let eul = eulerian_count(g, opts.eps, opts.gamma)?;
                            let t = full.terms.expect("full formula carries its terms");
                            let budget = t.ef6.abs() + 0.5 * t.vf4 + (t.ef4 - expvar_leading(g)).abs() + 1e-9;
                            let gap = (full.log_count - eul.log_count).abs();
                            Ok((gap <= budget, format!("gap {gap:e}, budget {budget:e}")))
                        });
                    }
                    if g.n() >= 10 && g.n() <= CHEEGER_MAX_N {
                        suite.try_push("tameness_bound", || {
                            let report = crate::mle::assumption_report(g, b, &merits, opts.eps, opts.gamma)?;
                            let Some(delta) = report.tameness_delta.filter(|&x| x > 0.0) else {
                                return Ok((true, "no positive slack; bound not applicable".into()));
                            };
                            let bound = tameness_bound(g, b, delta.min(1.0))?;
                            Ok((report.max_log_ratio <= bound, format!("{} <= {bound}", report.max_log_ratio)))
                        });
                        suite.try_push("inverse_norm_bound", || {
                            let h = cheeger_exact(g)?;
                            let h = *h.numer() as f64 / *h.denom() as f64;
                            let bundle = correction_bundle(g, &lam)?;
                            let norm = inverse_inf_norm(&bundle.a)?;
                            let bound = inverse_norm_bound(g, &lam, h);
                            Ok((norm <= bound, format!("{norm} <= {bound}")))
                        });
                    }
                }
            }
        }
    }

    if (2..=CHEEGER_MAX_N).contains(&g.n()) {
        suite.try_push("cheeger_sandwich", || {
            let h = cheeger_exact(g)?;
            let h = *h.numer() as f64 / *h.denom() as f64;
            let l2 = lambda2(g)?.value;
            let upper = (l2 * (2.0 * g.max_degree() as f64 - l2)).max(0.0).sqrt();
            // The upper half is false for K2 and K3 and only claimed for n >= 4.
            let ok = l2 / 2.0 <= h + 1e-9 && (g.n() < 4 || h <= upper + 1e-9);
            Ok((ok, format!("{} <= {h} <= {upper}", l2 / 2.0)))
        });
    }

    let passed = suite.0.iter().all(|c| c.passed);
    Ok(ValidationReport { status: verdict.status, checks: suite.0, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    #[test]
    fn suite_passes_on_small_instances() {
        let k4 = generate(&GraphKind::Complete, 4, 0).unwrap();
        let b = ImbalanceSeq::from_integers(&[1, 1, -1, -1]).unwrap();
        let rep = validate_instance(&k4, &b, &ValidateOptions::default()).unwrap();
        assert!(rep.passed, "{rep:#?}");
        assert!(rep.checks.iter().any(|c| c.name == "conditional_uniformity"));

        let g = generate(&GraphKind::Circulant(vec![1, 2]), 10, 0).unwrap();
        let rep = validate_instance(&g, &ImbalanceSeq::zeros(10), &ValidateOptions::default()).unwrap();
        assert!(rep.passed, "{rep:#?}");
        assert!(rep.checks.iter().any(|c| c.name == "eulerian_consistency"));
        assert!(rep.checks.iter().any(|c| c.name == "inverse_norm_bound"));
    }

    #[test]
    fn boundary_instance_skips_solver() {
        let k3 = generate(&GraphKind::Complete, 3, 0).unwrap();
        let b = ImbalanceSeq::from_integers(&[2, -2, 0]).unwrap();
        let rep = validate_instance(&k3, &b, &ValidateOptions::default()).unwrap();
        assert_eq!(rep.status, FeasibilityStatus::Boundary);
        assert!(rep.passed, "{rep:#?}");
        assert!(rep.checks.iter().all(|c| c.name != "solver"));
    }
}
