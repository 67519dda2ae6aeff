use num_bigint::BigUint;
use orientcount::enumerate::{
    asymptotic_count, eulerian_count, exact_count_bruteforce, exact_count_dp, exact_count_quadrature_auto,
    hamiltonian_expectation, log_biguint, subdigraph_probability_asymptotic, subdigraph_probability_exact,
    CountOutcome, CountResult, ZeroReason, BRUTEFORCE_MAX_EDGES, DP_STATE_CAP, QUADRATURE_MAX_N,
};
use orientcount::feasibility::{check_feasible, FeasibilityVerdict};
use orientcount::graph::write_edge_list;
use orientcount::mle::{assumption_report, solve_merits_with, LambdaMatrix, SolverOptions};
use orientcount::sampler::{sample_orientations, OrientationModel};
use orientcount::validate::{validate_instance, ValidateOptions};
use orientcount::{Error, Graph, ImbalanceSeq};
use serde_json::{json, Value};

use crate::input::{read_arcs, read_graph, read_imbalance};
use crate::{Command, Common, Oracle, Output};

type Res<T> = Result<T, Error>;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports always serialize")
}

fn one_indexed(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

fn edges_json(g: &Graph) -> Vec<[usize; 2]> {
    g.edges().iter().map(|&(j, k)| [j + 1, k + 1]).collect()
}

fn graph_json(g: &Graph) -> Value {
    json!({ "n": g.n(), "m": g.m() })
}

fn log(common: &Common, msg: impl FnOnce() -> String) {
    if common.verbose {
        eprintln!("orientcount: {}", msg());
    }
}

fn check_tol(common: &Common) -> Res<()> {
    if common.tol.is_finite() && common.tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("--tol must be positive, got {}", common.tol)))
    }
}

fn load(common: &Common) -> Res<(Graph, ImbalanceSeq)> {
    check_tol(common)?;
    let g = read_graph(&common.graph)?;
    let b = read_imbalance(common.imbalance.as_deref(), &g)?;
    log(common, || format!("graph n={} m={}", g.n(), g.m()));
    Ok((g, b))
}

pub fn run(command: &Command) -> Res<(Output, u8)> {
    let ok = |v: Value| Ok((Output::Json(v), 0));
    match command {
        Command::Check(c) => {
            let (g, b) = load(c)?;
            ok(verdict_json(&check_feasible(&g, &b)?))
        }
        Command::Solve { common, newton } => {
            let (g, b) = load(common)?;
            let opts = SolverOptions { tol: common.tol, newton_polish: *newton, ..SolverOptions::default() };
            let merits = solve_merits_with(&g, &b, &opts)?;
            log(common, || format!("solver finished after {} sweeps", merits.iterations));
            let report = assumption_report(&g, &b, &merits, common.eps, common.gamma)?;
            ok(json!({
                "graph": graph_json(&g),
                "r": merits.r,
                "residual": merits.residual,
                "iterations": merits.iterations,
                "diagnostics": to_value(&report),
            }))
        }
        Command::Count(c) => {
            let (g, b) = load(c)?;
            let outcome = asymptotic_count(&g, &b, c.eps, c.gamma)?;
            let (oracle, exact) = run_oracle(c, &g, &b, true)?;
            ok(count_json(&g, &outcome, oracle, exact))
        }
        Command::Exact(c) => {
            let (g, b) = load(c)?;
            let oracle = if c.oracle == Oracle::None { Oracle::Auto } else { c.oracle };
            let c = Common { oracle, ..c.clone() };
            let (used, exact) = run_oracle(&c, &g, &b, false)?;
            let exact = exact.expect("a forced oracle always yields a count");
            ok(json!({
                "graph": graph_json(&g),
                "oracle": used,
                "count": exact.to_string(),
                "log10_count": log_biguint(&exact).map(|x| x / std::f64::consts::LN_10),
            }))
        }
        Command::Eulerian { common, hamiltonian_cycles } => {
            check_tol(common)?;
            let g = read_graph(&common.graph)?;
            let b = ImbalanceSeq::zeros(g.n());
            let result = eulerian_count(&g, common.eps, common.gamma)?;
            let (oracle, exact) = run_oracle(common, &g, &b, true)?;
            let mut v = count_json(&g, &CountOutcome::Estimate(result), oracle, exact);
            if let Some(nh) = hamiltonian_cycles {
                let nh: BigUint =
                    nh.parse().map_err(|_| Error::Precondition(format!("{nh:?} is not a nonnegative integer")))?;
                v["hamiltonian_expectation"] = json!(hamiltonian_expectation(&g, &nh)?);
            }
            ok(v)
        }
        Command::SubgraphProb { common, arcs } => {
            let (g, b) = load(common)?;
            let arcs = read_arcs(arcs, &g)?;
            let exact = match common.oracle {
                Oracle::None => None,
                _ => Some(subdigraph_probability_exact(&g, &arcs, &b)?),
            };
            let even = g.degrees().iter().all(|d| d % 2 == 0);
            // The leading-order form only covers H that leaves every vertex
            // some edges outside H; otherwise it is reported as null.
            let asymptotic = match (b.is_zero() && even).then(|| subdigraph_probability_asymptotic(&g, &arcs, &b)) {
                Some(Err(Error::Precondition(why))) => {
                    log(common, || format!("no asymptotic value: {why}"));
                    None
                }
                other => other.transpose()?,
            };
            let exact_json = exact.as_ref().map(|p| {
                let value = ratio_to_f64(p.numer(), p.denom());
                json!({ "numer": p.numer().to_string(), "denom": p.denom().to_string(), "value": value })
            });
            let rel = match (&exact, asymptotic) {
                (Some(p), Some(a)) => Some(a / ratio_to_f64(p.numer(), p.denom()) - 1.0),
                _ => None,
            };
            ok(json!({
                "graph": graph_json(&g),
                "arcs": arcs.iter().map(|&(u, v)| [u + 1, v + 1]).collect::<Vec<_>>(),
                "exact": exact_json,
                "asymptotic": asymptotic,
                "relative_error": rel,
            }))
        }
        Command::Sample { common, count } => {
            let (g, b) = load(common)?;
            let lam = if b.is_zero() {
                LambdaMatrix::from_merits(&g, &vec![1.0; g.n()])
            } else {
                let opts = SolverOptions { tol: common.tol, ..SolverOptions::default() };
                LambdaMatrix::from_merits(&g, &solve_merits_with(&g, &b, &opts)?.r)
            };
            let model = OrientationModel::new(lam, common.seed)?;
            let samples = sample_orientations(&model, &g, *count);
            let mut mean = vec![0.0; g.n()];
            for s in &samples {
                for (m, x) in mean.iter_mut().zip(s.imbalance(&g)) {
                    *m += x as f64;
                }
            }
            if *count > 0 {
                mean.iter_mut().for_each(|m| *m /= *count as f64);
            }
            ok(json!({
                "graph": graph_json(&g),
                "seed": common.seed,
                "edges": edges_json(&g),
                "samples": samples.iter().map(|s| s.to_sign_string()).collect::<Vec<_>>(),
                "mean_imbalance": mean,
            }))
        }
        Command::Validate(c) => {
            let (g, b) = load(c)?;
            let opts = ValidateOptions { eps: c.eps, gamma: c.gamma, tol: c.tol };
            let report = validate_instance(&g, &b, &opts)?;
            for check in report.checks.iter().filter(|ch| !ch.passed) {
                eprintln!("orientcount: check {} failed: {}", check.name, check.detail);
            }
            let code = if report.passed { 0 } else { 1 };
            Ok((Output::Json(json!({ "graph": graph_json(&g), "report": to_value(&report) })), code))
        }
        Command::Gen(c) => {
            let g = read_graph(&c.graph)?;
            Ok((Output::Text(write_edge_list(&g)), 0))
        }
    }
}

fn ratio_to_f64(numer: &num_bigint::BigInt, denom: &num_bigint::BigInt) -> f64 {
    match (log_biguint(numer.magnitude()), log_biguint(denom.magnitude())) {
        (None, _) => 0.0,
        (Some(a), Some(b)) => (a - b).exp(),
        (Some(_), None) => f64::INFINITY,
    }
}

fn verdict_json(v: &FeasibilityVerdict) -> Value {
    json!({
        "status": v.status,
        "witness": v.witness.as_deref().map(one_indexed),
        "flow_value": v.flow_value.to_string(),
        "required_flow": v.required_flow,
        "components": v.components.iter().map(|c| json!({
            "vertices": one_indexed(&c.vertices),
            "status": c.status,
            "witness": c.witness.as_deref().map(one_indexed),
        })).collect::<Vec<_>>(),
    })
}

/// Runs the oracle chosen by `--oracle`. With `optional`, `auto` quietly
/// skips instances beyond every oracle's reach; otherwise it is an error.
fn run_oracle(c: &Common, g: &Graph, b: &ImbalanceSeq, optional: bool) -> Res<(Option<&'static str>, Option<BigUint>)> {
    let choice = match c.oracle {
        Oracle::None => return Ok((None, None)),
        Oracle::Auto => {
            let budget =
                b.out_degrees(g).ok().and_then(|s| s.iter().try_fold(1u128, |acc, &x| acc.checked_mul(x as u128 + 1)));
            if budget.is_none_or(|v| v <= DP_STATE_CAP) {
                Oracle::Dp
            } else if g.m() <= BRUTEFORCE_MAX_EDGES {
                Oracle::Brute
            } else if g.n() <= QUADRATURE_MAX_N {
                Oracle::Quadrature
            } else if optional {
                log(c, || "instance too large for every exact oracle".into());
                return Ok((None, None));
            } else {
                return Err(Error::SizeLimit("instance too large for every exact oracle".into()));
            }
        }
        other => other,
    };
    log(c, || format!("running oracle {choice:?}"));
    let (name, count) = match choice {
        Oracle::Brute => ("brute", exact_count_bruteforce(g, b)?),
        Oracle::Dp => ("dp", exact_count_dp(g, b)?),
        Oracle::Quadrature => {
            let (q, _) = exact_count_quadrature_auto(g, b)?;
            let rounded = q.round();
            if (q - rounded).abs() > 1e-3 * rounded.max(1.0) || rounded < 0.0 {
                return Err(Error::Inconsistent(format!("quadrature value {q} is not an integer")));
            }
            ("quadrature", BigUint::from(rounded as u128))
        }
        Oracle::Auto | Oracle::None => unreachable!("resolved above"),
    };
    Ok((Some(name), Some(count)))
}

fn count_json(g: &Graph, outcome: &CountOutcome, oracle: Option<&str>, exact: Option<BigUint>) -> Value {
    let exact_str = exact.as_ref().map(|e| e.to_string());
    match outcome {
        CountOutcome::Zero(reason) => {
            let reason = match reason {
                ZeroReason::Parity { vertex } => json!({ "kind": "Parity", "vertex": vertex + 1 }),
                ZeroReason::Infeasible => json!({ "kind": "Infeasible" }),
            };
            json!({
                "graph": graph_json(g),
                "log_count": null,
                "log10_count": null,
                "estimate": 0.0,
                "zero_reason": reason,
                "factors": null,
                "terms": null,
                "diagnostics": null,
                "oracle": oracle,
                "exact": exact_str,
                "relative_error": null,
            })
        }
        CountOutcome::Estimate(result) => {
            let result = CountResult { exact, ..result.clone() };
            json!({
                "graph": graph_json(g),
                "log_count": result.log_count,
                "log10_count": result.log10_count(),
                "estimate": result.estimate(),
                "zero_reason": null,
                "factors": to_value(&result.factors),
                "terms": result.terms.as_ref().map(to_value),
                "diagnostics": to_value(&result.diagnostics),
                "oracle": oracle,
                "exact": exact_str,
                "relative_error": result.relative_error(),
            })
        }
    }
}
