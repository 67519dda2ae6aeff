//! Feasibility of an imbalance sequence via the auxiliary flow network.
//!
//! Source `s` feeds each vertex `v` with capacity `d_v + b_v`, each vertex
//! drains `d_v` into the sink `t`, and every graph edge carries capacity 1
//! in both directions. A flow of value `2|E|` exists iff
//! `sum_{j in U} b_j <= |∂U|` for every `U`. The condition is strict for all
//! `U` with `∂U ≠ ∅` iff, within each component, the internal residual graph
//! of a maximum flow is strongly connected: a closed (sink) set of the
//! residual graph is exactly a saturated cut.
//!
//! Real imbalances are handled by scaling every capacity by the least common
//! denominator of `b`, so the resulting orientation probabilities are exact
//! rationals.

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, ImbalanceSeq};
use crate::maxflow::FlowNetwork;

/// Largest common denominator accepted when scaling real imbalances.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FeasibilityStatus {
    StrictlyFeasible,
    Boundary,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentVerdict {
    pub vertices: Vec<usize>,
    pub status: FeasibilityStatus,
    pub witness: Option<Vec<usize>>,
}

/// Outcome of [`check_feasible`].
///
/// `status` is the worst status over the connected components; `witness`
/// is the witness of the first component with that status. For `Boundary`
/// the witness `U` satisfies `sum_U b = |∂U|` with `∂U ≠ ∅`; for
/// `Infeasible` it satisfies `sum_U b > |∂U|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityVerdict {
    pub status: FeasibilityStatus,
    pub witness: Option<Vec<usize>>,
    #[serde(serialize_with = "ser_ratio")]
    pub flow_value: Ratio<i64>,
    pub required_flow: usize,
    pub components: Vec<ComponentVerdict>,
}

/// Edge probabilities `p(j,k)` with `p(j,k) + p(k,j) = 1` whose expected
/// imbalance is `b`. Stored per canonical edge as `p(j,k)` for `j < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalOrientation {
    forward: Vec<Ratio<i64>>,
}

impl FractionalOrientation {
    /// Probability of `j -> k`, for an edge `{j, k}` in `g`.
    pub fn get(&self, g: &Graph, j: usize, k: usize) -> Option<Ratio<i64>> {
        let e = g.edge_index(j, k)?;
        Some(if j < k { self.forward[e] } else { Ratio::from_integer(1) - self.forward[e] })
    }

    pub fn forward(&self) -> &[Ratio<i64>] {
        &self.forward
    }

    /// `sum_{k in N(j)} (p(j,k) - p(k,j))` for every `j`.
    pub fn net_imbalance(&self, g: &Graph) -> Vec<Ratio<i64>> {
        let one = Ratio::from_integer(1);
        let mut net = vec![Ratio::from_integer(0); g.n()];
        for (&(j, k), &p) in g.edges().iter().zip(&self.forward) {
            let diff = p - (one - p);
            net[j] += diff;
            net[k] -= diff;
        }
        net
    }
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Best rational approximation of `x` with denominator at most `max_den`.
fn rational_approx(x: f64, max_den: i64) -> Ratio<i64> {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    loop {
        let a = r.floor();
        let ai = a as i64;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-12 || ((h1 as f64) / (k1 as f64) - x).abs() <= 1e-14 * x.abs().max(1.0) {
            break;
        }
        r = 1.0 / frac;
    }
    Ratio::new(h1, k1)
}

/// `b` as integers over a common denominator `D`: returns `(D, D * b)`.
pub(crate) fn scale_to_integers(b: &ImbalanceSeq) -> Result<(i64, Vec<i64>)> {
    let ratios: Vec<Ratio<i64>> = b.values().iter().map(|&x| rational_approx(x, MAX_DENOMINATOR)).collect();
    let mut den = 1i64;
    for (r, &x) in ratios.iter().zip(b.values()) {
        if (*r.numer() as f64 / *r.denom() as f64 - x).abs() > 1e-14 * x.abs().max(1.0) {
            return Err(Error::InvalidImbalance(format!(
                "{x} is not a rational with denominator <= {MAX_DENOMINATOR}"
            )));
        }
        den = den.lcm(r.denom());
        if den > MAX_DENOMINATOR {
            return Err(Error::InvalidImbalance(format!("common denominator exceeds {MAX_DENOMINATOR}")));
        }
    }
    let scaled: Vec<i64> = ratios.iter().map(|r| (r * den).to_integer()).collect();
    if scaled.iter().sum::<i64>() != 0 {
        return Err(Error::InvalidImbalance("entries do not sum to zero".into()));
    }
    Ok((den, scaled))
}

struct ComponentFlow {
    status: FeasibilityStatus,
    witness: Option<Vec<usize>>,
    flow: i64,
    /// Net scaled flow `j -> k` per local canonical edge.
    edge_flow: Vec<i64>,
}

fn solve_component(g: &Graph, scaled: &[i64], den: i64) -> ComponentFlow {
    let n = g.n();
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    for (v, &bv) in scaled.iter().enumerate() {
        let d = g.degree(v) as i64 * den;
        net.add_edge(s, v, d + bv, 0);
        net.add_edge(v, t, d, 0);
    }
    let edge_arcs: Vec<usize> = g.edges().iter().map(|&(j, k)| net.add_edge(j, k, den, den)).collect();
    let flow = net.max_flow(s, t);
    let edge_flow = edge_arcs.iter().map(|&id| net.flow(id)).collect();
    let required = 2 * g.m() as i64 * den;

    if flow < required {
        let reach = net.reachable_from(s);
        let witness = (0..n).filter(|&v| reach[v]).collect();
        return ComponentFlow { status: FeasibilityStatus::Infeasible, witness: Some(witness), flow, edge_flow };
    }

    // Residual arcs strictly between graph vertices.
    let mut residual_adj = vec![Vec::new(); n];
    for (&(j, k), &id) in g.edges().iter().zip(&edge_arcs) {
        if net.residual(id) > 0 {
            residual_adj[j].push(k);
        }
        if net.residual(id ^ 1) > 0 {
            residual_adj[k].push(j);
        }
    }
    let comp = strongly_connected(&residual_adj);
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    if count <= 1 {
        return ComponentFlow { status: FeasibilityStatus::StrictlyFeasible, witness: None, flow, edge_flow };
    }
    let mut is_sink = vec![true; count];
    for (u, nbrs) in residual_adj.iter().enumerate() {
        for &v in nbrs {
            if comp[u] != comp[v] {
                is_sink[comp[u]] = false;
            }
        }
    }
    // Sink component containing the smallest vertex id.
    let sink = (0..n).map(|v| comp[v]).find(|&c| is_sink[c]).expect("condensation has a sink");
    let witness = (0..n).filter(|&v| comp[v] == sink).collect();
    ComponentFlow { status: FeasibilityStatus::Boundary, witness: Some(witness), flow, edge_flow }
}

/// Tarjan's algorithm; returns a component id per vertex.
fn strongly_connected(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (vertex, next neighbour position)
        let mut call = vec![(root, 0usize)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

struct Analysis {
    verdict: FeasibilityVerdict,
    den: i64,
    edge_flow: Vec<i64>,
}

fn analyse(g: &Graph, b: &ImbalanceSeq) -> Result<Analysis> {
    b.check_len(g)?;
    let (den, scaled) = scale_to_integers(b)?;
    let required_flow = 2 * g.m();

    let degrees = g.degrees();
    let out_of_range = (0..g.n()).find(|&j| scaled[j].abs() > degrees[j] as i64 * den);
    if let Some(j) = out_of_range {
        let witness = if scaled[j] > 0 { vec![j] } else { (0..g.n()).filter(|&v| v != j).collect() };
        let components = g
            .component_vertices()
            .into_iter()
            .map(|vertices| ComponentVerdict {
                status: if vertices.contains(&j) {
                    FeasibilityStatus::Infeasible
                } else {
                    FeasibilityStatus::StrictlyFeasible
                },
                witness: None,
                vertices,
            })
            .collect();
        let verdict = FeasibilityVerdict {
            status: FeasibilityStatus::Infeasible,
            witness: Some(witness),
            flow_value: Ratio::from_integer(0),
            required_flow,
            components,
        };
        return Ok(Analysis { verdict, den, edge_flow: vec![0; g.m()] });
    }

    let mut components = Vec::new();
    let mut total_flow = 0i64;
    let mut edge_flow = vec![0i64; g.m()];
    for vertices in g.component_vertices() {
        let sub = g.induced(&vertices);
        let local: Vec<i64> = vertices.iter().map(|&v| scaled[v]).collect();
        let sum: i64 = local.iter().sum();
        if sum != 0 {
            let witness =
                if sum > 0 { vertices.clone() } else { (0..g.n()).filter(|v| !vertices.contains(v)).collect() };
            components.push(ComponentVerdict {
                vertices,
                status: FeasibilityStatus::Infeasible,
                witness: Some(witness),
            });
            continue;
        }
        let cf = solve_component(&sub, &local, den);
        total_flow += cf.flow;
        for (&(j, k), &f) in sub.edges().iter().zip(&cf.edge_flow) {
            let e = g.edge_index(vertices[j], vertices[k]).expect("induced edge exists");
            edge_flow[e] = f;
        }
        let witness = cf.witness.map(|w| w.into_iter().map(|v| vertices[v]).collect());
        components.push(ComponentVerdict { vertices, status: cf.status, witness });
    }

    let status = components.iter().map(|c| c.status).max().unwrap_or(FeasibilityStatus::StrictlyFeasible);
    let witness = components.iter().find(|c| c.status == status).and_then(|c| c.witness.clone());
    let verdict =
        FeasibilityVerdict { status, witness, flow_value: Ratio::new(total_flow, den), required_flow, components };
    Ok(Analysis { verdict, den, edge_flow })
}

/// Classifies `b` as infeasible, boundary-feasible or strictly feasible for `g`.
pub fn check_feasible(g: &Graph, b: &ImbalanceSeq) -> Result<FeasibilityVerdict> {
    Ok(analyse(g, b)?.verdict)
}

/// Edge probabilities realising `b` in expectation, from a maximum flow by
/// `p(j,k) = (1 + φ(j,k) - φ(k,j)) / 2`.
pub fn fractional_orientation(g: &Graph, b: &ImbalanceSeq) -> Result<FractionalOrientation> {
    let a = analyse(g, b)?;
    if a.verdict.status == FeasibilityStatus::Infeasible {
        return Err(Error::Infeasible);
    }
    // Arc capacities are scaled by den, so p = (den + f) / (2 den).
    let forward = a.edge_flow.iter().map(|&f| Ratio::new(a.den + f, 2 * a.den)).collect();
    Ok(FractionalOrientation { forward })
}

/// `max |sum_U b| / |∂U|` over vertex sets with `∂U ≠ ∅`, by exhaustive
/// search; `None` if no such set exists. Needs `n <= 22`.
///
/// The tameness bound is stated for `delta = 1 - max_cut_load`.
pub fn max_cut_load(g: &Graph, b: &ImbalanceSeq) -> Result<Option<f64>> {
    let n = g.n();
    if n > crate::graph::CHEEGER_MAX_N {
        return Err(Error::SizeLimit(format!("exhaustive cut search needs n <= {}", crate::graph::CHEEGER_MAX_N)));
    }
    b.check_len(g)?;
    let nbr = g.neighbor_masks();
    let deg: Vec<i64> = g.degrees().iter().map(|&d| d as i64).collect();
    let vals = b.values();
    let (mut set, mut boundary) = (0u64, 0i64);
    let mut best: Option<f64> = None;
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        let bit = 1u64 << v;
        if set & bit == 0 {
            boundary += deg[v] - 2 * i64::from((nbr[v] & set).count_ones());
            set |= bit;
        } else {
            set &= !bit;
            boundary -= deg[v] - 2 * i64::from((nbr[v] & set).count_ones());
        }
        if boundary > 0 {
            let s: f64 = (0..n).filter(|&j| set >> j & 1 == 1).map(|j| vals[j]).sum();
            let load = s.abs() / boundary as f64;
            best = Some(best.map_or(load, |b: f64| b.max(load)));
        }
    }
    Ok(best)
}
