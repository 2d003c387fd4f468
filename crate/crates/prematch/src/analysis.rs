//! Mechanical verification of the preemptive matcher's guarantees.
//!
//! A run of a preempting matcher induces a forest: each surviving edge
//! roots a tree whose children are the edges it preempted, recursively.
//! For the geometric matcher the rounded weights shrink at least
//! geometrically with depth, each non-root node introduces at most one
//! vertex not seen closer to the root, and charging every rounded-optimal
//! edge to a nearby tree root costs at most `(2θ-2)/(θ-2)` times the
//! root's rounded weight. Those three facts chain into the per-instance
//! guarantee `w(ALG) ≥ (θ-2)/(2θ-2) · OPT̃`, verified here directly.

use crate::graph::{Edge, EdgeStream};
use crate::matchers::{run_final, Algorithm};
use crate::oracle::{max_weight_matching, rounded_opt, OfflineResult, WeightFn};
use crate::rounding::RoundingScheme;
use crate::seeding::derive_seed;
use crate::trace::{Action, StreamTrace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("inconsistent trace: {0}")]
    InconsistentTrace(String),
    #[error("charging analysis needs theta > 2 (got {0})")]
    ThetaNotAboveTwo(f64),
    #[error("no witness for matched edge {edge_id}: no adjacent forest edge of at least its rounded weight")]
    NoWitness { edge_id: usize },
}

/// `lhs <= rhs` up to a relative slack of 1e-9 of the larger magnitude.
fn le_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-9 * lhs.abs().max(rhs.abs())
}

/// One accepted edge in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestNode {
    pub edge: Edge,
    /// Node that preempted this edge; `None` for surviving edges.
    pub parent: Option<usize>,
    /// Nodes this edge preempted when it was inserted (at most two).
    pub children: Vec<usize>,
    /// Distance to the surviving root edge (0 for roots).
    pub depth: usize,
    /// Node index of this node's root.
    pub root: usize,
    /// Endpoints not seen at any smaller depth in this tree.
    pub new_vertices: Vec<usize>,
}

/// The preemption forest of a run: every accepted edge is a node; the
/// surviving edges are the roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreemptionForest {
    pub nodes: Vec<ForestNode>,
    /// Indices of the parentless nodes (the final matching).
    pub roots: Vec<usize>,
    node_of_edge: HashMap<usize, usize>,
}

impl PreemptionForest {
    pub fn node_for_edge(&self, edge_id: usize) -> Option<usize> {
        self.node_of_edge.get(&edge_id).copied()
    }

    /// Nodes of the tree under `root`, breadth-first (nondecreasing depth).
    pub fn tree_nodes(&self, root: usize) -> Vec<usize> {
        let mut out = vec![root];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.nodes[out[i]].children);
            i += 1;
        }
        out
    }
}

/// Builds the forest of a run: accepted edges become nodes, preempted
/// edges hang under their preemptor, depths and new-vertex sets come from
/// a breadth-first pass per tree.
pub fn build_forest(trace: &StreamTrace) -> Result<PreemptionForest, AnalysisError> {
    let bad = |msg: String| Err(AnalysisError::InconsistentTrace(msg));
    let mut nodes: Vec<ForestNode> = Vec::new();
    let mut node_of_edge: HashMap<usize, usize> = HashMap::new();
    let mut live: HashMap<usize, usize> = HashMap::new(); // edge id -> node
    for ev in &trace.events {
        if ev.action == Action::Reject {
            if !ev.preempted.is_empty() {
                return bad(format!("edge {} rejected yet preempts", ev.edge.id));
            }
            continue;
        }
        if ev.preempted.len() > 2 {
            return bad(format!("edge {} preempts {} edges", ev.edge.id, ev.preempted.len()));
        }
        let idx = nodes.len();
        let mut children = Vec::with_capacity(ev.preempted.len());
        for &pid in &ev.preempted {
            let Some(child) = live.remove(&pid) else {
                return bad(format!("edge {} preempts edge {} which is not matched", ev.edge.id, pid));
            };
            nodes[child].parent = Some(idx);
            children.push(child);
        }
        nodes.push(ForestNode {
            edge: ev.edge,
            parent: None,
            children,
            depth: 0,
            root: idx,
            new_vertices: Vec::new(),
        });
        node_of_edge.insert(ev.edge.id, idx);
        live.insert(ev.edge.id, idx);
    }

    let mut survivors: Vec<usize> = live.keys().copied().collect();
    survivors.sort_unstable();
    let mut finals = trace.final_matching.clone();
    finals.sort_unstable();
    if survivors != finals {
        return bad("survivors disagree with the recorded final matching".into());
    }

    let roots: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].parent.is_none()).collect();
    for &r in &roots {
        // Breadth-first: queue order is nondecreasing in depth, so the
        // first depth a vertex is seen at is its minimum depth.
        let mut first_seen: HashMap<usize, usize> = HashMap::new();
        let mut queue = vec![r];
        let mut i = 0;
        while i < queue.len() {
            let v = queue[i];
            i += 1;
            let depth = if let Some(p) = nodes[v].parent {
                nodes[p].depth + 1
            } else {
                0
            };
            nodes[v].depth = depth;
            nodes[v].root = r;
            let mut fresh = Vec::new();
            for endpoint in [nodes[v].edge.u, nodes[v].edge.v] {
                let d = *first_seen.entry(endpoint).or_insert(depth);
                if d == depth {
                    fresh.push(endpoint);
                }
            }
            fresh.dedup(); // self-loops never occur, but stay safe
            nodes[v].new_vertices = fresh;
            queue.extend_from_slice(&nodes[v].children);
        }
    }

    Ok(PreemptionForest {
        nodes,
        roots,
        node_of_edge,
    })
}

/// Structural invariants: at most two children per node, two new vertices
/// at the root, at most one per deeper node, and per tree the distinct new
/// vertices at depth d never exceed min(2^d, nodes at depth d).
pub fn check_forest_invariants(forest: &PreemptionForest) -> bool {
    for node in &forest.nodes {
        if node.children.len() > 2 {
            return false;
        }
        let cap = if node.depth == 0 { 2 } else { 1 };
        if node.new_vertices.len() > cap {
            return false;
        }
    }
    for &r in &forest.roots {
        let mut per_depth: HashMap<usize, (usize, Vec<usize>)> = HashMap::new();
        for idx in forest.tree_nodes(r) {
            let n = &forest.nodes[idx];
            let slot = per_depth.entry(n.depth).or_default();
            slot.0 += 1;
            slot.1.extend_from_slice(&n.new_vertices);
        }
        for (depth, (count, mut fresh)) in per_depth {
            fresh.sort_unstable();
            fresh.dedup();
            let cap = if depth == 0 {
                2
            } else {
                1usize.checked_shl(depth as u32).unwrap_or(usize::MAX).min(count)
            };
            if fresh.len() > cap {
                return false;
            }
        }
    }
    true
}

/// True iff every node's rounded weight is at most its root's divided by
/// θ^depth (1e-9 relative slack).
pub fn check_depth_weights(forest: &PreemptionForest, s: &RoundingScheme) -> bool {
    forest.nodes.iter().all(|node| {
        let root_rounded = s.rounded_weight(forest.nodes[node.root].edge.weight);
        let bound = root_rounded / s.theta.powi(node.depth as i32);
        le_with_slack(s.rounded_weight(node.edge.weight), bound)
    })
}

/// How one rounded-optimal edge was charged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeEntry {
    pub edge_id: usize,
    pub rounded: f64,
    /// Depth of the tree edge the charge lands through.
    pub d_min: usize,
    /// The tree edge carrying the charge: the edge itself when it is a
    /// forest node, otherwise the chosen witness.
    pub witness: usize,
}

/// All charges landing on one surviving edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCharge {
    pub root_edge_id: usize,
    pub root_rounded: f64,
    pub total: f64,
    pub bound: f64,
    pub entries: Vec<ChargeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeReport {
    pub theta: f64,
    /// `(2θ-2)/(θ-2)`; `bound = coefficient * root_rounded` per root.
    pub coefficient: f64,
    pub roots: Vec<RootCharge>,
}

impl ChargeReport {
    pub fn total_charged(&self) -> f64 {
        self.roots.iter().map(|r| r.total).sum()
    }
}

/// Charges every edge of the rounded-optimal matching to a forest root:
/// edges that are forest nodes charge their own tree's root; any other
/// edge charges through an adjacent forest edge of at least its rounded
/// weight (witness), breaking ties by larger rounded weight then smaller
/// arrival id. Edges rounding to zero carry no charge and are skipped.
pub fn associate_charges(
    forest: &PreemptionForest,
    opt: &OfflineResult,
    s: &RoundingScheme,
) -> Result<ChargeReport, AnalysisError> {
    if s.theta <= 2.0 {
        return Err(AnalysisError::ThetaNotAboveTwo(s.theta));
    }
    let coefficient = (2.0 * s.theta - 2.0) / (s.theta - 2.0);
    let mut charges: HashMap<usize, RootCharge> = forest
        .roots
        .iter()
        .map(|&r| {
            let rounded = s.rounded_weight(forest.nodes[r].edge.weight);
            (
                r,
                RootCharge {
                    root_edge_id: forest.nodes[r].edge.id,
                    root_rounded: rounded,
                    total: 0.0,
                    bound: coefficient * rounded,
                    entries: Vec::new(),
                },
            )
        })
        .collect();

    let mut touching: HashMap<usize, Vec<usize>> = HashMap::new();
    for (idx, node) in forest.nodes.iter().enumerate() {
        touching.entry(node.edge.u).or_default().push(idx);
        touching.entry(node.edge.v).or_default().push(idx);
    }

    for me in opt.matching.iter() {
        let e = me.edge;
        let rounded = s.rounded_weight(e.weight);
        if rounded == 0.0 {
            continue;
        }
        let carrier = if let Some(idx) = forest.node_for_edge(e.id) {
            idx
        } else {
            let mut best: Option<usize> = None;
            for &idx in [e.u, e.v].iter().flat_map(|v| touching.get(v)).flatten() {
                let w = s.rounded_weight(forest.nodes[idx].edge.weight);
                if w < rounded {
                    continue;
                }
                best = match best {
                    None => Some(idx),
                    Some(cur) => {
                        let cw = s.rounded_weight(forest.nodes[cur].edge.weight);
                        let better = w > cw
                            || (w == cw && forest.nodes[idx].edge.id < forest.nodes[cur].edge.id);
                        Some(if better { idx } else { cur })
                    }
                };
            }
            best.ok_or(AnalysisError::NoWitness { edge_id: e.id })?
        };
        let node = &forest.nodes[carrier];
        let slot = charges.get_mut(&node.root).expect("root is registered");
        slot.total += rounded;
        slot.entries.push(ChargeEntry {
            edge_id: e.id,
            rounded,
            d_min: node.depth,
            witness: node.edge.id,
        });
    }

    let mut roots: Vec<RootCharge> = charges.into_values().collect();
    roots.sort_by_key(|r| r.root_edge_id);
    Ok(ChargeReport {
        theta: s.theta,
        coefficient,
        roots,
    })
}

/// True iff every root's charged total is within its bound
/// `(2θ-2)/(θ-2) · rounded(root)` (1e-9 relative slack).
pub fn check_charging_bound(report: &ChargeReport, s: &RoundingScheme) -> bool {
    let coefficient = (2.0 * s.theta - 2.0) / (s.theta - 2.0);
    report
        .roots
        .iter()
        .all(|r| le_with_slack(r.total, coefficient * r.root_rounded))
}

/// True iff the run's final weight meets the per-instance guarantee
/// `w(ALG) ≥ (θ-2)/(2θ-2) · OPT̃` for this stream and scheme.
pub fn check_per_tau_guarantee(
    stream: &EdgeStream,
    s: &RoundingScheme,
    trace: &StreamTrace,
) -> bool {
    assert!(s.theta > 2.0, "per-instance guarantee needs theta > 2");
    let coefficient = (s.theta - 2.0) / (2.0 * s.theta - 2.0);
    let target = coefficient * rounded_opt(stream, s).objective;
    le_with_slack(target, trace.weight)
}

/// The quantities linked by the per-instance chain of inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainValues {
    pub theta: f64,
    pub tau: f64,
    pub alg_weight: f64,
    pub alg_rounded: f64,
    /// Optimal matching value under rounded weights, `w̃(M̃)`.
    pub rounded_opt_objective: f64,
    /// Rounded value of the matching that is optimal under the original
    /// weights, `w̃(M*)`; never exceeds `w̃(M̃)`.
    pub rounded_value_of_opt: f64,
    pub opt: f64,
}

/// A broken link, with the two sides that failed to compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFailure {
    pub link: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl std::fmt::Display for ChainFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "chain link failed: {} ({} vs {})", self.link, self.lhs, self.rhs)
    }
}

/// Runs the geometric matcher and checks each link separately:
/// `w(ALG) ≥ w̃(ALG) ≥ c·w̃(M̃) ≥ c·w̃(M*)` with `c = (θ-2)/(2θ-2)`, and
/// `OPT ≤ θ·w̃(M*)`. A failure names the first broken link.
pub fn check_chain(
    stream: &EdgeStream,
    s: &RoundingScheme,
) -> Result<ChainValues, ChainFailure> {
    let final_matching = run_final(&Algorithm::Geometric(*s), stream);
    let m_tilde = rounded_opt(stream, s);
    let m_star = max_weight_matching(stream, WeightFn::Original);
    let rounded_value_of_opt: f64 = m_star
        .matching
        .iter()
        .map(|me| s.rounded_weight(me.edge.weight))
        .sum();
    let coefficient = (s.theta - 2.0) / (2.0 * s.theta - 2.0);
    let values = ChainValues {
        theta: s.theta,
        tau: s.tau,
        alg_weight: final_matching.weight(),
        alg_rounded: final_matching.rounded_weight(),
        rounded_opt_objective: m_tilde.objective,
        rounded_value_of_opt,
        opt: m_star.objective,
    };
    let links: [(&str, f64, f64); 4] = [
        ("rounded alg value exceeds true alg value", values.alg_rounded, values.alg_weight),
        (
            "alg rounded value below (theta-2)/(2theta-2) of rounded optimum",
            coefficient * values.rounded_opt_objective,
            values.alg_rounded,
        ),
        (
            "rounded value of the true optimal matching exceeds the rounded optimum",
            values.rounded_value_of_opt,
            values.rounded_opt_objective,
        ),
        (
            "true optimum exceeds theta times the rounded value of its matching",
            values.opt,
            s.theta * values.rounded_value_of_opt,
        ),
    ];
    for (name, lhs, rhs) in links {
        if !le_with_slack(lhs, rhs) {
            return Err(ChainFailure {
                link: name.to_string(),
                lhs,
                rhs,
            });
        }
    }
    Ok(values)
}

/// Monte Carlo estimate of OPT over the geometric matcher's mean final
/// weight across independent τ draws, with a 95% confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauRatioReport {
    pub theta: f64,
    pub trials: u64,
    pub optimum: f64,
    pub mean_weight: f64,
    pub stderr: f64,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn empirical_ratio(
    stream: &EdgeStream,
    theta: f64,
    trials: u64,
    seed: u64,
) -> TauRatioReport {
    assert!(theta > 2.0 && trials >= 1);
    let opt = max_weight_matching(stream, WeightFn::Original).objective;
    let weights: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i));
            let s = RoundingScheme::sample(theta, &mut rng).expect("theta validated");
            run_final(&Algorithm::Geometric(s), stream).weight()
        })
        .collect();
    let t = trials as f64;
    let mean = weights.iter().sum::<f64>() / t;
    let var = weights.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>()
        / (t - 1.0).max(1.0);
    let se = (var / t).sqrt();
    let (ratio, ci_low, ci_high) = if opt == 0.0 {
        (1.0, 1.0, 1.0)
    } else {
        let hi_mean = mean + 1.96 * se;
        let lo_mean = mean - 1.96 * se;
        (
            opt / mean,
            opt / hi_mean,
            if lo_mean > 0.0 { opt / lo_mean } else { f64::INFINITY },
        )
    };
    TauRatioReport {
        theta,
        trials,
        optimum: opt,
        mean_weight: mean,
        stderr: se,
        ratio,
        ci_low,
        ci_high,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Matching;
    use crate::matchers::run_matcher;
    use crate::rounding::optimal_theta;

    fn stream(num_vertices: usize, edges: &[(usize, usize, f64)]) -> EdgeStream {
        let mut s = EdgeStream::new(num_vertices);
        for &(u, v, w) in edges {
            s.push(u, v, w);
        }
        s
    }

    #[test]
    fn no_preemption_forest_is_all_roots() {
        let st = stream(4, &[(0, 1, 2.0), (2, 3, 5.0)]);
        let run = run_matcher(&Algorithm::Greedy, &st);
        let forest = build_forest(&run).unwrap();
        assert_eq!(forest.roots.len(), 2);
        assert!(forest.nodes.iter().all(|n| n.depth == 0 && n.children.is_empty()));
        assert!(forest.nodes.iter().all(|n| n.new_vertices.len() == 2));
        assert!(check_forest_invariants(&forest));
    }

    #[test]
    fn worked_trace_theta_two_depth_weights() {
        let st = stream(4, &[(0, 1, 4.0), (1, 2, 8.0), (2, 3, 3.0)]);
        let s = RoundingScheme::new(2.0, 1.0).unwrap();
        let run = run_matcher(&Algorithm::Geometric(s), &st);
        let forest = build_forest(&run).unwrap();
        assert_eq!(forest.roots.len(), 1);
        let root = &forest.nodes[forest.roots[0]];
        assert_eq!(root.edge.id, 1);
        assert_eq!(root.children.len(), 1);
        let child = &forest.nodes[root.children[0]];
        assert_eq!(child.edge.id, 0);
        assert_eq!(child.depth, 1);
        // rounded(4) = 4 is exactly rounded(8)/2 = 8/2.
        assert!(check_depth_weights(&forest, &s));
        assert!(check_forest_invariants(&forest));
        // The child shares vertex 1 with the root: one new vertex.
        assert_eq!(child.new_vertices, vec![0]);
    }

    #[test]
    fn preemption_chain_builds_a_path_tree() {
        let st = stream(2, &[(0, 1, 3.0), (0, 1, 9.0), (0, 1, 27.0), (0, 1, 81.0)]);
        let s = RoundingScheme::new(3.0, 1.0).unwrap();
        let run = run_matcher(&Algorithm::Geometric(s), &st);
        let forest = build_forest(&run).unwrap();
        assert_eq!(forest.roots.len(), 1);
        assert_eq!(forest.nodes.len(), 4);
        let depths: Vec<usize> = (0..4)
            .map(|id| forest.nodes[forest.node_for_edge(id).unwrap()].depth)
            .collect();
        assert_eq!(depths, vec![3, 2, 1, 0]);
        assert!(check_depth_weights(&forest, &s));
        assert!(check_forest_invariants(&forest));
        // Parallel edges: only the root introduces vertices.
        let deep_new: usize = forest
            .nodes
            .iter()
            .filter(|n| n.depth > 0)
            .map(|n| n.new_vertices.len())
            .sum();
        assert_eq!(deep_new, 0);
    }

    #[test]
    fn worked_charging_example_at_theta_three() {
        // rounded weights at theta=3, tau=1: 4 -> 3, 9.5 -> 9, 9.3 -> 9.
        // The matcher keeps only (1,2); the rounded optimum is the two
        // outer edges, one in-tree and one witnessed through (1,2).
        let st = stream(4, &[(0, 1, 4.0), (1, 2, 9.5), (2, 3, 9.3)]);
        let s = RoundingScheme::new(3.0, 1.0).unwrap();
        let run = run_matcher(&Algorithm::Geometric(s), &st);
        assert_eq!(run.final_matching, vec![1]);
        let forest = build_forest(&run).unwrap();
        let m_tilde = rounded_opt(&st, &s);
        assert_eq!(m_tilde.matching.edge_ids(), vec![0, 2]);
        assert_eq!(m_tilde.objective, 12.0);

        let report = associate_charges(&forest, &m_tilde, &s).unwrap();
        assert_eq!(report.roots.len(), 1);
        let rc = &report.roots[0];
        assert_eq!(rc.root_edge_id, 1);
        assert_eq!(rc.root_rounded, 9.0);
        assert_eq!(rc.total, 12.0);
        assert_eq!(rc.bound, 4.0 * 9.0); // (2*3-2)/(3-2) = 4
        let in_tree = rc.entries.iter().find(|e| e.edge_id == 0).unwrap();
        assert_eq!((in_tree.d_min, in_tree.witness), (1, 0));
        let witnessed = rc.entries.iter().find(|e| e.edge_id == 2).unwrap();
        assert_eq!((witnessed.d_min, witnessed.witness), (0, 1));

        assert!(check_charging_bound(&report, &s));
        assert!(check_per_tau_guarantee(&st, &s, &run)); // 9.5 >= 12/4
        assert!((report.total_charged() - m_tilde.objective).abs() < 1e-12);
        assert!(check_chain(&st, &s).is_ok());
    }

    #[test]
    fn witness_tie_breaks_by_weight_then_arrival() {
        let s = RoundingScheme::new(3.0, 1.0).unwrap();
        // Hand-built forest: two roots touching vertices 1 and 2.
        let build = |w0: f64, w1: f64| {
            let st = stream(4, &[(0, 1, w0), (2, 3, w1)]);
            let run = run_matcher(&Algorithm::Geometric(s), &st);
            build_forest(&run).unwrap()
        };
        let charged_root = |forest: &PreemptionForest| {
            let mut m = Matching::new(4);
            m.insert(Edge { id: 7, u: 1, v: 2, weight: 3.0 }, 3.0);
            let opt = OfflineResult {
                matching: m,
                objective: 3.0,
                weight_fn: WeightFn::Rounded(s),
            };
            let report = associate_charges(forest, &opt, &s).unwrap();
            report
                .roots
                .iter()
                .find(|r| r.total > 0.0)
                .unwrap()
                .root_edge_id
        };
        // Equal rounded weights: the smaller arrival id wins.
        assert_eq!(charged_root(&build(9.0, 9.5)), 0);
        // Strictly larger rounded weight wins regardless of id.
        assert_eq!(charged_root(&build(9.0, 27.0)), 1);
    }

    #[test]
    fn inconsistent_traces_are_refused() {
        let st = stream(4, &[(0, 1, 4.0), (1, 2, 9.5)]);
        let s = RoundingScheme::new(3.0, 1.0).unwrap();
        let mut run = run_matcher(&Algorithm::Geometric(s), &st);
        run.events[1].preempted = vec![5];
        assert!(matches!(
            build_forest(&run),
            Err(AnalysisError::InconsistentTrace(_))
        ));
    }

    #[test]
    fn charging_requires_theta_above_two() {
        let st = stream(2, &[(0, 1, 1.0)]);
        let s = RoundingScheme::new(2.0, 1.0).unwrap();
        let run = run_matcher(&Algorithm::Geometric(s), &st);
        let forest = build_forest(&run).unwrap();
        let opt = rounded_opt(&st, &s);
        assert_eq!(
            associate_charges(&forest, &opt, &s).unwrap_err(),
            AnalysisError::ThetaNotAboveTwo(2.0)
        );
    }

    #[test]
    fn per_tau_guarantee_on_empty_stream() {
        let st = stream(3, &[]);
        let s = RoundingScheme::new(5.0, 0.5).unwrap();
        let run = run_matcher(&Algorithm::Geometric(s), &st);
        assert!(check_per_tau_guarantee(&st, &s, &run));
    }

    #[test]
    fn single_edge_ratio_is_one() {
        let st = stream(2, &[(0, 1, 3.75)]);
        let rep = empirical_ratio(&st, optimal_theta(1e-12), 64, 11);
        assert_eq!(rep.ratio, 1.0);
        assert_eq!(rep.mean_weight, 3.75);
        assert_eq!(rep.stderr, 0.0);
    }

    #[test]
    fn measured_ratio_stays_under_the_guarantee() {
        let st = stream(
            6,
            &[
                (0, 1, 1.0),
                (1, 2, 2.5),
                (2, 3, 6.0),
                (3, 4, 14.0),
                (4, 5, 33.0),
                (0, 5, 80.0),
                (1, 4, 7.7),
                (2, 5, 0.4),
            ],
        );
        let theta = optimal_theta(1e-12);
        let rep = empirical_ratio(&st, theta, 4000, 5);
        let slack = 3.0 * rep.stderr * rep.ratio / rep.mean_weight;
        assert!(
            rep.ratio <= theta + slack,
            "ratio {} > theta {}",
            rep.ratio,
            theta
        );
        assert!(rep.ci_low <= rep.ratio && rep.ratio <= rep.ci_high);
    }

    #[test]
    fn mean_rounded_optimum_matches_closed_form() {
        let st = stream(
            6,
            &[
                (0, 1, 1.0),
                (1, 2, 2.5),
                (2, 3, 6.0),
                (3, 4, 14.0),
                (4, 5, 33.0),
                (0, 5, 80.0),
            ],
        );
        let theta = 4.0;
        let opt = max_weight_matching(&st, WeightFn::Original).objective;
        let trials = 4000u64;
        let mut sum = 0.0;
        for i in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(77, i));
            let s = RoundingScheme::sample(theta, &mut rng).unwrap();
            sum += rounded_opt(&st, &s).objective;
        }
        let measured = sum / trials as f64 / opt;
        let expected = crate::rounding::expected_rounding_ratio(theta).unwrap();
        assert!(
            (measured - expected).abs() < 0.02,
            "measured {measured}, expected {expected}"
        );
    }

    #[test]
    fn chain_holds_across_a_small_fuzz_batch() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(314);
        for case in 0..60 {
            let n = rng.gen_range(2..=8);
            let m = rng.gen_range(1..=10);
            let mut st = EdgeStream::new(n);
            for _ in 0..m {
                let u = rng.gen_range(0..n);
                let mut v = rng.gen_range(0..n);
                while v == u {
                    v = rng.gen_range(0..n);
                }
                st.push(u, v, rng.gen_range(0.0..50.0_f64));
            }
            let theta = rng.gen_range(2.1..8.0);
            let s = RoundingScheme::sample(theta, &mut rng).unwrap();
            if let Err(fail) = check_chain(&st, &s) {
                panic!("case {case}: {fail}");
            }
            let run = run_matcher(&Algorithm::Geometric(s), &st);
            let forest = build_forest(&run).unwrap();
            assert!(check_forest_invariants(&forest));
            assert!(check_depth_weights(&forest, &s));
            let m_tilde = rounded_opt(&st, &s);
            let report = associate_charges(&forest, &m_tilde, &s).unwrap();
            assert!(check_charging_bound(&report, &s));
            assert!(check_per_tau_guarantee(&st, &s, &run));
        }
    }
}
