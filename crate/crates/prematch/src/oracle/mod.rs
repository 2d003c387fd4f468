//! Exact offline matching oracles: ground truth for every verification.
//!
//! `max_weight_matching` runs the blossom solver; `brute_force_matching`
//! exhaustively enumerates conflict-free subsets. The two are independent
//! implementations kept in agreement by equivalence tests, so either can
//! vouch for the other.

mod blossom;

use crate::graph::{Edge, EdgeStream, Matching};
use crate::rounding::RoundingScheme;
use blossom::max_weight_matching_f64;
use std::collections::HashMap;
use thiserror::Error;

/// Edge-count cap for exhaustive enumeration.
pub const BRUTE_FORCE_EDGE_LIMIT: usize = 22;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("brute force is limited to {limit} edges (got {got})")]
    TooManyEdges { got: usize, limit: usize },
}

/// The objective a matching is scored under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFn {
    Original,
    Rounded(RoundingScheme),
}

impl WeightFn {
    pub fn eval(&self, e: &Edge) -> f64 {
        match self {
            WeightFn::Original => e.weight,
            WeightFn::Rounded(s) => s.rounded_weight(e.weight),
        }
    }
}

/// An offline optimum: the matching, its objective value, and the weight
/// function it was optimized under.
#[derive(Debug, Clone)]
pub struct OfflineResult {
    pub matching: Matching,
    pub objective: f64,
    pub weight_fn: WeightFn,
}

fn result_from_edges(
    stream: &EdgeStream,
    chosen: impl IntoIterator<Item = Edge>,
    weight_fn: WeightFn,
) -> OfflineResult {
    let mut matching = Matching::new(stream.num_vertices);
    for e in chosen {
        matching.insert(e, weight_fn.eval(&e));
    }
    OfflineResult {
        objective: matching.rounded_weight(),
        matching,
        weight_fn,
    }
}

/// Edges worth offering to a solver: positive objective weight, one
/// representative per vertex pair (the heaviest, ties to the earliest
/// arrival). Dropping zero-weight edges and lighter parallels never changes
/// the optimum value.
fn reduced_edges(stream: &EdgeStream, weight_fn: &WeightFn) -> Vec<(Edge, f64)> {
    let mut best: HashMap<(usize, usize), (Edge, f64)> = HashMap::new();
    for e in &stream.edges {
        let w = weight_fn.eval(e);
        if w <= 0.0 {
            continue;
        }
        let key = (e.u.min(e.v), e.u.max(e.v));
        match best.get(&key) {
            Some(&(prev, pw)) if pw > w || (pw == w && prev.id < e.id) => {}
            _ => {
                best.insert(key, (*e, w));
            }
        }
    }
    let mut out: Vec<(Edge, f64)> = best.into_values().collect();
    out.sort_by_key(|(e, _)| e.id);
    out
}

/// Exact maximum-weight matching of the stream's edge set under the given
/// objective, via the blossom solver.
pub fn max_weight_matching(stream: &EdgeStream, weight_fn: WeightFn) -> OfflineResult {
    let cands = reduced_edges(stream, &weight_fn);
    // Compact the touched vertices so the solver works on dense ids.
    let mut fwd: HashMap<usize, usize> = HashMap::new();
    let mut compact: Vec<(usize, usize, f64)> = Vec::with_capacity(cands.len());
    for (e, w) in &cands {
        let next = fwd.len();
        let cu = *fwd.entry(e.u).or_insert(next);
        let next = fwd.len();
        let cv = *fwd.entry(e.v).or_insert(next);
        compact.push((cu, cv, *w));
    }
    let mate = max_weight_matching_f64(&compact, false);
    let chosen = cands.iter().filter_map(|(e, _)| {
        let cu = fwd[&e.u];
        if mate.get(cu) == Some(&fwd[&e.v]) {
            Some(*e)
        } else {
            None
        }
    });
    result_from_edges(stream, chosen, weight_fn)
}

/// Independent oracle: exhaustive search over conflict-free subsets with
/// branch-and-bound pruning. Refuses streams above the edge cap.
pub fn brute_force_matching(
    stream: &EdgeStream,
    weight_fn: WeightFn,
) -> Result<OfflineResult, OracleError> {
    if stream.len() > BRUTE_FORCE_EDGE_LIMIT {
        return Err(OracleError::TooManyEdges {
            got: stream.len(),
            limit: BRUTE_FORCE_EDGE_LIMIT,
        });
    }
    let cands = reduced_edges(stream, &weight_fn);
    // Heaviest first tightens the pruning bound early.
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| {
        cands[b].1.partial_cmp(&cands[a].1).unwrap().then(cands[a].0.id.cmp(&cands[b].0.id))
    });
    let sorted: Vec<(Edge, f64)> = order.into_iter().map(|i| cands[i]).collect();
    // suffix[i] = total weight of sorted[i..]; an upper bound on any gain.
    let mut suffix = vec![0.0; sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        suffix[i] = suffix[i + 1] + sorted[i].1;
    }

    struct Search<'a> {
        sorted: &'a [(Edge, f64)],
        suffix: &'a [f64],
        used: Vec<bool>,
        picked: Vec<Edge>,
        best_value: f64,
        best_set: Vec<Edge>,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, value: f64) {
            if value > self.best_value {
                self.best_value = value;
                self.best_set = self.picked.clone();
            }
            if i == self.sorted.len() || value + self.suffix[i] <= self.best_value {
                return;
            }
            let (e, w) = self.sorted[i];
            if !self.used[e.u] && !self.used[e.v] {
                self.used[e.u] = true;
                self.used[e.v] = true;
                self.picked.push(e);
                self.go(i + 1, value + w);
                self.picked.pop();
                self.used[e.u] = false;
                self.used[e.v] = false;
            }
            self.go(i + 1, value);
        }
    }
    let mut search = Search {
        sorted: &sorted,
        suffix: &suffix,
        used: vec![false; stream.num_vertices],
        picked: Vec::new(),
        best_value: 0.0,
        best_set: Vec::new(),
    };
    search.go(0, 0.0);
    Ok(result_from_edges(stream, search.best_set, weight_fn))
}

/// Optimum under the rounded weight function induced by `s`.
pub fn rounded_opt(stream: &EdgeStream, s: &RoundingScheme) -> OfflineResult {
    max_weight_matching(stream, WeightFn::Rounded(*s))
}

/// Maximum-cardinality matching (all weights treated as 1).
pub fn max_cardinality_matching(stream: &EdgeStream) -> OfflineResult {
    let cands = reduced_edges(stream, &WeightFn::Original);
    let mut fwd: HashMap<usize, usize> = HashMap::new();
    let mut compact: Vec<(usize, usize, f64)> = Vec::with_capacity(cands.len());
    for (e, _) in &cands {
        let next = fwd.len();
        let cu = *fwd.entry(e.u).or_insert(next);
        let next = fwd.len();
        let cv = *fwd.entry(e.v).or_insert(next);
        compact.push((cu, cv, 1.0));
    }
    let mate = max_weight_matching_f64(&compact, true);
    let chosen: Vec<Edge> = cands
        .iter()
        .filter_map(|(e, _)| {
            let cu = fwd[&e.u];
            if mate.get(cu) == Some(&fwd[&e.v]) {
                Some(*e)
            } else {
                None
            }
        })
        .collect();
    let mut matching = Matching::new(stream.num_vertices);
    for e in &chosen {
        matching.insert(*e, 1.0);
    }
    OfflineResult {
        objective: matching.len() as f64,
        matching,
        weight_fn: WeightFn::Original,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stream(n: usize, edges: &[(usize, usize, f64)]) -> EdgeStream {
        let mut s = EdgeStream::new(n);
        for &(u, v, w) in edges {
            s.push(u, v, w);
        }
        s
    }

    #[test]
    fn triangle_picks_heaviest_edge() {
        let st = stream(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]);
        let exact = max_weight_matching(&st, WeightFn::Original);
        let brute = brute_force_matching(&st, WeightFn::Original).unwrap();
        assert_eq!(exact.objective, 3.0);
        assert_eq!(brute.objective, 3.0);
        assert!(exact.matching.validate() && brute.matching.validate());
    }

    #[test]
    fn unit_path_takes_both_ends() {
        let st = stream(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        let exact = max_weight_matching(&st, WeightFn::Original);
        assert_eq!(exact.objective, 2.0);
        assert_eq!(exact.matching.edge_ids(), vec![0, 2]);
        assert_eq!(
            brute_force_matching(&st, WeightFn::Original).unwrap().objective,
            2.0
        );
    }

    #[test]
    fn empty_stream_has_zero_optimum() {
        let st = EdgeStream::new(3);
        assert_eq!(max_weight_matching(&st, WeightFn::Original).objective, 0.0);
        assert_eq!(
            brute_force_matching(&st, WeightFn::Original).unwrap().objective,
            0.0
        );
    }

    #[test]
    fn brute_force_refuses_large_streams() {
        let mut st = EdgeStream::new(30);
        for i in 0..23 {
            st.push(i, i + 1, 1.0);
        }
        assert_eq!(
            brute_force_matching(&st, WeightFn::Original).unwrap_err(),
            OracleError::TooManyEdges { got: 23, limit: 22 }
        );
    }

    #[test]
    fn parallel_and_zero_edges_are_handled() {
        let st = stream(3, &[(0, 1, 2.0), (1, 0, 5.0), (1, 2, 0.0)]);
        let exact = max_weight_matching(&st, WeightFn::Original);
        assert_eq!(exact.objective, 5.0);
        assert_eq!(exact.matching.edge_ids(), vec![1]);
    }

    fn random_stream(rng: &mut ChaCha8Rng, n: usize, m: usize, unit: bool) -> EdgeStream {
        let mut st = EdgeStream::new(n);
        let mut added = 0;
        while added < m {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            let w = if unit { 1.0 } else { rng.gen_range(0.0..10.0) };
            st.push(u, v, w);
            added += 1;
        }
        st
    }

    #[test]
    fn oracle_equivalence_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..120 {
            let n = rng.gen_range(2..=8);
            let m = rng.gen_range(0..=12);
            let st = random_stream(&mut rng, n, m, case % 2 == 0);
            let exact = max_weight_matching(&st, WeightFn::Original);
            let brute = brute_force_matching(&st, WeightFn::Original).unwrap();
            assert!(
                (exact.objective - brute.objective).abs() < 1e-9,
                "case {case}: blossom {} vs brute {}\n{}",
                exact.objective,
                brute.objective,
                st.to_text()
            );
            assert!(exact.matching.validate());
        }
    }

    #[test]
    fn rounded_opt_examples() {
        let s = RoundingScheme::new(4.0, 0.5).unwrap();
        let st = stream(2, &[(0, 1, 5.0)]);
        assert_eq!(rounded_opt(&st, &s).objective, 2.0);
    }

    #[test]
    fn rounded_opt_never_exceeds_original_opt() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let st = random_stream(&mut rng, 7, 10, false);
            let theta = rng.gen_range(1.5..8.0);
            let s = RoundingScheme::sample(theta, &mut rng).unwrap();
            let opt = max_weight_matching(&st, WeightFn::Original).objective;
            let ropt = rounded_opt(&st, &s).objective;
            assert!(ropt <= opt + 1e-9, "rounded {ropt} > original {opt}");
        }
    }

    #[test]
    fn rounded_value_of_original_optimum_lower_bounds_rounded_opt() {
        // Evaluating the original-weights optimum under the rounded
        // objective can only fall short of the rounded optimum.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let st = random_stream(&mut rng, 8, 12, false);
            let s = RoundingScheme::sample(5.356693980033321, &mut rng).unwrap();
            let mstar = max_weight_matching(&st, WeightFn::Original);
            let rounded_of_mstar: f64 = mstar
                .matching
                .iter()
                .map(|m| s.rounded_weight(m.edge.weight))
                .sum();
            let ropt = rounded_opt(&st, &s).objective;
            assert!(ropt >= rounded_of_mstar - 1e-9);
        }
    }

    #[test]
    fn max_cardinality_on_augmenting_path() {
        // Greedy-looking weights would pick the middle edge; maximum
        // cardinality must pick the two outer ones.
        let st = stream(4, &[(1, 2, 5.0), (0, 1, 1.0), (2, 3, 1.0)]);
        let card = max_cardinality_matching(&st);
        assert_eq!(card.objective, 2.0);
        assert_eq!(card.matching.len(), 2);
    }
}
