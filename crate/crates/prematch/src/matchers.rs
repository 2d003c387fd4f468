//! Online preemptive matching algorithms behind a single step interface.
//!
//! Each step looks at the current matching and the arriving edge and decides
//! accept (possibly preempting the conflicting matched edges) or reject.
//! Rejected and preempted edges never return: state is the matching alone.

use crate::graph::{Edge, EdgeStream, Matching};
use crate::rounding::RoundingScheme;
use crate::trace::{Action, StreamTrace, TraceEvent};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MatcherError {
    #[error("beta must be >= 1 (got {0})")]
    BadBeta(f64),
}

/// Outcome of one arrival. `preempted` holds arrival ids of displaced
/// matched edges; it is non-empty only for accepts and never exceeds 2.
#[derive(Debug, Clone, PartialEq)]
pub struct MatcherDecision {
    pub action: Action,
    pub preempted: Vec<usize>,
}

impl MatcherDecision {
    fn reject() -> Self {
        MatcherDecision {
            action: Action::Reject,
            preempted: Vec::new(),
        }
    }

    fn accept(preempted: Vec<usize>) -> Self {
        MatcherDecision {
            action: Action::Accept,
            preempted,
        }
    }
}

/// Insert the arrival iff it beats every conflicting matched edge strictly
/// in rounded weight; the beaten edges are preempted. Zero-weight arrivals
/// are rejected outright (their rounded weight is 0, which can never beat a
/// matched edge and would never be beaten either).
pub fn geometric_step(m: &Matching, e: &Edge, s: &RoundingScheme) -> MatcherDecision {
    let rounded = s.rounded_weight(e.weight);
    if rounded <= 0.0 {
        return MatcherDecision::reject();
    }
    let conflicts = m.conflicting_edges(e);
    if conflicts.iter().all(|c| c.rounded < rounded) {
        MatcherDecision::accept(conflicts.iter().map(|c| c.edge.id).collect())
    } else {
        MatcherDecision::reject()
    }
}

/// Accept whenever both endpoints are free; never preempt.
pub fn greedy_step(m: &Matching, e: &Edge) -> MatcherDecision {
    if m.conflicting_edges(e).is_empty() {
        MatcherDecision::accept(Vec::new())
    } else {
        MatcherDecision::reject()
    }
}

/// Deterministic preemptive baseline on original weights: accept iff the
/// arrival outweighs the conflicting matched edges by a factor beta >= 1.
pub fn improve_factor_step(m: &Matching, e: &Edge, beta: f64) -> MatcherDecision {
    assert!(beta >= 1.0, "beta must be >= 1");
    let conflicts = m.conflicting_edges(e);
    let blocked: f64 = conflicts.iter().map(|c| c.edge.weight).sum();
    if e.weight > beta * blocked {
        MatcherDecision::accept(conflicts.iter().map(|c| c.edge.id).collect())
    } else {
        MatcherDecision::reject()
    }
}

/// A matcher plus its run parameters. The geometric matcher carries the
/// rounding scheme sampled once before the stream starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Geometric(RoundingScheme),
    Greedy,
    ImproveFactor { beta: f64 },
}

impl Algorithm {
    pub fn improve_factor(beta: f64) -> Result<Self, MatcherError> {
        if !(beta >= 1.0) {
            return Err(MatcherError::BadBeta(beta));
        }
        Ok(Algorithm::ImproveFactor { beta })
    }

    pub fn step(&self, m: &Matching, e: &Edge) -> MatcherDecision {
        match self {
            Algorithm::Geometric(s) => geometric_step(m, e, s),
            Algorithm::Greedy => greedy_step(m, e),
            Algorithm::ImproveFactor { beta } => improve_factor_step(m, e, *beta),
        }
    }

    /// Rounded weight recorded for an accepted edge: the scheme's rounding
    /// for the geometric matcher, the original weight otherwise.
    fn assigned_rounded(&self, e: &Edge) -> f64 {
        match self {
            Algorithm::Geometric(s) => s.rounded_weight(e.weight),
            _ => e.weight,
        }
    }
}

/// Runs the algorithm over the stream and records every decision.
pub fn run_matcher(algorithm: &Algorithm, stream: &EdgeStream) -> StreamTrace {
    let mut m = Matching::new(stream.num_vertices);
    let mut events = Vec::with_capacity(stream.len());
    for e in &stream.edges {
        let decision = algorithm.step(&m, e);
        if decision.action == Action::Accept {
            for &id in &decision.preempted {
                m.remove(id);
            }
            m.insert(*e, algorithm.assigned_rounded(e));
        }
        events.push(TraceEvent {
            edge: *e,
            action: decision.action,
            preempted: decision.preempted,
        });
    }
    StreamTrace {
        num_vertices: stream.num_vertices,
        events,
        final_matching: m.edge_ids(),
        weight: m.weight(),
        rounded_weight: m.rounded_weight(),
    }
}

/// Untraced fast path: just the final matching.
pub fn run_final(algorithm: &Algorithm, stream: &EdgeStream) -> Matching {
    let mut m = Matching::new(stream.num_vertices);
    for e in &stream.edges {
        let decision = algorithm.step(&m, e);
        if decision.action == Action::Accept {
            for &id in &decision.preempted {
                m.remove(id);
            }
            m.insert(*e, algorithm.assigned_rounded(e));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(n: usize, edges: &[(usize, usize, f64)]) -> EdgeStream {
        let mut s = EdgeStream::new(n);
        for &(u, v, w) in edges {
            s.push(u, v, w);
        }
        s
    }

    #[test]
    fn geometric_worked_trace() {
        // theta=2, tau=1: rounded weights 4, 8, 2. The middle arrival beats
        // the first (4 < 8) and takes its place; the last one loses to it.
        let s = RoundingScheme::new(2.0, 1.0).unwrap();
        let algo = Algorithm::Geometric(s);
        let st = stream(4, &[(0, 1, 4.0), (1, 2, 8.0), (2, 3, 3.0)]);
        let trace = run_matcher(&algo, &st);
        assert!(trace.validate_against(&st));
        assert_eq!(trace.events[0].action, Action::Accept);
        assert!(trace.events[0].preempted.is_empty());
        assert_eq!(trace.events[1].action, Action::Accept);
        assert_eq!(trace.events[1].preempted, vec![0]);
        assert_eq!(trace.events[2].action, Action::Reject);
        assert_eq!(trace.final_matching, vec![1]);
        assert_eq!(trace.weight, 8.0);
        assert_eq!(trace.rounded_weight, 8.0);
        let replayed = trace.replay_with(|e| s.rounded_weight(e.weight));
        assert_eq!(replayed.edge_ids(), trace.final_matching);
        assert_eq!(replayed.weight(), trace.weight);
    }

    #[test]
    fn geometric_rejects_equal_class() {
        // Both weights land in class [4, 8); the strict inequality fails.
        let s = RoundingScheme::new(2.0, 1.0).unwrap();
        let algo = Algorithm::Geometric(s);
        let trace = run_matcher(&algo, &stream(3, &[(0, 1, 4.0), (1, 2, 5.0)]));
        assert_eq!(trace.events[1].action, Action::Reject);
        assert_eq!(trace.final_matching, vec![0]);
    }

    #[test]
    fn geometric_preempts_two_lighter_edges() {
        let s = RoundingScheme::new(2.0, 1.0).unwrap();
        let algo = Algorithm::Geometric(s);
        let trace = run_matcher(&algo, &stream(4, &[(0, 1, 2.0), (2, 3, 2.0), (1, 2, 9.0)]));
        assert_eq!(trace.events[2].action, Action::Accept);
        assert_eq!(trace.events[2].preempted, vec![0, 1]);
        assert_eq!(trace.final_matching, vec![2]);
        assert_eq!(trace.weight, 9.0);
    }

    #[test]
    fn geometric_rejects_zero_weight() {
        let s = RoundingScheme::new(3.0, 0.5).unwrap();
        let algo = Algorithm::Geometric(s);
        let trace = run_matcher(&algo, &stream(2, &[(0, 1, 0.0)]));
        assert_eq!(trace.events[0].action, Action::Reject);
        assert!(trace.final_matching.is_empty());
    }

    #[test]
    fn geometric_empty_stream() {
        let s = RoundingScheme::new(2.5, 0.3).unwrap();
        let trace = run_matcher(&Algorithm::Geometric(s), &EdgeStream::new(5));
        assert!(trace.events.is_empty());
        assert!(trace.final_matching.is_empty());
        assert_eq!(trace.weight, 0.0);
    }

    #[test]
    fn greedy_path() {
        let trace = run_matcher(
            &Algorithm::Greedy,
            &stream(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]),
        );
        let actions: Vec<Action> = trace.events.iter().map(|e| e.action).collect();
        assert_eq!(actions, vec![Action::Accept, Action::Reject, Action::Accept]);
        assert_eq!(trace.final_matching.len(), 2);
        assert!(trace.events.iter().all(|e| e.preempted.is_empty()));
    }

    #[test]
    fn improve_factor_thresholds() {
        let mut m = Matching::new(4);
        m.insert(Edge { id: 0, u: 0, v: 1, weight: 1.0 }, 1.0);
        let e = Edge { id: 1, u: 1, v: 2, weight: 2.0 };
        assert_eq!(
            improve_factor_step(&m, &e, 1.0),
            MatcherDecision::accept(vec![0])
        );
        assert_eq!(improve_factor_step(&m, &e, 2.0), MatcherDecision::reject());

        let mut m = Matching::new(4);
        m.insert(Edge { id: 0, u: 0, v: 1, weight: 1.0 }, 1.0);
        m.insert(Edge { id: 1, u: 2, v: 3, weight: 1.0 }, 1.0);
        let e = Edge { id: 2, u: 1, v: 2, weight: 3.0 };
        assert_eq!(
            improve_factor_step(&m, &e, 1.0),
            MatcherDecision::accept(vec![0, 1])
        );
        assert!(Algorithm::improve_factor(0.5).is_err());
    }

    #[test]
    fn rounded_total_strictly_increases_at_accepts_for_theta_above_two() {
        let s = RoundingScheme::new(3.0, 1.0).unwrap();
        let st = stream(
            6,
            &[
                (0, 1, 1.0),
                (2, 3, 1.0),
                (1, 2, 9.5),
                (3, 4, 2.9),
                (4, 5, 100.0),
                (0, 1, 3.0),
            ],
        );
        let mut m = Matching::new(st.num_vertices);
        let mut last_total = 0.0;
        for e in &st.edges {
            let d = geometric_step(&m, e, &s);
            if d.action == Action::Accept {
                for &id in &d.preempted {
                    m.remove(id);
                }
                m.insert(*e, s.rounded_weight(e.weight));
                assert!(m.rounded_weight() > last_total);
                last_total = m.rounded_weight();
            }
        }
        assert!(m.len() >= 2);
    }

    #[test]
    fn identical_runs_produce_identical_traces() {
        let s = RoundingScheme::new(5.35, 0.42).unwrap();
        let algo = Algorithm::Geometric(s);
        let st = stream(5, &[(0, 1, 3.0), (1, 2, 7.0), (2, 3, 0.9), (3, 4, 21.0)]);
        assert_eq!(run_matcher(&algo, &st), run_matcher(&algo, &st));
        let fin = run_final(&algo, &st);
        assert_eq!(fin.edge_ids(), run_matcher(&algo, &st).final_matching);
    }
}
