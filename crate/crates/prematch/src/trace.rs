//! Per-arrival event logs of a matcher run and their replay.

use crate::graph::{Edge, EdgeStream, Matching};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Accept,
    Reject,
}

/// What happened when one edge arrived. `preempted` lists the arrival ids of
/// the matched edges displaced by this accept (at most 2, one per endpoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub edge: Edge,
    pub action: Action,
    pub preempted: Vec<usize>,
}

/// Full run record: one event per arrival plus the final matching summary.
///
/// The trace is self-contained (events embed the edges), so it can be
/// replayed without the originating stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamTrace {
    pub num_vertices: usize,
    pub events: Vec<TraceEvent>,
    /// Arrival ids of the surviving edges, ascending.
    pub final_matching: Vec<usize>,
    /// Original-weight total of the final matching.
    pub weight: f64,
    /// Assigned rounded-weight total of the final matching.
    pub rounded_weight: f64,
}

impl StreamTrace {
    /// Applies the recorded events to an empty matching. `rounded` supplies
    /// the rounded weight to store per accepted edge (`|e| e.weight` for
    /// unrounded matchers).
    pub fn replay_with(&self, rounded: impl Fn(&Edge) -> f64) -> Matching {
        let mut m = Matching::new(self.num_vertices);
        for ev in &self.events {
            if ev.action == Action::Accept {
                for &id in &ev.preempted {
                    m.remove(id);
                }
                m.insert(ev.edge, rounded(&ev.edge));
            }
        }
        m
    }

    /// Replay treating rounded weights as the original weights.
    pub fn replay(&self) -> Matching {
        self.replay_with(|e| e.weight)
    }

    /// Structural checks: events mirror the stream one-to-one, rejects never
    /// preempt, at most two preemptions per accept, and every preempted id
    /// was accepted earlier and preempted only once.
    pub fn validate_against(&self, stream: &EdgeStream) -> bool {
        if self.num_vertices != stream.num_vertices || self.events.len() != stream.edges.len() {
            return false;
        }
        let mut accepted: HashSet<usize> = HashSet::new();
        let mut preempted: HashSet<usize> = HashSet::new();
        for (ev, e) in self.events.iter().zip(&stream.edges) {
            if ev.edge != *e {
                return false;
            }
            match ev.action {
                Action::Reject => {
                    if !ev.preempted.is_empty() {
                        return false;
                    }
                }
                Action::Accept => {
                    if ev.preempted.len() > 2 {
                        return false;
                    }
                    for &id in &ev.preempted {
                        if !accepted.contains(&id) || !preempted.insert(id) {
                            return false;
                        }
                        accepted.remove(&id);
                    }
                    accepted.insert(ev.edge.id);
                }
            }
        }
        let mut survivors: Vec<usize> = accepted.into_iter().collect();
        survivors.sort_unstable();
        survivors == self.final_matching
    }
}
