//! Edges, arrival-ordered edge streams, and conflict-free matchings.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// A weighted edge tagged with its arrival position.
///
/// `id` is the 0-based index of the edge in its stream; parallel edges are
/// allowed and are distinguished by id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn touches(&self, vertex: usize) -> bool {
        self.u == vertex || self.v == vertex
    }

    pub fn shares_endpoint(&self, other: &Edge) -> bool {
        self.touches(other.u) || self.touches(other.v)
    }
}

/// An ordered arrival sequence of edges over vertices `0..num_vertices`.
///
/// `num_vertices` is explicit so isolated vertices are representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStream {
    pub num_vertices: usize,
    pub edges: Vec<Edge>,
}

/// Error produced when a stream file fails to parse; names the line.
#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct StreamParseError {
    pub line: usize,
    pub message: String,
}

impl StreamParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        StreamParseError {
            line,
            message: message.into(),
        }
    }
}

impl EdgeStream {
    pub fn new(num_vertices: usize) -> Self {
        EdgeStream {
            num_vertices,
            edges: Vec::new(),
        }
    }

    /// Appends an edge, assigning the next arrival id.
    pub fn push(&mut self, u: usize, v: usize, weight: f64) {
        let id = self.edges.len();
        debug_assert!(u != v && u < self.num_vertices && v < self.num_vertices);
        self.edges.push(Edge { id, u, v, weight });
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Checks ids are dense, endpoints are in range and distinct, and
    /// weights are finite and non-negative.
    pub fn validate(&self) -> bool {
        self.edges.iter().enumerate().all(|(i, e)| {
            e.id == i
                && e.u != e.v
                && e.u < self.num_vertices
                && e.v < self.num_vertices
                && e.weight.is_finite()
                && e.weight >= 0.0
        })
    }

    /// Parses the text stream format: optional `#` comment lines, one
    /// `s <num_vertices>` header, then one `<u> <v> <weight>` line per edge
    /// in arrival order.
    pub fn parse(text: &str) -> Result<Self, StreamParseError> {
        let mut stream: Option<EdgeStream> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            match &mut stream {
                None => {
                    if tokens.next() != Some("s") {
                        return Err(StreamParseError::new(
                            line_no,
                            "expected header `s <num_vertices>`",
                        ));
                    }
                    let n: usize = tokens
                        .next()
                        .ok_or_else(|| StreamParseError::new(line_no, "missing vertex count"))?
                        .parse()
                        .map_err(|e| {
                            StreamParseError::new(line_no, format!("bad vertex count: {e}"))
                        })?;
                    if n == 0 {
                        return Err(StreamParseError::new(line_no, "vertex count must be > 0"));
                    }
                    if tokens.next().is_some() {
                        return Err(StreamParseError::new(line_no, "trailing tokens after header"));
                    }
                    stream = Some(EdgeStream::new(n));
                }
                Some(s) => {
                    let mut field = |name: &str| {
                        tokens
                            .next()
                            .ok_or_else(|| StreamParseError::new(line_no, format!("missing {name}")))
                    };
                    let u: usize = field("endpoint")?.parse().map_err(|e| {
                        StreamParseError::new(line_no, format!("bad endpoint: {e}"))
                    })?;
                    let v: usize = field("endpoint")?.parse().map_err(|e| {
                        StreamParseError::new(line_no, format!("bad endpoint: {e}"))
                    })?;
                    let weight: f64 = field("weight")?.parse().map_err(|e| {
                        StreamParseError::new(line_no, format!("bad weight: {e}"))
                    })?;
                    if tokens.next().is_some() {
                        return Err(StreamParseError::new(line_no, "trailing tokens after edge"));
                    }
                    if u == v {
                        return Err(StreamParseError::new(line_no, "self-loop"));
                    }
                    if u >= s.num_vertices || v >= s.num_vertices {
                        return Err(StreamParseError::new(
                            line_no,
                            format!("endpoint out of range (num_vertices = {})", s.num_vertices),
                        ));
                    }
                    if !weight.is_finite() || weight < 0.0 {
                        return Err(StreamParseError::new(
                            line_no,
                            "weight must be finite and non-negative",
                        ));
                    }
                    s.push(u, v, weight);
                }
            }
        }
        stream.ok_or_else(|| StreamParseError::new(1, "empty stream file (no `s` header)"))
    }

    /// Serializes to the text stream format. `f64` Display round-trips
    /// exactly, so parse(to_text(s)) == s bit-for-bit.
    pub fn to_text(&self) -> String {
        let mut out = format!("s {}\n", self.num_vertices);
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.u, e.v, e.weight));
        }
        out
    }
}

/// A matched edge together with the rounded weight the matcher assigned at
/// insertion time (equal to the original weight for unrounded matchers).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedEdge {
    pub edge: Edge,
    pub rounded: f64,
}

/// A conflict-free edge set with running weight totals.
///
/// Single writer; lookups by endpoint are O(1) via the vertex slot index.
#[derive(Debug, Clone)]
pub struct Matching {
    slot: Vec<Option<usize>>,
    members: BTreeMap<usize, MatchedEdge>,
    weight: f64,
    rounded_weight: f64,
}

impl Matching {
    pub fn new(num_vertices: usize) -> Self {
        Matching {
            slot: vec![None; num_vertices],
            members: BTreeMap::new(),
            weight: 0.0,
            rounded_weight: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sum of original weights of the members.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Sum of assigned rounded weights of the members.
    pub fn rounded_weight(&self) -> f64 {
        self.rounded_weight
    }

    pub fn contains(&self, edge_id: usize) -> bool {
        self.members.contains_key(&edge_id)
    }

    pub fn get(&self, edge_id: usize) -> Option<&MatchedEdge> {
        self.members.get(&edge_id)
    }

    /// Member edge covering `vertex`, if any.
    pub fn at_vertex(&self, vertex: usize) -> Option<&MatchedEdge> {
        self.slot[vertex].and_then(|id| self.members.get(&id))
    }

    /// Members in ascending arrival id order.
    pub fn iter(&self) -> impl Iterator<Item = &MatchedEdge> {
        self.members.values()
    }

    pub fn edge_ids(&self) -> Vec<usize> {
        self.members.keys().copied().collect()
    }

    /// The members sharing an endpoint with `e`: the set X(M, e).
    /// At most two edges qualify (one per endpoint of `e`).
    pub fn conflicting_edges(&self, e: &Edge) -> Vec<MatchedEdge> {
        let mut out = Vec::with_capacity(2);
        let mut ids = [self.slot[e.u], self.slot[e.v]];
        if ids[0] == ids[1] {
            ids[1] = None; // both endpoints blocked by the same parallel edge
        }
        for id in ids.into_iter().flatten() {
            out.push(self.members[&id]);
        }
        out
    }

    /// Inserts a conflict-free edge. Panics if an endpoint is occupied;
    /// callers must preempt first.
    pub fn insert(&mut self, edge: Edge, rounded: f64) {
        assert!(
            self.slot[edge.u].is_none() && self.slot[edge.v].is_none(),
            "insert would violate the matching property"
        );
        self.slot[edge.u] = Some(edge.id);
        self.slot[edge.v] = Some(edge.id);
        self.weight += edge.weight;
        self.rounded_weight += rounded;
        self.members.insert(edge.id, MatchedEdge { edge, rounded });
    }

    /// Removes a member by arrival id and returns it.
    pub fn remove(&mut self, edge_id: usize) -> MatchedEdge {
        let m = self
            .members
            .remove(&edge_id)
            .expect("remove of non-member edge");
        self.slot[m.edge.u] = None;
        self.slot[m.edge.v] = None;
        self.weight -= m.edge.weight;
        self.rounded_weight -= m.rounded;
        m
    }

    /// Checks the endpoint index is consistent and the running totals match
    /// freshly recomputed sums.
    pub fn validate(&self) -> bool {
        for (id, m) in &self.members {
            if m.edge.id != *id
                || self.slot[m.edge.u] != Some(*id)
                || self.slot[m.edge.v] != Some(*id)
            {
                return false;
            }
        }
        for (v, s) in self.slot.iter().enumerate() {
            if let Some(id) = s {
                match self.members.get(id) {
                    Some(m) if m.edge.touches(v) => {}
                    _ => return false,
                }
            }
        }
        let w: f64 = self.members.values().map(|m| m.edge.weight).sum();
        let r: f64 = self.members.values().map(|m| m.rounded).sum();
        let tol = 1e-9 * (1.0 + w.abs().max(r.abs()));
        (self.weight - w).abs() <= tol && (self.rounded_weight - r).abs() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(id: usize, u: usize, v: usize, weight: f64) -> Edge {
        Edge { id, u, v, weight }
    }

    #[test]
    fn conflicts_empty_matching() {
        let m = Matching::new(4);
        assert!(m.conflicting_edges(&edge(0, 0, 1, 1.0)).is_empty());
    }

    #[test]
    fn conflicts_single_shared_endpoint() {
        let mut m = Matching::new(4);
        m.insert(edge(0, 0, 1, 1.0), 1.0);
        let x = m.conflicting_edges(&edge(1, 1, 2, 1.0));
        assert_eq!(x.len(), 1);
        assert_eq!(x[0].edge.id, 0);
    }

    #[test]
    fn conflicts_both_endpoints() {
        let mut m = Matching::new(4);
        m.insert(edge(0, 0, 1, 1.0), 1.0);
        m.insert(edge(1, 2, 3, 1.0), 1.0);
        let x = m.conflicting_edges(&edge(2, 1, 2, 1.0));
        assert_eq!(x.len(), 2);
        let ids: Vec<usize> = x.iter().map(|m| m.edge.id).collect();
        assert_eq!(ids, vec![0, 1]);
    }

    #[test]
    fn conflicts_parallel_edge_counted_once() {
        let mut m = Matching::new(2);
        m.insert(edge(0, 0, 1, 1.0), 1.0);
        let x = m.conflicting_edges(&edge(1, 0, 1, 2.0));
        assert_eq!(x.len(), 1);
    }

    #[test]
    fn weight_totals() {
        let mut m = Matching::new(4);
        assert_eq!(m.weight(), 0.0);
        m.insert(edge(0, 0, 1, 4.0), 4.0);
        assert_eq!(m.weight(), 4.0);
        m.insert(edge(1, 2, 3, 3.0), 2.0);
        assert_eq!(m.weight(), 7.0);
        assert_eq!(m.rounded_weight(), 6.0);
        assert!(m.validate());
        let removed = m.remove(0);
        assert_eq!(removed.edge.weight, 4.0);
        assert_eq!(m.weight(), 3.0);
        assert!(m.validate());
    }

    #[test]
    #[should_panic(expected = "matching property")]
    fn insert_rejects_shared_endpoint() {
        let mut m = Matching::new(3);
        m.insert(edge(0, 0, 1, 1.0), 1.0);
        m.insert(edge(1, 1, 2, 1.0), 1.0);
    }

    #[test]
    fn validate_detects_corrupted_index() {
        let mut m = Matching::new(3);
        m.insert(edge(0, 0, 1, 1.0), 1.0);
        assert!(m.validate());
        m.slot[2] = Some(0); // vertex 2 is not an endpoint of edge 0
        assert!(!m.validate());
    }

    #[test]
    fn stream_round_trip() {
        let mut s = EdgeStream::new(5);
        s.push(0, 1, 4.0);
        s.push(1, 2, 0.125);
        s.push(3, 4, 13.2);
        let text = s.to_text();
        let parsed = EdgeStream::parse(&text).unwrap();
        assert_eq!(parsed, s);
    }

    #[test]
    fn parse_accepts_comments_and_blanks() {
        let text = "# layered instance\n\ns 3\n0 1 1\n# mid-stream comment\n1 2 2.5\n";
        let s = EdgeStream::parse(text).unwrap();
        assert_eq!(s.num_vertices, 3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.edges[1].weight, 2.5);
        assert!(s.validate());
    }

    #[test]
    fn parse_errors_name_lines() {
        let err = EdgeStream::parse("s 3\n0 1 1\n0 oops 1\n").unwrap_err();
        assert_eq!(err.line, 3);
        let err = EdgeStream::parse("# only comments\n").unwrap_err();
        assert_eq!(err.line, 1);
        let err = EdgeStream::parse("s 3\n0 7 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("out of range"));
        let err = EdgeStream::parse("s 3\n1 1 1\n").unwrap_err();
        assert_eq!(err.message, "self-loop");
        let err = EdgeStream::parse("s 3\n0 1 -2\n").unwrap_err();
        assert!(err.message.contains("non-negative"));
    }

    #[test]
    fn weight_display_round_trips_exactly() {
        // to_text uses f64 Display, which is shortest-round-trip in Rust.
        for w in [0.1, 1.0 / 3.0, 5.356_601_001, f64::MIN_POSITIVE, 1e300] {
            let printed = format!("{w}");
            assert_eq!(printed.parse::<f64>().unwrap(), w);
        }
    }
}
