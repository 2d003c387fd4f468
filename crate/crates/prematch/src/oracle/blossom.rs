//! Maximum-weight matching in general graphs: Edmonds' blossom method with
//! Galil's primal-dual framing, following Joris van Rantwijk's well-known
//! O(n^3) formulation.
//!
//! This port keeps weights and dual variables in f64. Two float-specific
//! accommodations replace the integer version's exact zero tests: the edge
//! chosen by a dual update is force-marked allowable (the recomputed slack
//! may be a few ulp away from zero), and end-of-stage blossom expansion uses
//! a small epsilon relative to the weight scale.
//!
//! Duals are premultiplied by two exactly as in the integer version, so all
//! comparisons mirror the reference algorithm line for line.

/// Marker for "no vertex / no endpoint / no edge".
pub const NONE: usize = usize::MAX;

/// Returns `mate`, where `mate[v]` is the vertex matched to `v` or `NONE`.
/// Vertices are the consecutive integers covered by `edges`; at most one
/// edge per vertex pair; no self-loops; any real weights.
///
/// With `max_cardinality` the matching additionally has maximum cardinality
/// among all matchings.
pub fn max_weight_matching_f64(
    edges: &[(usize, usize, f64)],
    max_cardinality: bool,
) -> Vec<usize> {
    if edges.is_empty() {
        return Vec::new();
    }
    Solver::new(edges, max_cardinality).solve()
}

struct Solver {
    nvertex: usize,
    nedge: usize,
    maxweight: f64,
    maxcardinality: bool,
    edges: Vec<(usize, usize, f64)>,
    // endpoint[p]: vertex attached to edge endpoint p; endpoints 2k and
    // 2k+1 belong to edge k.
    endpoint: Vec<usize>,
    // neighbend[v]: remote endpoints of the edges incident to v.
    neighbend: Vec<Vec<usize>>,
    // mate[v]: remote endpoint of v's matched edge, or NONE.
    mate: Vec<usize>,
    // label[b] for a top-level blossom: 0 free, 1 = S, 2 = T; 5 marks a
    // breadcrumb during scan_blossom. Inside a T-blossom, label[v] == 2
    // means v was reached from outside.
    label: Vec<u8>,
    // labelend[b]: remote endpoint of the edge through which b got its
    // label, or NONE.
    labelend: Vec<usize>,
    // inblossom[v]: top-level blossom containing vertex v.
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    // blossomchilds[b]: sub-blossoms in order, starting at the base.
    blossomchilds: Vec<Vec<usize>>,
    // blossombase[b]: base vertex.
    blossombase: Vec<usize>,
    // blossomendps[b][i]: local endpoint of childs[i] on the edge to
    // childs[i+1 mod len].
    blossomendps: Vec<Vec<usize>>,
    // bestedge[v or b]: least-slack edge for delta2/delta3 bookkeeping.
    bestedge: Vec<usize>,
    blossombestedges: Vec<Vec<usize>>,
    unusedblossoms: Vec<usize>,
    // dualvar[v] = 2u(v) for vertices, z(b) for blossoms.
    dualvar: Vec<f64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl Solver {
    fn new(edges: &[(usize, usize, f64)], maxcardinality: bool) -> Self {
        let nedge = edges.len();
        let mut nvertex = 0;
        for &(i, j, _) in edges {
            assert!(i != j, "self-loop");
            nvertex = nvertex.max(i + 1).max(j + 1);
        }
        let maxweight = edges.iter().map(|e| e.2).fold(0.0_f64, f64::max);

        let endpoint = (0..2 * nedge)
            .map(|p| if p % 2 == 0 { edges[p / 2].0 } else { edges[p / 2].1 })
            .collect();
        let mut neighbend = vec![Vec::new(); nvertex];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }

        let mut blossombase: Vec<usize> = (0..nvertex).collect();
        blossombase.extend(vec![NONE; nvertex]);
        let mut dualvar = vec![maxweight; nvertex];
        dualvar.extend(vec![0.0; nvertex]);

        Solver {
            nvertex,
            nedge,
            maxweight,
            maxcardinality,
            edges: edges.to_vec(),
            endpoint,
            neighbend,
            mate: vec![NONE; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![NONE; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NONE; 2 * nvertex],
            blossomchilds: vec![Vec::new(); 2 * nvertex],
            blossombase,
            blossomendps: vec![Vec::new(); 2 * nvertex],
            bestedge: vec![NONE; 2 * nvertex],
            blossombestedges: vec![Vec::new(); 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: Vec::new(),
        }
    }

    /// Absolute tolerance for "this dual/slack is really zero".
    fn eps(&self) -> f64 {
        1e-12 * (1.0 + self.maxweight.abs())
    }

    // 2 * slack of edge k (not meaningful inside blossoms).
    fn slack(&self, k: usize) -> f64 {
        let (i, j, wt) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2.0 * wt
    }

    fn blossom_leaves(&self, b: usize) -> Vec<usize> {
        let mut leaves = Vec::new();
        if b < self.nvertex {
            leaves.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                if t < self.nvertex {
                    leaves.push(t);
                } else {
                    leaves.extend(self.blossom_leaves(t));
                }
            }
        }
        leaves
    }

    // Assign label t to the top-level blossom containing vertex w, reached
    // through the edge with remote endpoint p.
    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            // b became an S-blossom; scan its vertices.
            let leaves = self.blossom_leaves(b);
            self.queue.extend(leaves);
        } else {
            // b became a T-blossom; its base's mate becomes an S-vertex.
            let base = self.blossombase[b];
            debug_assert!(self.mate[base] != NONE);
            let mbase = self.mate[base];
            let v = self.endpoint[mbase];
            self.assign_label(v, 1, mbase ^ 1);
        }
    }

    // Trace back from v and w; returns the base of a new blossom, or NONE
    // if the paths end in different roots (an augmenting path exists).
    fn scan_blossom(&mut self, v: usize, w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        let mut v = v;
        let mut w = w;
        while v != NONE {
            let b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert!(self.label[b] == 1);
            path.push(b);
            self.label[b] = 5; // breadcrumb
            debug_assert!(self.labelend[b] == self.mate[self.blossombase[b]]);
            if self.labelend[b] == NONE {
                // The base of b is single; this path ends here.
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                let bt = self.inblossom[v];
                debug_assert!(self.label[bt] == 2);
                debug_assert!(self.labelend[bt] != NONE);
                v = self.endpoint[self.labelend[bt]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1; // remove breadcrumbs
        }
        base
    }

    // Build a new blossom with the given base around edge k (which joins
    // two S-blossoms); relabel it S.
    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];

        let b = self.unusedblossoms.pop().expect("out of blossom numbers");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;

        let mut childs: Vec<usize> = Vec::new();
        let mut endps: Vec<usize> = Vec::new();

        // Trace back from v to base.
        while bv != bb {
            self.blossomparent[bv] = b;
            childs.push(bv);
            endps.push(self.labelend[bv]);
            debug_assert!(
                self.label[bv] == 2
                    || (self.label[bv] == 1
                        && self.labelend[bv] == self.mate[self.blossombase[bv]])
            );
            debug_assert!(self.labelend[bv] != NONE);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        childs.push(bb);
        childs.reverse();
        endps.reverse();
        endps.push(2 * k);

        // Trace back from w to base.
        while bw != bb {
            self.blossomparent[bw] = b;
            childs.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            debug_assert!(
                self.label[bw] == 2
                    || (self.label[bw] == 1
                        && self.labelend[bw] == self.mate[self.blossombase[bw]])
            );
            debug_assert!(self.labelend[bw] != NONE);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }

        debug_assert!(self.label[bb] == 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0.0;
        self.blossomchilds[b] = childs;
        self.blossomendps[b] = endps;

        // Relabel the blossom's vertices; former T-vertices become S.
        for leaf in self.blossom_leaves(b) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }

        // Merge least-slack edge lists of the sub-blossoms.
        let mut bestedgeto = vec![NONE; 2 * self.nvertex];
        for bv in self.blossomchilds[b].clone() {
            let nblists: Vec<Vec<usize>> = if self.blossombestedges[bv].is_empty() {
                self.blossom_leaves(bv)
                    .into_iter()
                    .map(|leaf| self.neighbend[leaf].iter().map(|p| p / 2).collect())
                    .collect()
            } else {
                vec![self.blossombestedges[bv].clone()]
            };
            for nblist in nblists {
                for k in nblist {
                    // Let j be the endpoint outside the new blossom.
                    let (i0, j0, _) = self.edges[k];
                    let j = if self.inblossom[j0] == b { i0 } else { j0 };
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.blossombestedges[bv] = Vec::new();
            self.bestedge[bv] = NONE;
        }
        self.blossombestedges[b] = bestedgeto.into_iter().filter(|&k| k != NONE).collect();

        self.bestedge[b] = NONE;
        for &k in &self.blossombestedges[b] {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
    }

    // Expand blossom b into its sub-blossoms; recursive at end of stage.
    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let eps = self.eps();
        for s in self.blossomchilds[b].clone() {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] <= eps {
                self.expand_blossom(s, endstage);
            } else {
                for v in self.blossom_leaves(s) {
                    self.inblossom[v] = s;
                }
            }
        }

        // Expanding a T-blossom mid-stage: relabel the sub-blossoms on the
        // alternating path from the entry child to the base.
        if !endstage && self.label[b] == 2 {
            debug_assert!(self.labelend[b] != NONE);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let childs_len = self.blossomchilds[b].len() as i64;
            let mut j = self.blossomchilds[b]
                .iter()
                .position(|&c| c == entrychild)
                .unwrap() as i64;
            let (jstep, endptrick): (i64, i64) = if j & 1 != 0 {
                // Odd entry index: go forward around the blossom.
                j -= childs_len;
                (1, 0)
            } else {
                // Even entry index: go backward.
                (-1, 1)
            };

            // Walk from the entry to the base, alternating T/S relabels.
            let mut p = self.labelend[b];
            while j != 0 {
                // Relabel the T-sub-blossom.
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = self.endps_at(b, j - endptrick) ^ (endptrick as usize) ^ 1;
                self.label[self.endpoint[q]] = 0;
                let ep = self.endpoint[p ^ 1];
                self.assign_label(ep, 2, p);

                // The next S-sub-blossom's connecting edges become allowable.
                let fwd = self.endps_at(b, j - endptrick);
                self.allowedge[fwd / 2] = true;
                j += jstep;
                p = self.endps_at(b, j - endptrick) ^ (endptrick as usize);
                self.allowedge[p / 2] = true;
                j += jstep;
            }

            // Relabel the base T-sub-blossom without stepping to its mate.
            let bv = self.childs_at(b, j);
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;

            // The remaining sub-blossoms keep label T only if some vertex
            // of theirs was reached from outside; otherwise unlabel them.
            j += jstep;
            while self.childs_at(b, j) != entrychild {
                let bv = self.childs_at(b, j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let mut v = NONE;
                for leaf in self.blossom_leaves(bv) {
                    v = leaf;
                    if self.label[v] != 0 {
                        break;
                    }
                }
                if v != NONE && self.label[v] != 0 {
                    debug_assert!(self.label[v] == 2);
                    debug_assert!(self.inblossom[v] == bv);
                    self.label[v] = 0;
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0;
                    let lblend = self.labelend[v];
                    self.assign_label(v, 2, lblend);
                }
                j += jstep;
            }
        }

        // Recycle the blossom number.
        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossombase[b] = NONE;
        self.bestedge[b] = NONE;
        self.blossomchilds[b] = Vec::new();
        self.blossomendps[b] = Vec::new();
        self.blossombestedges[b] = Vec::new();
        self.unusedblossoms.push(b);
    }

    // Python-style possibly-negative index into blossomchilds[b].
    fn childs_at(&self, b: usize, j: i64) -> usize {
        let v = &self.blossomchilds[b];
        let idx = if j >= 0 { j as usize } else { (v.len() as i64 + j) as usize };
        v[idx]
    }

    // Python-style possibly-negative index into blossomendps[b].
    fn endps_at(&self, b: usize, j: i64) -> usize {
        let v = &self.blossomendps[b];
        let idx = if j >= 0 { j as usize } else { (v.len() as i64 + j) as usize };
        v[idx]
    }

    // Swap matched/unmatched edges along the path from vertex v to the base
    // of blossom b, then rotate the blossom so v's child becomes the base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        // Bubble up to the immediate child of b that contains v.
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }

        let i = self.blossomchilds[b].iter().position(|&c| c == t).unwrap();
        let childs_len = self.blossomchilds[b].len() as i64;
        let mut j = i as i64;
        let (jstep, endptrick): (i64, i64) = if i & 1 != 0 {
            j -= childs_len;
            (1, 0)
        } else {
            (-1, 1)
        };

        while j != 0 {
            // Step to the next sub-blossom and augment it recursively.
            j += jstep;
            let t = self.childs_at(b, j);
            let p = self.endps_at(b, j - endptrick) ^ (endptrick as usize);
            if t >= self.nvertex {
                let ep = self.endpoint[p];
                self.augment_blossom(t, ep);
            }
            // Step to the next sub-blossom; augment it too.
            j += jstep;
            let t = self.childs_at(b, j);
            if t >= self.nvertex {
                let ep = self.endpoint[p ^ 1];
                self.augment_blossom(t, ep);
            }
            // Match the edge between those two sub-blossoms.
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }

        // Rotate so the child containing the new base comes first.
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert!(self.blossombase[b] == v);
    }

    // Swap matched/unmatched edges along the augmenting path through edge k.
    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (s0, p0) in [(v, 2 * k + 1), (w, 2 * k)] {
            let mut s = s0;
            let mut p = p0;
            loop {
                let bs = self.inblossom[s];
                debug_assert!(self.label[bs] == 1);
                debug_assert!(self.labelend[bs] == self.mate[self.blossombase[bs]]);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;

                if self.labelend[bs] == NONE {
                    break; // reached a single vertex
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert!(self.label[bt] == 2);
                debug_assert!(self.labelend[bt] != NONE);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert!(self.blossombase[bt] == t);
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    // Certificate check: complementary slackness of the final primal/dual
    // pair, with float tolerances. Panics on violation.
    fn verify_optimum(&self) {
        let tol = 1e-8 * (1.0 + self.maxweight.abs());
        let vdualoffset = if self.maxcardinality {
            let min_dual = self.dualvar[..self.nvertex]
                .iter()
                .fold(f64::INFINITY, |a, &b| a.min(b));
            (-min_dual).max(0.0)
        } else {
            0.0
        };
        // Edge slacks are non-negative; matched edges have zero slack.
        for k in 0..self.nedge {
            let (i, j, _) = self.edges[k];
            let mut s = self.slack(k);
            let mut iblossoms = vec![i];
            let mut jblossoms = vec![j];
            while self.blossomparent[*iblossoms.last().unwrap()] != NONE {
                iblossoms.push(self.blossomparent[*iblossoms.last().unwrap()]);
            }
            while self.blossomparent[*jblossoms.last().unwrap()] != NONE {
                jblossoms.push(self.blossomparent[*jblossoms.last().unwrap()]);
            }
            iblossoms.reverse();
            jblossoms.reverse();
            for (&bi, &bj) in iblossoms.iter().zip(jblossoms.iter()) {
                if bi != bj {
                    break;
                }
                s += 2.0 * self.dualvar[bi];
            }
            assert!(s >= -tol, "negative slack on edge {k}");
            if self.mate[i] / 2 == k || self.mate[j] / 2 == k {
                assert!(self.mate[i] / 2 == k && self.mate[j] / 2 == k);
                assert!(s.abs() <= tol, "matched edge {k} has nonzero slack {s}");
            }
        }
        // Single vertices have zero dual.
        for v in 0..self.nvertex {
            assert!(
                self.mate[v] != NONE || self.dualvar[v] + vdualoffset <= tol,
                "single vertex {v} has positive dual"
            );
        }
        // Blossoms with positive dual are full.
        for b in self.nvertex..2 * self.nvertex {
            if self.blossombase[b] != NONE && self.dualvar[b] > tol {
                assert!(self.blossomendps[b].len() % 2 == 1);
                for (ix, &p) in self.blossomendps[b].iter().enumerate() {
                    if ix % 2 == 1 {
                        assert!(self.mate[self.endpoint[p]] == p ^ 1);
                        assert!(self.mate[self.endpoint[p ^ 1]] == p);
                    }
                }
            }
        }
    }

    fn solve(&mut self) -> Vec<usize> {
        // Each stage augments the matching once; at most nvertex stages.
        for _ in 0..self.nvertex {
            self.label = vec![0; 2 * self.nvertex];
            self.bestedge = vec![NONE; 2 * self.nvertex];
            for b in self.nvertex..2 * self.nvertex {
                self.blossombestedges[b] = Vec::new();
            }
            // Labels were lost, so allowability must be recomputed.
            self.allowedge = vec![false; self.nedge];
            self.queue = Vec::new();

            // All single vertices start as S-roots.
            for v in 0..self.nvertex {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }

            let mut augmented = false;
            loop {
                // Substage: grow the forest; if no augmenting path turns
                // up, pump slack out of the duals and retry.
                while let Some(v) = self.queue.pop() {
                    debug_assert!(self.label[self.inblossom[v]] == 1);
                    let mut found_augment = false;
                    for p in self.neighbend[v].clone() {
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue; // internal to a blossom
                        }
                        let mut kslack = 0.0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0.0 {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                // w is free: label it T, its mate S.
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                // S-S edge: new blossom or augmenting path.
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    found_augment = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                // w is unreached inside a T-blossom.
                                debug_assert!(self.label[self.inblossom[w]] == 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            // Track least-slack edge between S-blossoms.
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE
                                || kslack < self.slack(self.bestedge[b])
                            {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0 {
                            // Track least-slack edge reaching a free vertex.
                            if self.bestedge[w] == NONE
                                || kslack < self.slack(self.bestedge[w])
                            {
                                self.bestedge[w] = k;
                            }
                        }
                    }
                    if found_augment {
                        break;
                    }
                }
                if augmented {
                    break;
                }

                // Dual update: pick the tightest of the four delta bounds.
                let mut deltatype = -1;
                let mut delta = 0.0;
                let mut deltaedge = 0;
                let mut deltablossom = 0;

                if !self.maxcardinality {
                    deltatype = 1;
                    delta = self.dualvar[..self.nvertex]
                        .iter()
                        .fold(f64::INFINITY, |a, &b| a.min(b));
                }
                // delta2: least slack to a free vertex.
                for v in 0..self.nvertex {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                // delta3: half the least S-S slack.
                for b in 0..2 * self.nvertex {
                    if self.blossomparent[b] == NONE
                        && self.label[b] == 1
                        && self.bestedge[b] != NONE
                    {
                        let d = self.slack(self.bestedge[b]) / 2.0;
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                // delta4: least z of a T-blossom.
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == -1 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == -1 {
                    // Max-cardinality corner: no bound applies; clamp and
                    // finish.
                    debug_assert!(self.maxcardinality);
                    deltatype = 1;
                    delta = self.dualvar[..self.nvertex]
                        .iter()
                        .fold(f64::INFINITY, |a, &b| a.min(b))
                        .max(0.0);
                }

                // Apply delta.
                for v in 0..self.nvertex {
                    match self.label[self.inblossom[v]] {
                        0 => {}
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        l => unreachable!("vertex label {l}"),
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            0 => {}
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            l => unreachable!("blossom label {l}"),
                        }
                    }
                }

                match deltatype {
                    1 => break, // optimum reached
                    2 => {
                        // The delta edge became tight; force-allow it (its
                        // recomputed slack may be off by rounding) and scan
                        // its S endpoint again.
                        self.allowedge[deltaedge] = true;
                        let (mut i, j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        debug_assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    4 => self.expand_blossom(deltablossom, false),
                    t => unreachable!("deltatype {t}"),
                }
            }

            if !augmented {
                break;
            }

            // End of stage: expand S-blossoms whose dual fell to zero.
            for b in self.nvertex..2 * self.nvertex {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b] <= self.eps()
                {
                    self.expand_blossom(b, true);
                }
            }
        }

        self.verify_optimum();

        // Turn endpoint-valued mate[] into partner vertices.
        for v in 0..self.nvertex {
            if self.mate[v] != NONE {
                self.mate[v] = self.endpoint[self.mate[v]];
            }
        }
        for v in 0..self.nvertex {
            debug_assert!(self.mate[v] == NONE || self.mate[self.mate[v]] == v);
        }
        self.mate.clone()
    }
}
