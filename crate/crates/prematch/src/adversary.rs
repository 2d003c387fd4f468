//! Layered adversarial instance distribution for unweighted preemptive
//! matching, its offline certificate, and free-root statistics.
//!
//! An instance has `L` layers of `2n` vertices. Layer 1 designates its
//! first `n` vertices as roots. For each layer in turn, the roots are
//! processed in a uniformly random order; each root emits unit-weight edges
//! to every currently-white vertex of the next layer (ascending vertex id),
//! and after its round one uniformly random white vertex is colored black.
//! The `n` never-colored vertices become the next layer's roots. The stream
//! is a function of the seed alone, so it is oblivious to the matcher.
//!
//! Against this distribution, any online matcher's expected cardinality
//! falls short of the offline optimum `(L-1)n` by a factor approaching
//! `1 + ln 2` as the layers grow: a root matched into the next layer blocks
//! a root there with probability about `H_{2n} - H_n`, which drives the
//! free-root recursion `E[F_{l+1}] = n - (H_{2n} - H_n) E[F_l]`.

use crate::graph::{EdgeStream, Matching};
use crate::matchers::Algorithm;
use crate::seeding::derive_seed;
use crate::trace::{Action, StreamTrace};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AdversaryError {
    #[error("need at least 2 layers (got {0})")]
    TooFewLayers(usize),
    #[error("need width >= 1 (got {0})")]
    ZeroWidth(usize),
    #[error("run does not match the trace's stream")]
    MismatchedRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredParams {
    pub layers: usize,
    pub width: usize,
    pub seed: u64,
}

impl LayeredParams {
    fn check(&self) -> Result<(), AdversaryError> {
        if self.layers < 2 {
            return Err(AdversaryError::TooFewLayers(self.layers));
        }
        if self.width < 1 {
            return Err(AdversaryError::ZeroWidth(self.width));
        }
        Ok(())
    }
}

/// One layer's randomness: its roots, the order they were processed in, and
/// the vertices of the next layer colored black (in coloring order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    /// The layer's root set, ascending.
    pub roots: Vec<usize>,
    /// Roots in processing order (a permutation of `roots`).
    pub order: Vec<usize>,
    /// Next-layer vertices colored black, in coloring order.
    pub blacks: Vec<usize>,
    /// Index into the stream of this layer's first emitted edge.
    pub first_edge: usize,
}

/// A sampled instance: the stream plus everything needed to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredTrace {
    pub params: LayeredParams,
    pub stream: EdgeStream,
    /// Records for layers 1..L-1 (the layers that emit edges).
    pub layers: Vec<LayerRecord>,
    /// Roots of the final layer (the last survivors), ascending.
    pub final_roots: Vec<usize>,
}

/// Samples an instance. Layer `l` (1-based) owns vertex ids
/// `(l-1)*2n .. l*2n`; layer 1's roots are its first `n` ids.
pub fn generate_layered(params: &LayeredParams) -> Result<LayeredTrace, AdversaryError> {
    params.check()?;
    let (layers, n) = (params.layers, params.width);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut stream = EdgeStream::new(2 * n * layers);
    let mut records = Vec::with_capacity(layers - 1);
    let mut roots: Vec<usize> = (0..n).collect();

    for l in 1..layers {
        let next_base = 2 * n * l;
        let mut whites: Vec<usize> = (next_base..next_base + 2 * n).collect();
        let mut order = roots.clone();
        order.shuffle(&mut rng);
        let first_edge = stream.len();
        let mut blacks = Vec::with_capacity(n);
        for &root in &order {
            // The white list stays ascending: removals preserve order.
            for &target in &whites {
                stream.push(root, target, 1.0);
            }
            let black = whites.remove(rng.gen_range(0..whites.len()));
            blacks.push(black);
        }
        records.push(LayerRecord {
            roots,
            order,
            blacks,
            first_edge,
        });
        roots = whites; // the n survivors root the next layer
    }

    Ok(LayeredTrace {
        params: *params,
        stream,
        layers: records,
        final_roots: roots,
    })
}

/// The certificate matching behind the closed-form optimum: the i-th
/// processed root of each layer pairs with the i-th vertex colored black in
/// the next layer (it was still white during that root's round, so the edge
/// exists). Always valid, always cardinality `(L-1)n`.
pub fn offline_certificate(trace: &LayeredTrace) -> Matching {
    let mut by_pair: HashMap<(usize, usize), usize> = HashMap::new();
    for e in &trace.stream.edges {
        by_pair.entry((e.u, e.v)).or_insert(e.id);
    }
    let mut m = Matching::new(trace.stream.num_vertices);
    for rec in &trace.layers {
        for (root, black) in rec.order.iter().zip(&rec.blacks) {
            let id = by_pair[&(*root, *black)];
            m.insert(trace.stream.edges[id], 1.0);
        }
    }
    m
}

/// Free-root counts of one run: `free[l-1]` is the number of layer-`l`
/// roots unmatched when that layer's rounds begin (for the final layer:
/// when the stream ends).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub width: usize,
    pub free: Vec<usize>,
}

impl LayerStats {
    /// Blocked-root counts: `n - free` per layer.
    pub fn blocked(&self) -> Vec<usize> {
        self.free.iter().map(|f| self.width - f).collect()
    }
}

/// Replays `run` over the trace's layer boundaries and snapshots how many
/// roots are free as each layer starts.
pub fn free_root_stats(
    trace: &LayeredTrace,
    run: &StreamTrace,
) -> Result<LayerStats, AdversaryError> {
    if !run.validate_against(&trace.stream) {
        return Err(AdversaryError::MismatchedRun);
    }
    let mut matched = vec![false; trace.stream.num_vertices];
    let count_free = |matched: &[bool], roots: &[usize]| -> usize {
        roots.iter().filter(|&&r| !matched[r]).count()
    };
    let mut free = Vec::with_capacity(trace.params.layers);
    let mut boundaries = trace.layers.iter().peekable();
    for (idx, ev) in run.events.iter().enumerate() {
        if let Some(rec) = boundaries.peek() {
            if rec.first_edge == idx {
                free.push(count_free(&matched, &rec.roots));
                boundaries.next();
            }
        }
        if ev.action == Action::Accept {
            for &id in &ev.preempted {
                let e = &trace.stream.edges[id];
                matched[e.u] = false;
                matched[e.v] = false;
            }
            matched[ev.edge.u] = true;
            matched[ev.edge.v] = true;
        }
    }
    free.push(count_free(&matched, &trace.final_roots));
    Ok(LayerStats {
        width: trace.params.width,
        free,
    })
}

/// `H_{2n} - H_n`: the per-layer blocking constant, summed directly
/// (small terms first, so the floating-point sum is as exact as it gets).
pub fn harmonic_gap(n: usize) -> f64 {
    assert!(n >= 1, "harmonic_gap needs n >= 1");
    (n + 1..=2 * n).rev().map(|t| 1.0 / t as f64).sum()
}

/// Free-root means predicted by iterating `F_{l+1} = n - h F_l` from
/// `F_1 = n` with `h = harmonic_gap(n)`.
pub fn predicted_free_means(layers: usize, width: usize) -> Vec<f64> {
    let h = harmonic_gap(width);
    let n = width as f64;
    let mut f = Vec::with_capacity(layers);
    f.push(n);
    for _ in 1..layers {
        f.push(n - h * f.last().unwrap());
    }
    f
}

/// Ratio the recursion predicts for a non-preempting matcher that matches
/// every free root: optimum `(L-1)n` over predicted cardinality `sum F_l`.
pub fn predicted_ratio(layers: usize, width: usize) -> f64 {
    let f = predicted_free_means(layers, width);
    let alg: f64 = f[..layers - 1].iter().sum();
    ((layers - 1) * width) as f64 / alg
}

/// Sums over trials of the per-layer free counts, their squares, and the
/// consecutive-layer cross products (enough to give every residual mean and
/// standard error), plus matching-cardinality moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerAggregate {
    pub layers: usize,
    pub width: usize,
    pub trials: u64,
    pub sum_f: Vec<f64>,
    pub sum_f_sq: Vec<f64>,
    pub sum_cross: Vec<f64>,
    pub sum_cardinality: f64,
    pub sum_cardinality_sq: f64,
}

impl LayerAggregate {
    pub fn new(layers: usize, width: usize) -> Self {
        LayerAggregate {
            layers,
            width,
            trials: 0,
            sum_f: vec![0.0; layers],
            sum_f_sq: vec![0.0; layers],
            sum_cross: vec![0.0; layers - 1],
            sum_cardinality: 0.0,
            sum_cardinality_sq: 0.0,
        }
    }

    pub fn add(&mut self, stats: &LayerStats, cardinality: usize) {
        assert_eq!(stats.free.len(), self.layers);
        self.trials += 1;
        for (l, &f) in stats.free.iter().enumerate() {
            let f = f as f64;
            self.sum_f[l] += f;
            self.sum_f_sq[l] += f * f;
            if l + 1 < self.layers {
                self.sum_cross[l] += f * stats.free[l + 1] as f64;
            }
        }
        let c = cardinality as f64;
        self.sum_cardinality += c;
        self.sum_cardinality_sq += c * c;
    }

    pub fn mean_free(&self, l_index: usize) -> f64 {
        self.sum_f[l_index] / self.trials as f64
    }

    /// Standard error of the layer's free-count mean.
    pub fn stderr_free(&self, l_index: usize) -> f64 {
        let t = self.trials as f64;
        let mean = self.mean_free(l_index);
        let var = (self.sum_f_sq[l_index] / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
        (var / t).sqrt()
    }
}

/// Per-layer residual of the free-root recursion with its standard error.
/// `residuals[l]` compares layer `l+2`'s observed mean against the
/// recursion applied to layer `l+1`'s observed mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub harmonic_gap: f64,
    pub residuals: Vec<f64>,
    pub stderrs: Vec<f64>,
}

/// Residual of layer `l`: observed `mean F_{l+1}` minus the recursion's
/// `n - h * mean F_l`. Per-trial residuals `F_{l+1} + h F_l - n` have mean
/// exactly zero for a matcher that matches every free root, so each entry
/// should sit within a few standard errors of zero.
pub fn recursion_residuals(agg: &LayerAggregate) -> ResidualReport {
    let h = harmonic_gap(agg.width);
    let n = agg.width as f64;
    let t = agg.trials as f64;
    let mut residuals = Vec::with_capacity(agg.layers - 1);
    let mut stderrs = Vec::with_capacity(agg.layers - 1);
    for l in 0..agg.layers - 1 {
        let mean_r = agg.sum_f[l + 1] / t + h * agg.sum_f[l] / t - n;
        // E[r^2] expanded over the stored sums.
        let mean_r_sq = (agg.sum_f_sq[l + 1]
            + h * h * agg.sum_f_sq[l]
            + 2.0 * h * agg.sum_cross[l])
            / t
            - 2.0 * n * (agg.sum_f[l + 1] + h * agg.sum_f[l]) / t
            + n * n;
        let var = (mean_r_sq - mean_r * mean_r).max(0.0) * t / (t - 1.0).max(1.0);
        residuals.push(mean_r);
        stderrs.push((var / t).sqrt());
    }
    ResidualReport {
        harmonic_gap: h,
        residuals,
        stderrs,
    }
}

/// Optimum-over-algorithm ratio estimate with a 95% confidence interval
/// (normal approximation on the mean cardinality, interval inverted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub optimum: f64,
    pub mean_cardinality: f64,
    pub stderr_cardinality: f64,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn lower_bound_ratio(agg: &LayerAggregate) -> RatioEstimate {
    let t = agg.trials as f64;
    let opt = ((agg.layers - 1) * agg.width) as f64;
    let mean = agg.sum_cardinality / t;
    let var =
        (agg.sum_cardinality_sq / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
    let se = (var / t).sqrt();
    let lo_mean = mean - 1.96 * se;
    let hi_mean = mean + 1.96 * se;
    RatioEstimate {
        optimum: opt,
        mean_cardinality: mean,
        stderr_cardinality: se,
        ratio: opt / mean,
        ci_low: opt / hi_mean,
        ci_high: if lo_mean > 0.0 { opt / lo_mean } else { f64::INFINITY },
    }
}

/// Everything a lower-bound experiment produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundExperiment {
    pub aggregate: LayerAggregate,
    pub residuals: ResidualReport,
    pub ratio: RatioEstimate,
}

/// Runs `trials` independent instances in parallel. Trial `i` draws its
/// instance from `derive_seed(master_seed, i)` and hands `make_algorithm` a
/// second rng stream on the same seed, so results are a pure function of
/// `(layers, width, master_seed, trials)` regardless of thread scheduling.
pub fn simulate_lower_bound<F>(
    layers: usize,
    width: usize,
    master_seed: u64,
    trials: u64,
    make_algorithm: F,
) -> Result<LowerBoundExperiment, AdversaryError>
where
    F: Fn(&mut ChaCha8Rng) -> Algorithm + Sync,
{
    LayeredParams {
        layers,
        width,
        seed: master_seed,
    }
    .check()?;
    let per_trial: Vec<(LayerStats, usize)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let trial_seed = derive_seed(master_seed, i);
            let trace = generate_layered(&LayeredParams {
                layers,
                width,
                seed: trial_seed,
            })
            .expect("params already checked");
            let mut algo_rng = ChaCha8Rng::seed_from_u64(trial_seed);
            algo_rng.set_stream(1); // instance generation uses stream 0
            let algorithm = make_algorithm(&mut algo_rng);
            let run = crate::matchers::run_matcher(&algorithm, &trace.stream);
            let cardinality = run.final_matching.len();
            let stats = free_root_stats(&trace, &run).expect("run made on this stream");
            (stats, cardinality)
        })
        .collect();
    let mut agg = LayerAggregate::new(layers, width);
    for (stats, cardinality) in &per_trial {
        agg.add(stats, *cardinality);
    }
    Ok(LowerBoundExperiment {
        residuals: recursion_residuals(&agg),
        ratio: lower_bound_ratio(&agg),
        aggregate: agg,
    })
}
