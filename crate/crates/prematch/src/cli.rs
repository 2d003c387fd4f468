//! Command-line entry point: stream generation, matcher runs, offline
//! optima, simulations, and the verification suites.
//!
//! All randomness flows from `--seed`; reports echo their parameters and
//! contain no timestamps or durations, so identical invocations produce
//! byte-identical files. Wall-clock timing goes to stderr.

use crate::adversary::{
    generate_layered, lower_bound_ratio, offline_certificate, recursion_residuals,
    simulate_lower_bound, LayeredParams,
};
use crate::analysis::{
    associate_charges, build_forest, check_chain, check_charging_bound, check_depth_weights,
    check_forest_invariants, check_per_tau_guarantee, empirical_ratio,
};
use crate::graph::EdgeStream;
use crate::matchers::{run_matcher, Algorithm};
use crate::oracle::{brute_force_matching, max_weight_matching, rounded_opt, WeightFn};
use crate::rounding::{competitive_ratio, optimal_theta, RoundingScheme};
use crate::seeding::derive_seed;
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "prematch",
    version,
    about = "Online preemptive matching: matchers, adversarial instances, oracles, verifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the optimal rounding base and its competitive ratio.
    ThetaStar {
        /// Bisection tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Write a stream file.
    Generate {
        #[command(subcommand)]
        what: GenerateCmd,
    },
    /// Run an online matcher over a stream file.
    Run {
        #[arg(long, value_enum)]
        algorithm: AlgoKind,
        /// Rounding base for the geometric matcher (default: optimal).
        #[arg(long)]
        theta: Option<f64>,
        /// Improvement factor for the improve matcher.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Seed for the geometric matcher's rounding offset.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        stream: PathBuf,
        /// Write the full decision trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exact offline optimum of a stream file.
    Opt {
        #[arg(long)]
        stream: PathBuf,
        /// Also report the optimum under rounded weights (needs --tau).
        #[arg(long, requires = "tau")]
        theta: Option<f64>,
        #[arg(long, requires = "theta")]
        tau: Option<f64>,
    },
    /// Monte Carlo experiments.
    Simulate {
        #[command(subcommand)]
        what: SimulateCmd,
    },
    /// Randomized verification suites; exits 1 on the first violation.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: u64,
    },
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Layered adversarial instance for unit-weight preemptive matching.
    Layered {
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Erdos-Renyi stream with a chosen weight distribution.
    Random {
        #[arg(long)]
        vertices: usize,
        #[arg(long)]
        edge_prob: f64,
        /// unit | uniform:a,b | exp:lambda
        #[arg(long, default_value = "unit", value_parser = WeightsSpec::from_str)]
        weights: WeightsSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// Measure an online matcher against layered adversarial instances.
    LowerBound {
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = AlgoKind::Greedy)]
        algorithm: AlgoKind,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Measure the geometric matcher's ratio on a fixed stream over tau draws.
    Ratio {
        #[arg(long)]
        stream: PathBuf,
        /// Rounding base (default: optimal).
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoKind {
    Geometric,
    Greedy,
    Improve,
}

impl AlgoKind {
    fn name(self) -> &'static str {
        match self {
            AlgoKind::Geometric => "geometric",
            AlgoKind::Greedy => "greedy",
            AlgoKind::Improve => "improve",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteKind {
    Rounding,
    Charging,
    Oracle,
    LowerBound,
    All,
}

/// Weight distribution for random streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightsSpec {
    Unit,
    Uniform(f64, f64),
    Exp(f64),
}

impl std::str::FromStr for WeightsSpec {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        if text == "unit" {
            return Ok(WeightsSpec::Unit);
        }
        if let Some(rest) = text.strip_prefix("uniform:") {
            let parts: Vec<&str> = rest.split(',').collect();
            let [a, b] = parts[..] else {
                return Err("expected uniform:a,b".into());
            };
            let a: f64 = a.parse().map_err(|e| format!("bad lower bound: {e}"))?;
            let b: f64 = b.parse().map_err(|e| format!("bad upper bound: {e}"))?;
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err("uniform needs finite a < b".into());
            }
            return Ok(WeightsSpec::Uniform(a, b));
        }
        if let Some(rest) = text.strip_prefix("exp:") {
            let lambda: f64 = rest.parse().map_err(|e| format!("bad rate: {e}"))?;
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err("exp needs a positive finite rate".into());
            }
            return Ok(WeightsSpec::Exp(lambda));
        }
        Err(format!("unknown weights spec `{text}` (unit | uniform:a,b | exp:lambda)"))
    }
}

impl WeightsSpec {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            WeightsSpec::Unit => 1.0,
            WeightsSpec::Uniform(a, b) => rng.gen_range(a..b),
            WeightsSpec::Exp(lambda) => {
                use rand_distr::Distribution;
                rand_distr::Exp::new(lambda).expect("validated rate").sample(rng)
            }
        }
    }
}

/// Erdos-Renyi stream: each pair independently with probability
/// `edge_prob`, weights from `weights`, arrival order shuffled.
pub fn random_stream(
    vertices: usize,
    edge_prob: f64,
    weights: &WeightsSpec,
    rng: &mut ChaCha8Rng,
) -> EdgeStream {
    let mut pairs = Vec::new();
    for u in 0..vertices {
        for v in u + 1..vertices {
            if rng.gen_range(0.0..1.0) < edge_prob {
                pairs.push((u, v));
            }
        }
    }
    use rand::seq::SliceRandom;
    pairs.shuffle(rng);
    let mut stream = EdgeStream::new(vertices);
    for (u, v) in pairs {
        let w = weights.sample(rng);
        stream.push(u, v, w);
    }
    stream
}

/// Parses argv and runs; returns the process exit code.
pub fn dispatch() -> i32 {
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run_command(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    };
    eprintln!("completed in {:.3}s", started.elapsed().as_secs_f64());
    code
}

fn run_command(command: Command) -> Result<i32, String> {
    match command {
        Command::ThetaStar { tol } => {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err("--tol must be positive and finite".into());
            }
            let theta = optimal_theta(tol);
            let ratio = competitive_ratio(theta).map_err(|e| e.to_string())?;
            println!("theta_star {theta}");
            println!("competitive_ratio {ratio}");
            Ok(0)
        }
        Command::Generate { what } => generate(what),
        Command::Run {
            algorithm,
            theta,
            beta,
            seed,
            stream,
            trace,
        } => run_stream(algorithm, theta, beta, seed, &stream, trace.as_deref()),
        Command::Opt { stream, theta, tau } => opt(&stream, theta, tau),
        Command::Simulate { what } => simulate(what),
        Command::Verify { suite, seed, cases } => verify(suite, seed, cases),
    }
}

fn read_stream(path: &Path) -> Result<EdgeStream, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    EdgeStream::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_report<T: Serialize>(path: Option<&Path>, report: &T) -> Result<(), String> {
    if let Some(path) = path {
        let mut text = serde_json::to_string_pretty(report)
            .map_err(|e| format!("serializing report: {e}"))?;
        text.push('\n');
        write_file(path, &text)?;
    }
    Ok(())
}

fn generate(what: GenerateCmd) -> Result<i32, String> {
    match what {
        GenerateCmd::Layered {
            layers,
            width,
            seed,
            output,
        } => {
            let trace = generate_layered(&LayeredParams {
                layers,
                width,
                seed,
            })
            .map_err(|e| e.to_string())?;
            write_file(&output, &trace.stream.to_text())?;
            println!("vertices {}", trace.stream.num_vertices);
            println!("edges {}", trace.stream.len());
            Ok(0)
        }
        GenerateCmd::Random {
            vertices,
            edge_prob,
            weights,
            seed,
            output,
        } => {
            if !(0.0..=1.0).contains(&edge_prob) {
                return Err("--edge-prob must be within [0, 1]".into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let stream = random_stream(vertices, edge_prob, &weights, &mut rng);
            write_file(&output, &stream.to_text())?;
            println!("vertices {}", stream.num_vertices);
            println!("edges {}", stream.len());
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct TraceReport<'a> {
    version: &'a str,
    params: RunParams<'a>,
    num_vertices: usize,
    events: &'a [crate::trace::TraceEvent],
    final_matching: &'a [usize],
    weights: TraceWeights,
}

#[derive(Serialize)]
struct RunParams<'a> {
    command: &'a str,
    algorithm: &'a str,
    stream: String,
    seed: u64,
    theta: Option<f64>,
    tau: Option<f64>,
    beta: Option<f64>,
}

#[derive(Serialize)]
struct TraceWeights {
    weight: f64,
    rounded_weight: f64,
}

fn build_algorithm(
    kind: AlgoKind,
    theta: Option<f64>,
    beta: f64,
    seed: u64,
) -> Result<Algorithm, String> {
    match kind {
        AlgoKind::Geometric => {
            let theta = theta.unwrap_or_else(|| optimal_theta(1e-12));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scheme = RoundingScheme::sample(theta, &mut rng).map_err(|e| e.to_string())?;
            Ok(Algorithm::Geometric(scheme))
        }
        AlgoKind::Greedy => Ok(Algorithm::Greedy),
        AlgoKind::Improve => Algorithm::improve_factor(beta).map_err(|e| e.to_string()),
    }
}

fn run_stream(
    kind: AlgoKind,
    theta: Option<f64>,
    beta: f64,
    seed: u64,
    stream_path: &Path,
    trace_path: Option<&Path>,
) -> Result<i32, String> {
    let stream = read_stream(stream_path)?;
    let algorithm = build_algorithm(kind, theta, beta, seed)?;
    let run = run_matcher(&algorithm, &stream);
    println!("algorithm {}", kind.name());
    let (echo_theta, echo_tau, echo_beta) = match &algorithm {
        Algorithm::Geometric(s) => {
            println!("theta {}", s.theta);
            println!("tau {}", s.tau);
            (Some(s.theta), Some(s.tau), None)
        }
        Algorithm::Greedy => (None, None, None),
        Algorithm::ImproveFactor { beta } => {
            println!("beta {beta}");
            (None, None, Some(*beta))
        }
    };
    println!("final_cardinality {}", run.final_matching.len());
    println!("final_weight {}", run.weight);
    println!("final_rounded_weight {}", run.rounded_weight);
    let report = TraceReport {
        version: VERSION,
        params: RunParams {
            command: "run",
            algorithm: kind.name(),
            stream: stream_path.display().to_string(),
            seed,
            theta: echo_theta,
            tau: echo_tau,
            beta: echo_beta,
        },
        num_vertices: run.num_vertices,
        events: &run.events,
        final_matching: &run.final_matching,
        weights: TraceWeights {
            weight: run.weight,
            rounded_weight: run.rounded_weight,
        },
    };
    write_report(trace_path, &report)?;
    Ok(0)
}

fn opt(stream_path: &Path, theta: Option<f64>, tau: Option<f64>) -> Result<i32, String> {
    let stream = read_stream(stream_path)?;
    let best = max_weight_matching(&stream, WeightFn::Original);
    println!("opt {}", best.objective);
    println!("opt_cardinality {}", best.matching.len());
    if let (Some(theta), Some(tau)) = (theta, tau) {
        let scheme = RoundingScheme::new(theta, tau).map_err(|e| e.to_string())?;
        let rounded = rounded_opt(&stream, &scheme);
        println!("rounded_opt {}", rounded.objective);
        println!("rounded_opt_cardinality {}", rounded.matching.len());
    }
    Ok(0)
}

#[derive(Serialize)]
struct LowerBoundReport {
    version: &'static str,
    params: LowerBoundParams,
    harmonic_gap: f64,
    per_layer: Vec<PerLayer>,
    residuals: Vec<Residual>,
    optimum: f64,
    mean_cardinality: f64,
    stderr_cardinality: f64,
    ratio: f64,
    ci: [f64; 2],
}

#[derive(Serialize)]
struct LowerBoundParams {
    command: &'static str,
    layers: usize,
    width: usize,
    trials: u64,
    algorithm: String,
    theta: Option<f64>,
    beta: Option<f64>,
    seed: u64,
}

#[derive(Serialize)]
struct PerLayer {
    mean_f: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct Residual {
    residual: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct RatioReport {
    version: &'static str,
    params: RatioParams,
    optimum: f64,
    mean_weight: f64,
    stderr: f64,
    ratio: f64,
    ci: [f64; 2],
}

#[derive(Serialize)]
struct RatioParams {
    command: &'static str,
    stream: String,
    theta: f64,
    trials: u64,
    seed: u64,
}

fn simulate(what: SimulateCmd) -> Result<i32, String> {
    match what {
        SimulateCmd::LowerBound {
            layers,
            width,
            trials,
            algorithm,
            theta,
            beta,
            seed,
            report,
        } => {
            if trials == 0 {
                return Err("--trials must be at least 1".into());
            }
            // Validate algorithm parameters once up front.
            build_algorithm(algorithm, theta, beta, seed)?;
            let exp = simulate_lower_bound(layers, width, seed, trials, |rng| {
                match algorithm {
                    AlgoKind::Greedy => Algorithm::Greedy,
                    AlgoKind::Improve => {
                        Algorithm::improve_factor(beta).expect("validated above")
                    }
                    AlgoKind::Geometric => {
                        let theta = theta.unwrap_or_else(|| optimal_theta(1e-12));
                        Algorithm::Geometric(
                            RoundingScheme::sample(theta, rng).expect("validated above"),
                        )
                    }
                }
            })
            .map_err(|e| e.to_string())?;
            println!("optimum {}", exp.ratio.optimum);
            println!("mean_cardinality {}", exp.ratio.mean_cardinality);
            println!("ratio {}", exp.ratio.ratio);
            println!("ci {} {}", exp.ratio.ci_low, exp.ratio.ci_high);
            let agg = &exp.aggregate;
            let doc = LowerBoundReport {
                version: VERSION,
                params: LowerBoundParams {
                    command: "simulate-lower-bound",
                    layers,
                    width,
                    trials,
                    algorithm: algorithm.name().to_string(),
                    theta: if algorithm == AlgoKind::Geometric {
                        Some(theta.unwrap_or_else(|| optimal_theta(1e-12)))
                    } else {
                        None
                    },
                    beta: if algorithm == AlgoKind::Improve {
                        Some(beta)
                    } else {
                        None
                    },
                    seed,
                },
                harmonic_gap: exp.residuals.harmonic_gap,
                per_layer: (0..agg.layers)
                    .map(|l| PerLayer {
                        mean_f: agg.mean_free(l),
                        stderr: agg.stderr_free(l),
                    })
                    .collect(),
                residuals: exp
                    .residuals
                    .residuals
                    .iter()
                    .zip(&exp.residuals.stderrs)
                    .map(|(&residual, &stderr)| Residual { residual, stderr })
                    .collect(),
                optimum: exp.ratio.optimum,
                mean_cardinality: exp.ratio.mean_cardinality,
                stderr_cardinality: exp.ratio.stderr_cardinality,
                ratio: exp.ratio.ratio,
                ci: [exp.ratio.ci_low, exp.ratio.ci_high],
            };
            write_report(report.as_deref(), &doc)?;
            Ok(0)
        }
        SimulateCmd::Ratio {
            stream,
            theta,
            trials,
            seed,
            report,
        } => {
            if trials == 0 {
                return Err("--trials must be at least 1".into());
            }
            let theta = theta.unwrap_or_else(|| optimal_theta(1e-12));
            if !(theta > 2.0) {
                return Err("--theta must be greater than 2".into());
            }
            let edges = read_stream(&stream)?;
            let rep = empirical_ratio(&edges, theta, trials, seed);
            println!("optimum {}", rep.optimum);
            println!("mean_weight {}", rep.mean_weight);
            println!("ratio {}", rep.ratio);
            println!("ci {} {}", rep.ci_low, rep.ci_high);
            let doc = RatioReport {
                version: VERSION,
                params: RatioParams {
                    command: "simulate-ratio",
                    stream: stream.display().to_string(),
                    theta,
                    trials,
                    seed,
                },
                optimum: rep.optimum,
                mean_weight: rep.mean_weight,
                stderr: rep.stderr,
                ratio: rep.ratio,
                ci: [rep.ci_low, rep.ci_high],
            };
            write_report(report.as_deref(), &doc)?;
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// Verification suites.

struct Counterexample {
    description: String,
    comments: Vec<String>,
    stream: Option<EdgeStream>,
}

impl Counterexample {
    fn print(&self, suite: &str) {
        println!("suite {suite}: {}", self.description);
        for line in &self.comments {
            println!("# {line}");
        }
        if let Some(stream) = &self.stream {
            print!("{}", stream.to_text());
        }
    }
}

fn verify(suite: SuiteKind, seed: u64, cases: u64) -> Result<i32, String> {
    let suites: Vec<SuiteKind> = match suite {
        SuiteKind::All => vec![
            SuiteKind::Rounding,
            SuiteKind::Oracle,
            SuiteKind::Charging,
            SuiteKind::LowerBound,
        ],
        s => vec![s],
    };
    for s in suites {
        let (name, outcome) = match s {
            SuiteKind::Rounding => ("rounding", verify_rounding(seed, cases)),
            SuiteKind::Oracle => ("oracle", verify_oracle(seed, cases)),
            SuiteKind::Charging => ("charging", verify_charging(seed, cases)),
            SuiteKind::LowerBound => ("lower-bound", verify_lower_bound(seed, cases)),
            SuiteKind::All => unreachable!("expanded above"),
        };
        match outcome {
            Ok(()) => println!("suite {name}: {cases} cases ok"),
            Err(cex) => {
                cex.print(name);
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn scheme_comments(s: &RoundingScheme) -> Vec<String> {
    vec![format!("theta {}", s.theta), format!("tau {}", s.tau)]
}

fn single_edge_stream(w: f64) -> EdgeStream {
    let mut st = EdgeStream::new(2);
    st.push(0, 1, w);
    st
}

fn verify_rounding(seed: u64, cases: u64) -> Result<(), Counterexample> {
    for case in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, case));
        let theta = rng.gen_range(1.01..10.0);
        let s = RoundingScheme::sample(theta, &mut rng).expect("valid theta");
        let fail = |description: String, w: f64| {
            Err(Counterexample {
                description: format!("case {case}: {description}"),
                comments: scheme_comments(&s),
                stream: Some(single_edge_stream(w)),
            })
        };
        let mut weights: Vec<f64> = (0..8)
            .map(|_| rng.gen_range(0.1..1.0) * 10f64.powi(rng.gen_range(-6..=6)))
            .collect();
        weights.push(0.0);
        // Exact class boundaries must land in the upper class.
        weights.push(s.class_lower(rng.gen_range(-5..=5)));
        for &w in &weights {
            let rounded = s.rounded_weight(w);
            if w == 0.0 {
                if rounded != 0.0 {
                    return fail(format!("zero weight rounds to {rounded}"), w);
                }
                continue;
            }
            if !(rounded <= w) {
                return fail(format!("rounded {rounded} exceeds weight {w}"), w);
            }
            if !(w < theta * rounded) {
                return fail(format!("weight {w} not below theta * {rounded}"), w);
            }
            let i = s.class_index(w).expect("positive weight");
            if s.class_lower(i) != rounded {
                return fail(format!("class {i} lower differs from rounded {rounded}"), w);
            }
            if !(s.class_lower(i) <= w && w < s.class_lower(i + 1)) {
                return fail(format!("weight {w} outside class {i}"), w);
            }
        }
        // Rounding is monotone in the weight.
        let mut sorted = weights.clone();
        sorted.sort_by(f64::total_cmp);
        for pair in sorted.windows(2) {
            if s.rounded_weight(pair[0]) > s.rounded_weight(pair[1]) {
                return fail(
                    format!("monotonicity broken between {} and {}", pair[0], pair[1]),
                    pair[1],
                );
            }
        }
    }
    Ok(())
}

fn random_verify_stream(rng: &mut ChaCha8Rng, max_vertices: usize, max_edges: usize) -> EdgeStream {
    let n = rng.gen_range(2..=max_vertices);
    let m = rng.gen_range(0..=max_edges);
    let mut st = EdgeStream::new(n);
    for _ in 0..m {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n);
        while v == u {
            v = rng.gen_range(0..n);
        }
        // Mixed magnitudes with occasional zeros and repeats.
        let w = match rng.gen_range(0..10) {
            0 => 0.0,
            1..=3 => rng.gen_range(0.5..2.0),
            _ => rng.gen_range(0.1..1.0) * 10f64.powi(rng.gen_range(-3..=4)),
        };
        st.push(u, v, w);
    }
    st
}

fn verify_oracle(seed: u64, cases: u64) -> Result<(), Counterexample> {
    for case in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, case));
        let st = random_verify_stream(&mut rng, 8, 12);
        let theta = rng.gen_range(1.05..9.0);
        let s = RoundingScheme::sample(theta, &mut rng).expect("valid theta");
        for weight_fn in [WeightFn::Original, WeightFn::Rounded(s)] {
            let exact = max_weight_matching(&st, weight_fn);
            let brute = brute_force_matching(&st, weight_fn).expect("small stream");
            let scale = exact.objective.abs().max(brute.objective.abs()).max(1.0);
            let ok = exact.matching.validate()
                && brute.matching.validate()
                && (exact.objective - brute.objective).abs() <= 1e-9 * scale;
            if !ok {
                return Err(Counterexample {
                    description: format!(
                        "case {case}: oracle disagreement ({} vs brute {})",
                        exact.objective, brute.objective
                    ),
                    comments: scheme_comments(&s),
                    stream: Some(st),
                });
            }
        }
    }
    Ok(())
}

fn verify_charging(seed: u64, cases: u64) -> Result<(), Counterexample> {
    for case in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, case));
        let st = random_verify_stream(&mut rng, 10, 14);
        let theta = rng.gen_range(2.05..9.0);
        let s = RoundingScheme::sample(theta, &mut rng).expect("valid theta");
        let fail = |description: String| {
            Err(Counterexample {
                description: format!("case {case}: {description}"),
                comments: scheme_comments(&s),
                stream: Some(st.clone()),
            })
        };
        let run = run_matcher(&Algorithm::Geometric(s), &st);
        let forest = match build_forest(&run) {
            Ok(f) => f,
            Err(e) => return fail(e.to_string()),
        };
        if !check_forest_invariants(&forest) {
            return fail("forest structural invariants violated".into());
        }
        if !check_depth_weights(&forest, &s) {
            return fail("depth-weight bound violated".into());
        }
        let m_tilde = rounded_opt(&st, &s);
        let report = match associate_charges(&forest, &m_tilde, &s) {
            Ok(r) => r,
            Err(e) => return fail(e.to_string()),
        };
        if !check_charging_bound(&report, &s) {
            return fail("charging bound violated".into());
        }
        if !check_per_tau_guarantee(&st, &s, &run) {
            return fail("per-instance guarantee violated".into());
        }
        if let Err(broken) = check_chain(&st, &s) {
            return fail(broken.to_string());
        }
    }
    Ok(())
}

fn verify_lower_bound(seed: u64, cases: u64) -> Result<(), Counterexample> {
    for case in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, case));
        let params = LayeredParams {
            layers: rng.gen_range(2..=6),
            width: rng.gen_range(1..=5),
            seed: rng.gen(),
        };
        let trace = match generate_layered(&params) {
            Ok(t) => t,
            Err(e) => {
                return Err(Counterexample {
                    description: format!("case {case}: {e}"),
                    comments: vec![format!("params {params:?}")],
                    stream: None,
                })
            }
        };
        let fail = |description: String| {
            Err(Counterexample {
                description: format!("case {case}: {description}"),
                comments: vec![format!(
                    "layers {} width {} seed {}",
                    params.layers, params.width, params.seed
                )],
                stream: Some(trace.stream.clone()),
            })
        };
        let n = params.width;
        if !trace.stream.validate() {
            return fail("generated stream is invalid".into());
        }
        let per_layer = n * (3 * n + 1) / 2;
        if trace.stream.len() != (params.layers - 1) * per_layer {
            return fail(format!("unexpected edge count {}", trace.stream.len()));
        }
        let cert = offline_certificate(&trace);
        if !cert.validate() || cert.len() != (params.layers - 1) * n {
            return fail("offline certificate invalid or wrong size".into());
        }
        let run = run_matcher(&Algorithm::Greedy, &trace.stream);
        if run.events.iter().any(|e| !e.preempted.is_empty()) {
            return fail("greedy preempted on a layered instance".into());
        }
        let stats = match crate::adversary::free_root_stats(&trace, &run) {
            Ok(s) => s,
            Err(e) => return fail(e.to_string()),
        };
        if stats.free[0] != n {
            return fail("first layer has blocked roots".into());
        }
        let expected: usize = stats.free[..params.layers - 1].iter().sum();
        if run.final_matching.len() != expected {
            return fail("greedy cardinality differs from the free-root total".into());
        }
        // Exercise the aggregation path.
        let mut agg = crate::adversary::LayerAggregate::new(params.layers, n);
        agg.add(&stats, run.final_matching.len());
        let residual = recursion_residuals(&agg);
        if residual.residuals.len() != params.layers - 1 {
            return fail("residual report has the wrong shape".into());
        }
        let ratio = lower_bound_ratio(&agg);
        if ratio.optimum != ((params.layers - 1) * n) as f64 {
            return fail("ratio report has the wrong optimum".into());
        }
    }
    Ok(())
}
