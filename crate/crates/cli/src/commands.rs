//! Subcommand implementations. Each returns the process exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use approxchol::oracle::{
    clique_sample_expectation, dense_from_factorization, dense_from_multigraph, exact_clique_from_star,
    reff_triangle_check, Resistances, SpectralReference, ORACLE_MAX_N,
};
use approxchol::solver::SolveError;
use approxchol::{
    iterative_refinement, sparse_cholesky, sparse_cholesky_observed, Config, FactorError, Factorization,
    MultiGraph, RefineOptions, SparseLaplacian, Variant,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::factor_io::{read_factorization, write_factorization, FactorIoError};
use crate::graph_io::{parse_graph, GraphFormat, ParseError};
use crate::stats::{write_json, CheckOutcome, CheckStats, RunStats, SolveStats, SCHEMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DISCONNECTED: i32 = 3;
pub const EXIT_NOT_MEAN_ZERO: i32 = 4;

/// Slack on the leverage bound and on the spectral window.
const BOUND_SLACK: f64 = 1e-9;
/// Entrywise tolerance for the enumerated sampling expectation, relative to the clique scale.
const UNBIASED_TOL: f64 = 1e-12;
/// Largest star enumerated by the unbiasedness check.
const UNBIASED_MAX_STAR: usize = 64;
/// Number of steps whose stars the unbiasedness check enumerates.
const UNBIASED_STEPS: usize = 8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    FactorFile(#[from] FactorIoError),
    #[error("{0}")]
    Input(String),
    #[error("input graph is disconnected")]
    Disconnected,
    #[error("right-hand side is not mean-zero (|1'b|/sqrt(n) = {projection:e}, |b| = {norm:e}); pass --project-rhs to project it")]
    NotMeanZero { projection: f64, norm: f64 },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Disconnected => EXIT_DISCONNECTED,
            CliError::NotMeanZero { .. } => EXIT_NOT_MEAN_ZERO,
            _ => EXIT_INPUT,
        }
    }
}

impl From<FactorError> for CliError {
    fn from(e: FactorError) -> Self {
        match e {
            FactorError::Disconnected => CliError::Disconnected,
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NotMeanZero { projection, norm } => CliError::NotMeanZero { projection, norm },
            other => CliError::Input(other.to_string()),
        }
    }
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write { path: path.display().to_string(), source }
}

#[derive(Debug, Parser)]
#[command(name = "approxchol", version, about = "Approximate Cholesky factorization of graph Laplacians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factorize a graph Laplacian and write the factor.
    Factorize(FactorizeArgs),
    /// Solve L x = b by iterative refinement with a stored factor.
    Solve(SolveArgs),
    /// Factorize and verify the result against the dense oracle.
    Check(CheckArgs),
    /// Time repeated factorizations and report work counters.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Graph file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "edgelist")]
    pub format: GraphFormat,
}

#[derive(Debug, Clone, Args)]
pub struct FactorArgs {
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// random-perm, low-degree or exact.
    #[arg(long, default_value = "random-perm")]
    pub variant: Variant,
    /// Split factor override.
    #[arg(long)]
    pub rho: Option<usize>,
}

impl FactorArgs {
    fn config(&self) -> Config {
        Config {
            eps: self.eps,
            delta: self.delta,
            rho_override: self.rho,
            variant: self.variant,
            seed: self.seed,
            ..Config::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub factor: FactorArgs,
    /// Factorization output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON statistics output file.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Factorization file written by `factorize`.
    #[arg(long)]
    pub factorization: PathBuf,
    /// The graph the factor was built from.
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Right-hand side, one real per line.
    #[arg(long)]
    pub rhs: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub eps_solve: f64,
    /// Project the right-hand side onto mean zero instead of rejecting it.
    #[arg(long)]
    pub project_rhs: bool,
    /// Stop once the relative residual drops below `--eps-solve` instead of
    /// running all `ceil(3 ln(1/eps))` steps.
    #[arg(long)]
    pub early_stop: bool,
    /// Solution output, one real per line.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report output file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub factor: FactorArgs,
    /// Print the per-step spectral trace of the partial factorizations.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub factor: FactorArgs,
    /// Runs with seeds `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Factorize(a) => cmd_factorize(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_graph(g: &GraphArgs) -> Result<(MultiGraph, Duration), CliError> {
    let started = Instant::now();
    let graph = parse_graph(&g.input, g.format)?;
    Ok((graph, started.elapsed()))
}

pub fn cmd_factorize(a: &FactorizeArgs) -> Result<i32, CliError> {
    let started = Instant::now();
    let (g, parse_time) = load_graph(&a.graph)?;
    let cfg = a.factor.config();
    let f = sparse_cholesky(&g, &cfg)?;
    if let Some(out) = &a.out {
        write_factorization(&f, out)?;
    }
    let stats = RunStats::new("factorize", g.live_edge_total(), &cfg, &f, parse_time, started.elapsed());
    println!(
        "n={} m={} rho={} variant={} fill={} attempts={} time={:.3}s",
        stats.n, stats.m, stats.rho, stats.variant, stats.fill, stats.attempts, stats.times.total_s
    );
    if let Some(path) = &a.stats {
        write_json(&stats, path).map_err(write_err(path))?;
    }
    Ok(EXIT_OK)
}

/// One real per line; blank lines and `#` comments are skipped.
pub fn read_vector(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let t = raw.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let x: f64 = t
            .parse()
            .map_err(|_| CliError::Input(format!("{}: line {}: bad number {t:?}", path.display(), i + 1)))?;
        out.push(x);
    }
    Ok(out)
}

pub fn format_vector(x: &[f64]) -> String {
    let mut s = String::with_capacity(24 * x.len());
    for v in x {
        writeln!(s, "{v:e}").unwrap();
    }
    s
}

#[derive(Debug, Serialize)]
struct SolveReportJson<'a> {
    schema: u32,
    n: usize,
    #[serde(flatten)]
    solve: &'a SolveStats,
    solve_s: f64,
}

pub fn cmd_solve(a: &SolveArgs) -> Result<i32, CliError> {
    let f = read_factorization(&a.factorization)?;
    let (g, _) = load_graph(&a.graph)?;
    if g.n() != f.n() {
        return Err(CliError::Input(format!("graph has {} vertices but the factorization has {}", g.n(), f.n())));
    }
    let mut b = read_vector(&a.rhs)?;
    if b.len() != f.n() {
        return Err(CliError::Input(format!("right-hand side has {} entries, expected {}", b.len(), f.n())));
    }
    if a.project_rhs {
        b = approxchol::solver::project_mean_zero(&b);
    }
    let op = SparseLaplacian::from_multigraph(&g);
    let started = Instant::now();
    let report = iterative_refinement(&op, &f, &b, &RefineOptions { early_stop: a.early_stop, ..RefineOptions::new(a.eps_solve) })?;
    let solve_s = started.elapsed().as_secs_f64();
    let b_norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let last = *report.residual_norms.last().unwrap();
    let relative_residual = if b_norm > 0.0 { last / b_norm } else { 0.0 };
    let stats = SolveStats {
        iterations: report.iterations,
        eps_solve: a.eps_solve,
        residual_norms: report.residual_norms.clone(),
        relative_residual,
        converged: report.converged,
        projected_rhs: a.project_rhs,
    };
    println!(
        "iterations={} residual={last:e} relative={relative_residual:e} converged={}",
        report.iterations, report.converged
    );
    if let Some(out) = &a.out {
        fs::write(out, format_vector(&report.x)).map_err(write_err(out))?;
    }
    if let Some(path) = &a.report {
        let json = SolveReportJson { schema: SCHEMA, n: f.n(), solve: &stats, solve_s };
        write_json(&json, path).map_err(write_err(path))?;
    }
    Ok(EXIT_OK)
}

/// Leverage-bound bookkeeping over one observed run.
struct Boundedness {
    worst: f64,
    violations: usize,
    checked: usize,
}

impl Boundedness {
    fn record(&mut self, lev: f64, limit: f64) {
        self.checked += 1;
        self.worst = self.worst.max(lev);
        if lev > limit {
            self.violations += 1;
        }
    }
}

pub fn cmd_check(a: &CheckArgs) -> Result<i32, CliError> {
    let started = Instant::now();
    let (g, parse_time) = load_graph(&a.graph)?;
    let n = g.n();
    if n > ORACLE_MAX_N {
        return Err(CliError::Input(format!("check needs n <= {ORACLE_MAX_N}, got {n}")));
    }
    if n >= 2 && !g.is_connected() {
        return Err(CliError::Disconnected);
    }
    let mut cfg = a.factor.config();
    cfg.record_diagnostics = a.trace;
    let l = dense_from_multigraph(&g);
    let res = Resistances::new(&l).map_err(|e| CliError::Input(e.to_string()))?;
    let rho = cfg.rho(n);
    let limit = 1.0 / rho as f64 + BOUND_SLACK;

    // Edges only ever enter the multigraph through the split or a step's
    // insertions, so checking those covers every edge alive at any step.
    let mut bound = Boundedness { worst: 0.0, violations: 0, checked: 0 };
    for e in g.alive_edges() {
        let split_w = e.w / rho as f64;
        bound.record(split_w * res.get(e.u, e.v), limit);
    }
    let mut unbiased_worst: f64 = 0.0;
    let mut unbiased_stars = 0;
    let probe_every = (n / UNBIASED_STEPS).max(1);
    let sampled = cfg.variant != Variant::ExactClique;
    let f = sparse_cholesky_observed(&g, &cfg, |ev| {
        for e in ev.inserted {
            bound.record(res.leverage(e), limit);
        }
        let d = ev.star.len();
        if sampled && d > 0 && d <= UNBIASED_MAX_STAR && ev.step % probe_every == 0 {
            let per_attempt = clique_sample_expectation(ev.star, ev.vertex, n).expect("nonempty star");
            let exact = exact_clique_from_star(ev.star, ev.vertex, n);
            let scale = exact.max_abs().max(f64::MIN_POSITIVE);
            let diff = per_attempt.scaled(d as f64).max_abs_diff(&exact) / scale;
            unbiased_worst = unbiased_worst.max(diff);
            unbiased_stars += 1;
        }
    })?;

    let mut outcomes = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        outcomes.push(CheckOutcome { name: name.to_string(), passed, detail });
    };

    let z = dense_from_factorization(&f);
    let spectral = SpectralReference::new(&l).and_then(|r| r.bounds(&z));
    let (lo, hi) = match spectral {
        Ok(b) => b,
        Err(_) => (f64::NAN, f64::NAN),
    };
    let (lower, upper) = (1.0 - cfg.eps, 1.0 + cfg.eps);
    let within = lo >= lower - BOUND_SLACK && hi <= upper + BOUND_SLACK;
    push(
        "spectral",
        within,
        match spectral {
            Ok(_) => format!("generalized eigenvalues in [{lo:.6}, {hi:.6}], required [{lower}, {upper}]"),
            Err(e) => format!("oracle rejected the factor: {e}"),
        },
    );
    let bound_ok = bound.violations == 0 || !sampled;
    push(
        "boundedness",
        bound_ok,
        format!(
            "{} multi-edges checked, max w*Reff = {:.3e}, limit 1/rho = {:.3e}, {} violations",
            bound.checked,
            bound.worst,
            1.0 / rho as f64,
            bound.violations
        ) + if sampled { "" } else { " (not required in exact mode)" },
    );
    let monotone = f.stats.live_edges.windows(2).all(|w| w[1] <= w[0]);
    let edge_detail = format!(
        "live multi-edges {} after split, {} at the last step",
        f.stats.live_edges.first().copied().unwrap_or(0),
        f.stats.live_edges.last().copied().unwrap_or(0)
    );
    if cfg.variant == Variant::ExactClique {
        // Exact cliques may add more edges than they remove.
        push("edge-count", true, format!("{edge_detail} (not required in exact mode)"));
    } else {
        push("edge-count", monotone, edge_detail);
    }
    push(
        "unbiasedness",
        unbiased_worst <= UNBIASED_TOL,
        if sampled {
            format!("{unbiased_stars} stars enumerated, max relative deviation {unbiased_worst:.3e}")
        } else {
            "exact cliques, nothing sampled".to_string()
        },
    );
    let mut triangle_bad = 0usize;
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                if !reff_triangle_check(&res, u, v, w) {
                    triangle_bad += 1;
                }
            }
        }
    }
    push("reff-triangle", triangle_bad == 0, format!("{} triples, {triangle_bad} violations", n * n * n));

    if a.trace {
        if f.stats.diagnostics_skipped {
            println!("trace skipped: n = {n} exceeds the diagnostics cap");
        }
        println!("step lambda_min lambda_max within_eps event laplacian");
        for row in &f.stats.diagnostics {
            println!(
                "{} {:.9} {:.9} {} {} {}",
                row.step, row.lambda_min, row.lambda_max, row.within_eps, row.event_holds, row.laplacian_ok
            );
        }
    }

    let all = outcomes.iter().all(|o| o.passed);
    if let Some(path) = &a.stats {
        let mut stats = RunStats::new("check", g.live_edge_total(), &cfg, &f, parse_time, started.elapsed());
        stats.check = Some(CheckStats { lambda_min: lo, lambda_max: hi, lower, upper, outcomes });
        write_json(&stats, path).map_err(write_err(path))?;
    }
    Ok(if all { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Debug, Serialize)]
struct BenchRun {
    seed: u64,
    fill: usize,
    attempts: u64,
    inserted: u64,
    entries_touched: u64,
    vertex_draws: u64,
    split_s: f64,
    elimination_s: f64,
}

#[derive(Debug, Serialize)]
struct BenchJson {
    schema: u32,
    command: &'static str,
    n: usize,
    m: usize,
    rho: usize,
    variant: &'static str,
    runs: Vec<BenchRun>,
}

pub fn cmd_bench(a: &BenchArgs) -> Result<i32, CliError> {
    let (g, _) = load_graph(&a.graph)?;
    let base = a.factor.config();
    let mut runs = Vec::with_capacity(a.repeat);
    println!("seed fill attempts inserted entries_touched split_s elimination_s");
    for i in 0..a.repeat as u64 {
        let cfg = Config { seed: base.seed.wrapping_add(i), ..base.clone() };
        let f: Factorization = sparse_cholesky(&g, &cfg)?;
        let s = &f.stats;
        let run = BenchRun {
            seed: cfg.seed,
            fill: f.fill(),
            attempts: s.attempts,
            inserted: s.inserted,
            entries_touched: s.entries_touched,
            vertex_draws: s.vertex_draws,
            split_s: s.split_time.as_secs_f64(),
            elimination_s: s.elimination_time.as_secs_f64(),
        };
        println!(
            "{} {} {} {} {} {:.4} {:.4}",
            run.seed, run.fill, run.attempts, run.inserted, run.entries_touched, run.split_s, run.elimination_s
        );
        runs.push(run);
    }
    if let Some(path) = &a.stats {
        let json = BenchJson {
            schema: SCHEMA,
            command: "bench",
            n: g.n(),
            m: g.live_edge_total(),
            rho: base.rho(g.n()),
            variant: base.variant.name(),
            runs,
        };
        write_json(&json, path).map_err(write_err(path))?;
    }
    Ok(EXIT_OK)
}
