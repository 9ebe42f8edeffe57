//! JSON run statistics.

use std::fs;
use std::path::Path;
use std::time::Duration;

use approxchol::factorizer::FactorStats;
use approxchol::{Config, Factorization};
use serde::Serialize;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub parse_s: f64,
    pub split_s: f64,
    pub elimination_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryPoint {
    /// Eliminations performed so far; 0 is the state right after the split.
    pub step: usize,
    pub live_edges: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckStats {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lower: f64,
    pub upper: f64,
    pub outcomes: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub eps_solve: f64,
    pub residual_norms: Vec<f64>,
    pub relative_residual: f64,
    pub converged: bool,
    pub projected_rhs: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub schema: u32,
    pub command: &'static str,
    pub n: usize,
    pub m: usize,
    pub rho: usize,
    pub variant: &'static str,
    pub seed: u64,
    pub eps: f64,
    pub delta: f64,
    pub fill: usize,
    pub attempts: u64,
    pub inserted: u64,
    pub entries_touched: u64,
    pub vertex_draws: u64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub times: Timings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckStats>,
}

/// Every `max(1, n / 100)`-th entry of the live-edge history, plus the last.
pub fn sample_trajectory(live_edges: &[usize], n: usize) -> Vec<TrajectoryPoint> {
    let stride = (n / 100).max(1);
    let mut out: Vec<TrajectoryPoint> = live_edges
        .iter()
        .enumerate()
        .step_by(stride)
        .map(|(step, &live_edges)| TrajectoryPoint { step, live_edges })
        .collect();
    if let (Some(last), Some(&tail)) = (out.last(), live_edges.last()) {
        if last.step + 1 != live_edges.len() {
            out.push(TrajectoryPoint { step: live_edges.len() - 1, live_edges: tail });
        }
    }
    out
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

impl RunStats {
    pub fn new(command: &'static str, m: usize, cfg: &Config, f: &Factorization, parse: Duration, total: Duration) -> Self {
        let s: &FactorStats = &f.stats;
        RunStats {
            schema: SCHEMA,
            command,
            n: f.n(),
            m,
            rho: s.rho,
            variant: cfg.variant.name(),
            seed: cfg.seed,
            eps: cfg.eps,
            delta: cfg.delta,
            fill: f.fill(),
            attempts: s.attempts,
            inserted: s.inserted,
            entries_touched: s.entries_touched,
            vertex_draws: s.vertex_draws,
            trajectory: sample_trajectory(&s.live_edges, f.n()),
            times: Timings {
                parse_s: secs(parse),
                split_s: secs(s.split_time),
                elimination_s: secs(s.elimination_time),
                total_s: secs(total),
            },
            check: None,
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}
