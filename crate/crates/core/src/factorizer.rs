//! Elimination drivers.
//!
//! All three variants share one loop: pick a vertex, read its column from the
//! current multigraph, drop its star and put back either sampled clique edges
//! or (for verification) the exact clique.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::multigraph::{DedupScratch, GraphError, MultiEdge, MultiGraph};
use crate::oracle::{self, DenseMatrix, SpectralReference};
use crate::sampling::{clique_sample, uniform_index, SamplingError};

/// Largest graph for which per-step spectral diagnostics are computed.
pub const DEFAULT_DIAGNOSTIC_CAP: usize = 128;

/// rng stream reserved for the upfront permutation; step `k` uses stream `k`.
const PERMUTATION_STREAM: u64 = 0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("need at least 2 vertices, got {0}")]
    TooSmall(usize),
    #[error("input graph is disconnected")]
    Disconnected,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("malformed factorization: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Uniformly random elimination order fixed upfront.
    RandomPerm,
    /// Adaptive order restricted to vertices of at most twice the average
    /// live degree; the split factor is doubled.
    LowDegree,
    /// Random order with the exact clique inserted (dense fill).
    ExactClique,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::RandomPerm => "random-perm",
            Variant::LowDegree => "low-degree",
            Variant::ExactClique => "exact",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random-perm" => Ok(Variant::RandomPerm),
            "low-degree" => Ok(Variant::LowDegree),
            "exact" => Ok(Variant::ExactClique),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub eps: f64,
    pub delta: f64,
    pub rho_override: Option<usize>,
    pub variant: Variant,
    pub seed: u64,
    pub track_leverage: bool,
    pub record_diagnostics: bool,
    pub diagnostic_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            eps: 0.5,
            delta: 1.0,
            rho_override: None,
            variant: Variant::RandomPerm,
            seed: 0,
            track_leverage: false,
            record_diagnostics: false,
            diagnostic_cap: DEFAULT_DIAGNOSTIC_CAP,
        }
    }
}

/// `ceil(12 (1 + delta)^2 eps^-2 ln^2 n)`, at least 1.
pub fn formula_rho(n: usize, eps: f64, delta: f64) -> usize {
    let ln = (n as f64).ln();
    let rho = (12.0 * (1.0 + delta).powi(2) * ln * ln / (eps * eps)).ceil();
    (rho as usize).max(1)
}

impl Config {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rho(mut self, rho: usize) -> Self {
        self.rho_override = Some(rho);
        self
    }

    /// Split factor used for an `n`-vertex input.
    pub fn rho(&self, n: usize) -> usize {
        match (self.rho_override, self.variant) {
            (Some(r), _) => r,
            (None, Variant::LowDegree) => 2 * formula_rho(n, self.eps, self.delta),
            (None, _) => formula_rho(n, self.eps, self.delta),
        }
    }

    fn validate(&self) -> Result<(), FactorError> {
        if !(self.eps > 0.0 && self.eps <= 0.5) {
            return Err(FactorError::Config(format!("eps must lie in (0, 1/2], got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(FactorError::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if self.rho_override == Some(0) {
            return Err(FactorError::Config("rho must be at least 1".into()));
        }
        Ok(())
    }
}

/// One row of the per-step martingale trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    /// Steps completed (0 is the input itself).
    pub step: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// This step's approximate Laplacian lies within `[1 - eps, 1 + eps]`.
    pub within_eps: bool,
    /// Every step so far has stayed within `[1 - eps, 1 + eps]`.
    pub event_holds: bool,
    /// The remaining multigraph reconstructs to a Laplacian.
    pub laplacian_ok: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorStats {
    pub rho: usize,
    /// Live multi-edges after the split (index 0) and after each step.
    pub live_edges: Vec<usize>,
    /// `mult_S(v)` of each eliminated vertex, in elimination order.
    pub star_degrees: Vec<usize>,
    /// Clique-sample attempts over the whole run.
    pub attempts: u64,
    /// Edges inserted (samples, or exact clique edges).
    pub inserted: u64,
    /// Adjacency entries visited, dead ones included.
    pub entries_touched: u64,
    /// Vertex draws, rejections included.
    pub vertex_draws: u64,
    pub split_time: Duration,
    pub elimination_time: Duration,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub diagnostics_skipped: bool,
}

/// `Z = sum_k alpha_k c_k c_k^T`, stored column by column.
///
/// Column `k` belongs to vertex `perm[k]`; its row indices are vertex ids and
/// its first entry is the unit diagonal whenever the column is nonzero.
#[derive(Debug, Clone, Default)]
pub struct Factorization {
    n: usize,
    perm: Vec<usize>,
    diag: Vec<f64>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    pub stats: FactorStats,
}

impl Factorization {
    /// Assembles a factorization from raw parts, checking shapes and the
    /// permutation.
    pub fn from_parts(
        perm: Vec<usize>,
        diag: Vec<f64>,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, FactorError> {
        let n = perm.len();
        let bad = |m: &str| Err(FactorError::Malformed(m.to_string()));
        if diag.len() != n || col_ptr.len() != n + 1 {
            return bad("array lengths do not match n");
        }
        if col_ptr[0] != 0 || col_ptr.windows(2).any(|w| w[0] > w[1]) {
            return bad("column pointers are not monotone from 0");
        }
        if col_ptr[n] != row_idx.len() || row_idx.len() != values.len() {
            return bad("column pointers do not match entry count");
        }
        let mut seen = vec![false; n];
        for &v in &perm {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return bad("perm is not a permutation");
            }
        }
        if row_idx.iter().any(|&r| r >= n) {
            return bad("row index out of range");
        }
        Ok(Factorization { n, perm, diag, col_ptr, row_idx, values, stats: FactorStats::default() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `perm[k]` is the vertex eliminated at step `k`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, k: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[k]..self.col_ptr[k + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    /// Stored entries of the triangular factor.
    pub fn fill(&self) -> usize {
        self.row_idx.len()
    }

    /// Inverse of `perm`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.n];
        for (k, &v) in self.perm.iter().enumerate() {
            pos[v] = k;
        }
        pos
    }

    /// `c_j(perm[i]) = 0` for `i < j`, unit diagonal on nonzero columns, and
    /// zero columns exactly where `alpha = 0` (the last column excepted).
    pub fn is_lower_triangular(&self) -> bool {
        let pos = self.positions();
        (0..self.n).all(|k| {
            let (idx, val) = self.column(k);
            if idx.is_empty() {
                return self.diag[k] == 0.0 && k + 1 < self.n;
            }
            idx[0] == self.perm[k]
                && val[0] == 1.0
                && idx[1..].iter().all(|&r| pos[r] > k)
                && (self.diag[k] > 0.0 || k + 1 == self.n)
        })
    }

    /// Bitwise equality of the factor data (stats ignored).
    pub fn same_factor(&self, other: &Self) -> bool {
        let bits = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        self.perm == other.perm
            && self.col_ptr == other.col_ptr
            && self.row_idx == other.row_idx
            && bits(&self.diag) == bits(&other.diag)
            && bits(&self.values) == bits(&other.values)
    }
}

/// What an observer sees after each elimination step.
pub struct StepEvent<'a> {
    /// 1-based step index.
    pub step: usize,
    pub vertex: usize,
    pub alpha: f64,
    pub star: &'a [MultiEdge],
    pub inserted: &'a [MultiEdge],
    /// State after the step.
    pub graph: &'a MultiGraph,
}

/// Deterministic rng for one stream of a run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniformly random elimination order (Fisher-Yates).
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream_rng(seed, PERMUTATION_STREAM));
    perm
}

/// Vertices not yet eliminated, with O(1) removal.
#[derive(Debug, Clone)]
pub struct Remaining {
    items: Vec<usize>,
    pos: Vec<usize>,
}

impl Remaining {
    pub fn all(n: usize) -> Self {
        Remaining { items: (0..n).collect(), pos: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.items
    }

    pub fn remove(&mut self, v: usize) {
        let i = self.pos[v];
        let last = *self.items.last().expect("remove from empty set");
        self.items.swap_remove(i);
        if last != v {
            self.pos[last] = i;
        }
        self.pos[v] = usize::MAX;
    }
}

/// Live-degree cap `2 * (sum_v mult(v)) / |remaining|` as an exact test:
/// `mult * |remaining| <= 4 * live_edges`.
#[inline]
pub fn is_low_degree(g: &MultiGraph, remaining: usize, v: usize) -> bool {
    g.live_mult(v) * remaining <= 4 * g.live_edge_total()
}

/// Uniform choice among remaining vertices whose live degree is at most twice
/// the average, by rejection. Returns the vertex and the number of draws.
pub fn choose_vertex_low_degree<R: rand::Rng + ?Sized>(
    g: &MultiGraph,
    remaining: &Remaining,
    rng: &mut R,
) -> (usize, u64) {
    assert!(!remaining.is_empty(), "no vertices left to choose from");
    let r = remaining.len();
    let mut draws = 0;
    loop {
        draws += 1;
        let v = remaining.items[uniform_index(rng, r)];
        if is_low_degree(g, r, v) {
            return (v, draws);
        }
    }
}

struct Diagnostics {
    reference: SpectralReference,
    accum: DenseMatrix,
    eps: f64,
    event: bool,
}

impl Diagnostics {
    fn row(&mut self, step: usize, s: &MultiGraph) -> Option<DiagnosticsRow> {
        let dense_s = oracle::dense_from_multigraph(s);
        let laplacian_ok = dense_s.is_laplacian(1e-10);
        let approx = dense_s.add(&self.accum);
        let (lo, hi) = self.reference.bounds(&approx).ok()?;
        let slack = 1e-12;
        let within = lo >= 1.0 - self.eps - slack && hi <= 1.0 + self.eps + slack;
        self.event &= within;
        Some(DiagnosticsRow {
            step,
            lambda_min: lo,
            lambda_max: hi,
            within_eps: within,
            event_holds: self.event,
            laplacian_ok,
        })
    }
}

/// Factorizes a connected Laplacian.
pub fn sparse_cholesky(g: &MultiGraph, cfg: &Config) -> Result<Factorization, FactorError> {
    sparse_cholesky_observed(g, cfg, |_| {})
}

/// As [`sparse_cholesky`], calling `observer` after every elimination step.
pub fn sparse_cholesky_observed<F>(
    g: &MultiGraph,
    cfg: &Config,
    mut observer: F,
) -> Result<Factorization, FactorError>
where
    F: FnMut(&StepEvent<'_>),
{
    cfg.validate()?;
    let n = g.n();
    if n < 2 {
        return Err(FactorError::TooSmall(n));
    }
    if !g.is_connected() {
        return Err(FactorError::Disconnected);
    }
    let rho = cfg.rho(n);
    let mut stats = FactorStats { rho, ..Default::default() };
    let trace_scale: f64 = (0..n).map(|v| g.weighted_degree(v)).sum();

    let started = Instant::now();
    let mut s = g.split_edges(rho, cfg.track_leverage)?;
    stats.split_time = started.elapsed();
    stats.live_edges.push(s.live_edge_total());

    let started = Instant::now();
    let mut diagnostics = if !cfg.record_diagnostics {
        None
    } else if n > cfg.diagnostic_cap.min(oracle::ORACLE_MAX_N) {
        stats.diagnostics_skipped = true;
        None
    } else {
        let l = oracle::dense_from_multigraph(g);
        let reference = SpectralReference::new(&l).expect("size checked above");
        Some(Diagnostics { reference, accum: DenseMatrix::zeros(n), eps: cfg.eps, event: true })
    };
    if let Some(d) = diagnostics.as_mut() {
        stats.diagnostics.extend(d.row(0, &s));
    }

    let fixed_order = match cfg.variant {
        Variant::LowDegree => None,
        _ => Some(random_permutation(n, cfg.seed)),
    };
    let mut remaining = Remaining::all(n);
    let mut scratch = DedupScratch::new(n);
    let mut star = Vec::new();
    let mut inserted = Vec::new();

    let mut perm = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);

    for k in 0..n - 1 {
        let mut rng = stream_rng(cfg.seed, k as u64 + 1);
        let v = match &fixed_order {
            Some(order) => {
                stats.vertex_draws += 1;
                order[k]
            }
            None => {
                let (v, draws) = choose_vertex_low_degree(&s, &remaining, &mut rng);
                stats.vertex_draws += draws;
                v
            }
        };
        remaining.remove(v);

        let column = s.aggregated_column(v, &mut scratch);
        let alpha = column.total;
        s.drain_star(v, &mut star);
        s.mark_eliminated(v);
        stats.star_degrees.push(star.len());
        inserted.clear();

        perm.push(v);
        if alpha > 0.0 {
            diag.push(alpha);
            row_idx.push(v);
            values.push(1.0);
            for e in &column.entries {
                row_idx.push(e.vertex);
                values.push(-e.weight / alpha);
            }
            match cfg.variant {
                Variant::ExactClique => {
                    let track = s.tracks_leverage();
                    for (i, a) in column.entries.iter().enumerate() {
                        for b in &column.entries[i + 1..] {
                            let w = a.weight * b.weight / alpha;
                            let t = track.then(|| (b.weight * a.leverage + a.weight * b.leverage) / alpha);
                            inserted.push(MultiEdge { u: a.vertex, v: b.vertex, w, t });
                        }
                    }
                }
                _ => {
                    let out = clique_sample(&star, v, &mut rng)?;
                    stats.attempts += out.attempted as u64;
                    inserted = out.samples;
                }
            }
            s.insert_edges(&inserted)?;
            stats.inserted += inserted.len() as u64;
        } else {
            diag.push(0.0);
        }
        col_ptr.push(row_idx.len());
        stats.live_edges.push(s.live_edge_total());

        if let Some(d) = diagnostics.as_mut() {
            let (idx, val) = (&row_idx[col_ptr[k]..], &values[col_ptr[k]..]);
            d.accum.add_rank_one(alpha, idx, val);
            stats.diagnostics.extend(d.row(k + 1, &s));
        }
        observer(&StepEvent {
            step: k + 1,
            vertex: v,
            alpha,
            star: &star,
            inserted: &inserted,
            graph: &s,
        });
    }

    let last = remaining.as_slice()[0];
    let column = s.aggregated_column(last, &mut scratch);
    let mut alpha = column.total;
    if alpha.abs() < 1e-12 * trace_scale {
        alpha = 0.0;
    }
    s.drain_star(last, &mut star);
    s.mark_eliminated(last);
    stats.star_degrees.push(star.len());
    perm.push(last);
    diag.push(alpha);
    row_idx.push(last);
    values.push(1.0);
    col_ptr.push(row_idx.len());

    stats.elimination_time = started.elapsed();
    stats.entries_touched = s.entries_touched();
    Ok(Factorization { n, perm, diag, col_ptr, row_idx, values, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{dense_from_factorization, dense_from_multigraph};

    fn path3() -> MultiGraph {
        MultiGraph::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn grid(w: usize, h: usize) -> MultiGraph {
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let v = y * w + x;
                if x + 1 < w {
                    edges.push((v, v + 1, 1.0 + (v % 3) as f64));
                }
                if y + 1 < h {
                    edges.push((v, v + w, 0.5 + (v % 5) as f64));
                }
            }
        }
        MultiGraph::from_edge_list(w * h, &edges).unwrap()
    }

    fn find_identity_seed(n: usize) -> u64 {
        let id: Vec<usize> = (0..n).collect();
        (0..10_000).find(|&s| random_permutation(n, s) == id).expect("identity order")
    }

    #[test]
    fn rho_formula() {
        assert_eq!(formula_rho(100, 0.5, 2.0), 9162);
        assert_eq!(formula_rho(60, 0.5, 1.0), 3219);
        let cfg = Config::default().with_variant(Variant::LowDegree);
        assert_eq!(cfg.rho(60), 2 * 3219);
        assert_eq!(cfg.with_rho(5).rho(60), 5);
    }

    #[test]
    fn exact_path_with_identity_order() {
        let cfg = Config::default()
            .with_variant(Variant::ExactClique)
            .with_rho(1)
            .with_seed(find_identity_seed(3));
        let f = sparse_cholesky(&path3(), &cfg).unwrap();
        assert_eq!(f.perm(), &[0, 1, 2]);
        assert_eq!(f.diag(), &[1.0, 1.0, 0.0]);
        assert_eq!(f.column(0), (&[0usize, 1][..], &[1.0, -1.0][..]));
        assert_eq!(f.column(1), (&[1usize, 2][..], &[1.0, -1.0][..]));
        assert_eq!(f.column(2), (&[2usize][..], &[1.0][..]));
        assert_eq!(f.fill(), 5);
        let z = dense_from_factorization(&f);
        assert_eq!(z, dense_from_multigraph(&path3()));
        assert!(f.is_lower_triangular());
    }

    #[test]
    fn exact_mode_reconstructs() {
        let g = grid(4, 4);
        let l = dense_from_multigraph(&g);
        for seed in 0..5 {
            let cfg = Config::default().with_variant(Variant::ExactClique).with_seed(seed);
            let f = sparse_cholesky(&g, &cfg).unwrap();
            let err = dense_from_factorization(&f).sub(&l).frobenius() / l.frobenius();
            assert!(err < 1e-10, "seed {seed}: {err}");
            assert!(f.is_lower_triangular());
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = MultiGraph::from_edge_list(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(sparse_cholesky(&g, &Config::default()).unwrap_err(), FactorError::Disconnected);
        let g = MultiGraph::empty(1);
        assert_eq!(sparse_cholesky(&g, &Config::default()).unwrap_err(), FactorError::TooSmall(1));
        let bad = Config { eps: 0.7, ..Config::default() };
        assert!(matches!(sparse_cholesky(&path3(), &bad), Err(FactorError::Config(_))));
        assert!(matches!(
            sparse_cholesky(&path3(), &Config::default().with_rho(0)),
            Err(FactorError::Config(_))
        ));
    }

    #[test]
    fn deterministic_per_config() {
        let g = grid(5, 5);
        for variant in [Variant::RandomPerm, Variant::LowDegree, Variant::ExactClique] {
            let cfg = Config::default().with_variant(variant).with_rho(6).with_seed(42);
            let a = sparse_cholesky(&g, &cfg).unwrap();
            let b = sparse_cholesky(&g, &cfg).unwrap();
            assert!(a.same_factor(&b), "{variant:?}");
            assert_eq!(a.stats.live_edges, b.stats.live_edges);
            let c = sparse_cholesky(&g, &cfg.clone().with_seed(43)).unwrap();
            assert!(!a.same_factor(&c));
        }
    }

    #[test]
    fn sampled_runs_keep_invariants() {
        let g = grid(6, 5);
        for variant in [Variant::RandomPerm, Variant::LowDegree] {
            for seed in 0..4 {
                let cfg = Config::default().with_variant(variant).with_rho(8).with_seed(seed);
                let f = sparse_cholesky(&g, &cfg).unwrap();
                assert!(f.is_lower_triangular());
                assert!(f.diag().iter().all(|&a| a >= 0.0));
                assert_eq!(*f.diag().last().unwrap(), 0.0);
                let st = &f.stats;
                assert_eq!(st.live_edges[0], 8 * 49);
                assert!(st.live_edges.windows(2).all(|w| w[1] <= w[0]));
                assert_eq!(*st.live_edges.last().unwrap(), 0);
                assert!(f.fill() <= 8 * 49 + 30 + st.inserted as usize);
                let attempts: usize = st.star_degrees[..29].iter().sum();
                assert_eq!(st.attempts as usize, attempts);
                let z = dense_from_factorization(&f);
                assert!(z.matvec(&[1.0; 30]).iter().all(|x| x.abs() < 1e-9));
            }
        }
    }

    #[test]
    fn permutations_of_three_are_uniform() {
        let trials = 100_000u64;
        let mut counts = std::collections::HashMap::new();
        for seed in 0..trials {
            *counts.entry(random_permutation(3, seed)).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for (perm, c) in counts {
            assert!((c as f64 - trials as f64 * p).abs() <= 3.0 * sigma, "{perm:?}: {c}");
        }
        assert_eq!(random_permutation(3, 9), random_permutation(3, 9));
        assert_eq!(random_permutation(1, 9), vec![0]);
    }

    #[test]
    fn low_degree_skips_star_center() {
        // K_{1,9}: degrees 9 and 1, average 1.8, cap 3.6.
        let edges: Vec<_> = (1..10).map(|v| (0, v, 1.0)).collect();
        let g = MultiGraph::from_edge_list(10, &edges).unwrap();
        let remaining = Remaining::all(10);
        assert!(!is_low_degree(&g, 10, 0));
        assert!((1..10).all(|v| is_low_degree(&g, 10, v)));
        for seed in 0..2000 {
            let (v, _) = choose_vertex_low_degree(&g, &remaining, &mut stream_rng(seed, 1));
            assert_ne!(v, 0);
        }
    }

    #[test]
    fn low_degree_pair_plus_pendant() {
        // 0 =4= 1, and 1 - 2: degrees (4, 5, 1), total 10 over 3 vertices,
        // cap = 2 * 10 / 3 = 6.67, so everything is eligible.
        let g = MultiGraph::from_edge_list(
            3,
            &[(0, 1, 1.0), (0, 1, 1.0), (0, 1, 1.0), (0, 1, 1.0), (1, 2, 1.0)],
        )
        .unwrap();
        assert!((0..3).all(|v| is_low_degree(&g, 3, v)));
        let mut regular = MultiGraph::empty(4);
        regular
            .insert_edges(&[
                MultiEdge::new(0, 1, 1.0),
                MultiEdge::new(1, 2, 1.0),
                MultiEdge::new(2, 3, 1.0),
                MultiEdge::new(3, 0, 1.0),
            ])
            .unwrap();
        assert!((0..4).all(|v| is_low_degree(&regular, 4, v)));
    }

    #[test]
    fn pendant_heavy_vertex_excluded() {
        // Vertex 0 carries 6 parallel edges to 1 and pendants 2..5 hang off 1.
        // Degrees (6, 10, 1, 1, 1, 1): total 20 over 6, cap 6.67.
        let mut edges = vec![(0, 1, 1.0); 6];
        edges.extend((2..6).map(|v| (1, v, 1.0)));
        let g = MultiGraph::from_edge_list(6, &edges).unwrap();
        let eligible: Vec<usize> = (0..6).filter(|&v| is_low_degree(&g, 6, v)).collect();
        assert_eq!(eligible, vec![0, 2, 3, 4, 5]);
    }

    #[test]
    fn exact_mode_diagnostics_are_flat() {
        let g = grid(3, 4);
        let cfg = Config { record_diagnostics: true, ..Config::default() }
            .with_variant(Variant::ExactClique)
            .with_rho(2);
        let f = sparse_cholesky(&g, &cfg).unwrap();
        assert_eq!(f.stats.diagnostics.len(), 12);
        for row in &f.stats.diagnostics {
            assert!((row.lambda_min - 1.0).abs() < 1e-9 && (row.lambda_max - 1.0).abs() < 1e-9);
            assert!(row.event_holds && row.laplacian_ok);
        }
    }

    #[test]
    fn diagnostics_skipped_above_cap() {
        let g = grid(4, 4);
        let cfg = Config { record_diagnostics: true, diagnostic_cap: 8, ..Config::default() }.with_rho(2);
        let f = sparse_cholesky(&g, &cfg).unwrap();
        assert!(f.stats.diagnostics_skipped);
        assert!(f.stats.diagnostics.is_empty());
    }

    #[test]
    fn sampled_diagnostics_start_at_one() {
        let g = grid(4, 4);
        let cfg = Config { record_diagnostics: true, ..Config::default() }.with_seed(1);
        let f = sparse_cholesky(&g, &cfg).unwrap();
        let first = &f.stats.diagnostics[0];
        assert_eq!(first.step, 0);
        assert!((first.lambda_min - 1.0).abs() < 1e-9 && (first.lambda_max - 1.0).abs() < 1e-9);
        assert!(f.stats.diagnostics.iter().all(|r| r.laplacian_ok));
        // The formula split factor keeps every prefix inside the band.
        assert!(f.stats.diagnostics.last().unwrap().event_holds);
    }

    #[test]
    fn observer_sees_every_step() {
        let g = grid(3, 3);
        let mut steps = Vec::new();
        let cfg = Config::default().with_rho(3).with_seed(5);
        let f = sparse_cholesky_observed(&g, &cfg, |ev| {
            assert!(ev.graph.is_eliminated(ev.vertex));
            assert!(ev.inserted.len() <= ev.star.len());
            steps.push((ev.step, ev.graph.live_edge_total()));
        })
        .unwrap();
        assert_eq!(steps.len(), 8);
        for (i, (step, live)) in steps.iter().enumerate() {
            assert_eq!(*step, i + 1);
            assert_eq!(*live, f.stats.live_edges[i + 1]);
        }
    }

    #[test]
    fn from_parts_validates() {
        let ok = Factorization::from_parts(vec![1, 0], vec![1.0, 0.0], vec![0, 2, 3], vec![1, 0, 0], vec![1.0, -1.0, 1.0]);
        assert!(ok.unwrap().is_lower_triangular());
        assert!(Factorization::from_parts(vec![0, 0], vec![1.0, 0.0], vec![0, 0, 0], vec![], vec![]).is_err());
        assert!(Factorization::from_parts(vec![0, 1], vec![1.0], vec![0, 0, 0], vec![], vec![]).is_err());
        assert!(Factorization::from_parts(vec![0, 1], vec![1.0, 0.0], vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
    }
}
