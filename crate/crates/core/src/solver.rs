//! Preconditioned iterative refinement for `L x = b`.

use thiserror::Error;

use crate::factorizer::Factorization;
use crate::multigraph::MultiGraph;

/// Tolerance on the mean component of a right-hand side, relative to `||b||`.
pub const MEAN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("vector has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("right-hand side is not orthogonal to the all-ones vector (|1^T b| / sqrt(n) = {projection:e}, ||b|| = {norm:e})")]
    NotMeanZero { projection: f64, norm: f64 },
    #[error("eps_solve must lie in (0, 1), got {0}")]
    BadTolerance(f64),
}

/// A symmetric linear operator.
pub trait Operator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Compressed Laplacian of a multigraph; parallel edges are merged.
#[derive(Debug, Clone)]
pub struct SparseLaplacian {
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl SparseLaplacian {
    pub fn from_multigraph(g: &MultiGraph) -> Self {
        let n = g.n();
        let mut diag = vec![0.0; n];
        let mut nbrs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for e in g.alive_edges() {
            diag[e.u] += e.w;
            diag[e.v] += e.w;
            nbrs[e.u].push((e.v, e.w));
            nbrs[e.v].push((e.u, e.w));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        for list in &mut nbrs {
            list.sort_by_key(|&(u, _)| u);
            for &(u, w) in list.iter() {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == u {
                    *weights.last_mut().unwrap() += w;
                } else {
                    cols.push(u);
                    weights.push(w);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseLaplacian { diag, row_ptr, cols, weights }
    }
}

impl Operator for SparseLaplacian {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.diag.len() {
            let mut acc = self.diag[i] * x[i];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc -= self.weights[p] * x[self.cols[p]];
            }
            y[i] = acc;
        }
    }
}

/// Subtracts the mean.
pub fn project_mean_zero(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

fn project_in_place(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Applies `Z^+ = P L^{-T} D^+ L^{-1} P^T` to `b` by forward and back
/// substitution.
///
/// Columns with `alpha = 0` are treated as unit columns, which leaves `Z`
/// unchanged since `D^+` annihilates them. The triangular solve then gives a
/// symmetric generalized inverse `G`; input and output are projected off the
/// all-ones vector, and `Pi G Pi` is the pseudoinverse whenever `ker Z`
/// is `span(1)`.
pub fn apply_precond(f: &Factorization, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    let n = f.n();
    if b.len() != n {
        return Err(SolveError::Dimension { expected: n, got: b.len() });
    }
    let perm = f.perm();
    let diag = f.diag();
    let mut work = project_mean_zero(b);
    let mut z = vec![0.0; n];
    for k in 0..n {
        let (idx, val) = f.column(k);
        let zk = work[perm[k]];
        z[k] = zk;
        if zk != 0.0 {
            for (&r, &c) in idx.iter().zip(val).skip(1) {
                work[r] -= c * zk;
            }
        }
    }
    for k in 0..n {
        z[k] = if diag[k] > 0.0 { z[k] / diag[k] } else { 0.0 };
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let (idx, val) = f.column(k);
        let mut acc = z[k];
        for (&r, &c) in idx.iter().zip(val).skip(1) {
            acc -= c * x[r];
        }
        x[perm[k]] = acc;
    }
    project_in_place(&mut x);
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOptions<'a> {
    pub eps_solve: f64,
    /// Stop once `||L x - b|| <= eps_solve ||b||`.
    pub early_stop: bool,
    /// `L^+ b`, when known, to report L-norm errors.
    pub reference: Option<&'a [f64]>,
}

impl RefineOptions<'_> {
    pub fn new(eps_solve: f64) -> Self {
        RefineOptions { eps_solve, early_stop: true, reference: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||x^(i) - L^+ b||_L` for `i = 0..=iterations` (empty without a reference).
    pub l_norm_errors: Vec<f64>,
    /// `||L x^(i) - b||_2` for `i = 0..=iterations`.
    pub residual_norms: Vec<f64>,
    pub x: Vec<f64>,
    /// Final relative residual is at most `eps_solve`.
    pub converged: bool,
    pub stopped_early: bool,
}

impl SolveReport {
    /// L-norm errors relative to `||L^+ b||_L`.
    pub fn relative_l_errors(&self) -> Vec<f64> {
        match self.l_norm_errors.first() {
            Some(&e0) if e0 > 0.0 => self.l_norm_errors.iter().map(|e| e / e0).collect(),
            _ => Vec::new(),
        }
    }
}

/// `ceil(3 ln(1 / eps))` refinement steps.
pub fn refinement_steps(eps_solve: f64) -> usize {
    (3.0 * (1.0 / eps_solve).ln()).ceil() as usize
}

/// `x <- x - 1/2 Z^+ (L x - b)` from `x = 0`, for `ceil(3 ln(1/eps))` steps.
pub fn iterative_refinement<O: Operator + ?Sized>(
    op: &O,
    f: &Factorization,
    b: &[f64],
    opts: &RefineOptions<'_>,
) -> Result<SolveReport, SolveError> {
    let n = op.dim();
    if b.len() != n || f.n() != n {
        return Err(SolveError::Dimension { expected: n, got: if b.len() != n { b.len() } else { f.n() } });
    }
    if !(opts.eps_solve > 0.0 && opts.eps_solve < 1.0) {
        return Err(SolveError::BadTolerance(opts.eps_solve));
    }
    if let Some(r) = opts.reference {
        if r.len() != n {
            return Err(SolveError::Dimension { expected: n, got: r.len() });
        }
    }
    let b_norm = norm(b);
    let projection = b.iter().sum::<f64>().abs() / (n as f64).sqrt();
    if projection > MEAN_TOLERANCE * b_norm {
        return Err(SolveError::NotMeanZero { projection, norm: b_norm });
    }
    let b = project_mean_zero(b);
    let b_norm = norm(&b);

    let mut x = vec![0.0; n];
    let mut lx = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut l_err = vec![0.0; n];
    let mut residual_norms = Vec::new();
    let mut l_norm_errors = Vec::new();

    let mut measure = |x: &[f64], lx: &[f64], r: &mut [f64], out_res: &mut Vec<f64>, out_err: &mut Vec<f64>| {
        for i in 0..n {
            r[i] = lx[i] - b[i];
        }
        out_res.push(norm(r));
        if let Some(reference) = opts.reference {
            for i in 0..n {
                err[i] = x[i] - reference[i];
            }
            op.apply(&err, &mut l_err);
            let e2: f64 = err.iter().zip(&l_err).map(|(a, c)| a * c).sum();
            out_err.push(e2.max(0.0).sqrt());
        }
    };

    measure(&x, &lx, &mut r, &mut residual_norms, &mut l_norm_errors);
    let steps = refinement_steps(opts.eps_solve);
    let mut iterations = 0;
    let mut stopped_early = false;
    if b_norm == 0.0 {
        return Ok(SolveReport {
            iterations,
            l_norm_errors,
            residual_norms,
            x,
            converged: true,
            stopped_early: true,
        });
    }
    for _ in 0..steps {
        let dx = apply_precond(f, &r)?;
        for i in 0..n {
            x[i] -= 0.5 * dx[i];
        }
        project_in_place(&mut x);
        op.apply(&x, &mut lx);
        iterations += 1;
        measure(&x, &lx, &mut r, &mut residual_norms, &mut l_norm_errors);
        if opts.early_stop && *residual_norms.last().unwrap() <= opts.eps_solve * b_norm {
            stopped_early = iterations < steps;
            break;
        }
    }
    let converged = *residual_norms.last().unwrap() <= opts.eps_solve * b_norm;
    Ok(SolveReport { iterations, l_norm_errors, residual_norms, x, converged, stopped_early })
}
