//! Dense O(n^3) reference computations used to check the sparse code paths.
//!
//! Everything here works on small matrices (n <= [`ORACLE_MAX_N`]) and uses a
//! cyclic Jacobi eigensolver, so results do not depend on any external
//! linear-algebra backend.

use thiserror::Error;

use crate::factorizer::Factorization;
use crate::multigraph::{MultiEdge, MultiGraph};
use crate::sampling::{pair_sample, AliasTable, SamplingError};

pub const ORACLE_MAX_N: usize = 256;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const KERNEL_CUTOFF: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle is limited to n <= {ORACLE_MAX_N}, got {0}")]
    TooLarge(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("graph is disconnected (kernel dimension {0})")]
    Disconnected(usize),
    #[error("kernel of the reference is not contained in the kernel of the test matrix (residual {0:e})")]
    KernelMismatch(f64),
}

/// Square row-major dense matrix. Used for Laplacians and for other
/// symmetric matrices sharing their kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

/// A dense Laplacian; kept as an alias since most oracle inputs are one.
pub type DenseLap = DenseMatrix;

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "row {i} has wrong length");
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Adds `w * b_{u,v} b_{u,v}^T`.
    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) {
        self[(u, u)] += w;
        self[(v, v)] += w;
        self[(u, v)] -= w;
        self[(v, u)] -= w;
    }

    /// Adds `alpha * c c^T` for a sparse `c`.
    pub fn add_rank_one(&mut self, alpha: f64, idx: &[usize], val: &[f64]) {
        for (&i, &a) in idx.iter().zip(val) {
            for (&j, &b) in idx.iter().zip(val) {
                self[(i, j)] += alpha * a * b;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        DenseMatrix { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        DenseMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        DenseMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        assert_eq!(n, other.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Symmetric, zero row sums, nonpositive off-diagonals, to within
    /// `tol * max |entry|`.
    pub fn is_laplacian(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let n = self.n;
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let a = self[(i, j)];
                sum += a;
                if (a - self[(j, i)]).abs() > tol * scale {
                    return false;
                }
                if i != j && a > tol * scale {
                    return false;
                }
            }
            if sum.abs() > tol * scale * n as f64 {
                return false;
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

fn check_size(n: usize) -> Result<(), OracleError> {
    if n > ORACLE_MAX_N {
        Err(OracleError::TooLarge(n))
    } else {
        Ok(())
    }
}

/// Sum of the Laplacians of all alive multi-edges.
pub fn dense_from_multigraph(g: &MultiGraph) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(g.n());
    for e in g.alive_edges() {
        m.add_edge(e.u, e.v, e.w);
    }
    m
}

/// `sum_k alpha_k c_k c_k^T`.
pub fn dense_from_factorization(f: &Factorization) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(f.n());
    for k in 0..f.n() {
        let (idx, val) = f.column(k);
        m.add_rank_one(f.diag()[k], idx, val);
    }
    m
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues ascending, with
/// eigenvectors stored as the columns of the returned matrix.
pub fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.n;
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let norm = a.frobenius();
    if n <= 1 || norm == 0.0 {
        let vals = (0..n).map(|i| m[(i, i)]).collect();
        return (vals, v);
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let vals = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vecs = DenseMatrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    (vals, vecs)
}

/// Eigenbasis of a reference Laplacian split into range and kernel.
///
/// Precomputes what is needed for pseudoinverses and for generalized
/// eigenvalues against the reference.
#[derive(Debug, Clone)]
pub struct SpectralReference {
    n: usize,
    // Orthonormal basis of range(L), columns scaled by lambda^{-1/2}.
    whitened: Vec<Vec<f64>>,
    range: Vec<(f64, Vec<f64>)>,
    kernel: Vec<Vec<f64>>,
}

impl SpectralReference {
    pub fn new(l: &DenseMatrix) -> Result<Self, OracleError> {
        check_size(l.n)?;
        let n = l.n;
        let (vals, vecs) = symmetric_eigen(l);
        let top = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut range = Vec::new();
        let mut kernel = Vec::new();
        for (i, &lam) in vals.iter().enumerate() {
            let col: Vec<f64> = (0..n).map(|k| vecs[(k, i)]).collect();
            if lam.abs() <= KERNEL_CUTOFF * top || top == 0.0 {
                kernel.push(col);
            } else {
                range.push((lam, col));
            }
        }
        let whitened = range
            .iter()
            .map(|(lam, col)| col.iter().map(|x| x / lam.sqrt()).collect())
            .collect();
        Ok(SpectralReference { n, whitened, range, kernel })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    /// Moore-Penrose pseudoinverse.
    pub fn pseudoinverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut p = DenseMatrix::zeros(n);
        for (lam, col) in &self.range {
            for i in 0..n {
                let a = col[i] / lam;
                for j in 0..n {
                    p[(i, j)] += a * col[j];
                }
            }
        }
        p
    }

    /// Extreme eigenvalues of `L^{+/2} Z L^{+/2}` on range(L).
    pub fn bounds(&self, z: &DenseMatrix) -> Result<(f64, f64), OracleError> {
        let vals = self.generalized_eigenvalues(z)?;
        Ok((vals[0], *vals.last().unwrap()))
    }

    /// All eigenvalues of `L^{+/2} Z L^{+/2}` restricted to range(L), ascending.
    pub fn generalized_eigenvalues(&self, z: &DenseMatrix) -> Result<Vec<f64>, OracleError> {
        if z.n != self.n {
            return Err(OracleError::Dimension(self.n, z.n));
        }
        let scale = z.max_abs().max(1.0);
        for k in &self.kernel {
            let zk = z.matvec(k);
            let res = zk.iter().map(|x| x * x).sum::<f64>().sqrt();
            if res > 1e-8 * scale * (self.n as f64).sqrt() {
                return Err(OracleError::KernelMismatch(res));
            }
        }
        let r = self.whitened.len();
        if r == 0 {
            return Ok(vec![0.0]);
        }
        let zw: Vec<Vec<f64>> = self.whitened.iter().map(|w| z.matvec(w)).collect();
        let mut m = DenseMatrix::zeros(r);
        for i in 0..r {
            for j in i..r {
                let x: f64 = self.whitened[i].iter().zip(&zw[j]).map(|(a, b)| a * b).sum();
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        Ok(symmetric_eigen(&m).0)
    }
}

/// Extreme generalized eigenvalues of `Z` against `L` on range(L).
pub fn spectral_bounds(l: &DenseMatrix, z: &DenseMatrix) -> Result<(f64, f64), OracleError> {
    SpectralReference::new(l)?.bounds(z)
}

/// Pairwise effective resistances of a connected Laplacian.
#[derive(Debug, Clone)]
pub struct Resistances {
    pinv: DenseMatrix,
}

impl Resistances {
    pub fn new(l: &DenseMatrix) -> Result<Self, OracleError> {
        let reference = SpectralReference::new(l)?;
        if l.n > 1 && reference.kernel_dim() != 1 {
            return Err(OracleError::Disconnected(reference.kernel_dim()));
        }
        Ok(Resistances { pinv: reference.pseudoinverse() })
    }

    /// `b_{u,z}^T L^+ b_{u,z}`.
    pub fn get(&self, u: usize, z: usize) -> f64 {
        let p = &self.pinv;
        p[(u, u)] + p[(z, z)] - p[(u, z)] - p[(z, u)]
    }

    /// `w * R(u, v)`, the leverage of a multi-edge against the reference.
    pub fn leverage(&self, e: &MultiEdge) -> f64 {
        e.w * self.get(e.u, e.v)
    }

    pub fn pseudoinverse(&self) -> &DenseMatrix {
        &self.pinv
    }
}

pub fn effective_resistance(l: &DenseMatrix, u: usize, z: usize) -> Result<f64, OracleError> {
    Ok(Resistances::new(l)?.get(u, z))
}

/// `R(u, z) <= R(u, v) + R(v, z)` up to 1e-9.
pub fn reff_triangle_check(r: &Resistances, u: usize, v: usize, z: usize) -> bool {
    r.get(u, z) <= r.get(u, v) + r.get(v, z) + 1e-9
}

/// One step of exact elimination of `v` from `s`.
#[derive(Debug, Clone)]
pub struct SchurStep {
    pub alpha: f64,
    pub c: Vec<f64>,
    pub next: DenseMatrix,
}

/// `S - alpha c c^T` with `alpha = S(v,v)` and `c = S(:,v) / alpha`.
pub fn exact_schur_step(s: &DenseMatrix, v: usize) -> SchurStep {
    let n = s.n;
    let alpha = s[(v, v)];
    if alpha == 0.0 {
        return SchurStep { alpha: 0.0, c: vec![0.0; n], next: s.clone() };
    }
    let c: Vec<f64> = (0..n).map(|i| s[(i, v)] / alpha).collect();
    let mut next = s.clone();
    for i in 0..n {
        for j in 0..n {
            next[(i, j)] -= alpha * c[i] * c[j];
        }
    }
    // Row and column v vanish exactly in exact arithmetic.
    for i in 0..n {
        next[(i, v)] = 0.0;
        next[(v, i)] = 0.0;
    }
    SchurStep { alpha, c, next }
}

/// The Laplacian of the edges of `s` incident on `v`.
pub fn dense_star(s: &DenseMatrix, v: usize) -> DenseMatrix {
    let mut st = DenseMatrix::zeros(s.n);
    for u in 0..s.n {
        if u != v && s[(v, u)] != 0.0 {
            st.add_edge(v, u, -s[(v, u)]);
        }
    }
    st
}

/// `C_v(S) = star(S, v) - S(:,v) S(:,v)^T / S(v,v)` by the matrix formula.
pub fn exact_clique(s: &DenseMatrix, v: usize) -> DenseMatrix {
    let n = s.n;
    let d = s[(v, v)];
    let mut c = dense_star(s, v);
    if d == 0.0 {
        return DenseMatrix::zeros(n);
    }
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] -= s[(i, v)] * s[(j, v)] / d;
        }
    }
    c
}

/// `C_v(S)` by the pairwise rule: neighbours `i, j` joined with weight
/// `w_i w_j / d`.
pub fn exact_clique_pairwise(s: &DenseMatrix, v: usize) -> DenseMatrix {
    let n = s.n;
    let d = s[(v, v)];
    let mut c = DenseMatrix::zeros(n);
    if d == 0.0 {
        return c;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if i == v || j == v {
                continue;
            }
            let (wi, wj) = (-s[(v, i)], -s[(v, j)]);
            if wi != 0.0 && wj != 0.0 {
                c.add_edge(i, j, wi * wj / d);
            }
        }
    }
    c
}

/// `C_v` computed from an explicit multi-edge star:
/// `1/2 sum_{e,e'} w(e) w(e') / w_S(v) * b b^T`.
pub fn exact_clique_from_star(star: &[MultiEdge], v: usize, n: usize) -> DenseMatrix {
    let total: f64 = star.iter().map(|e| e.w).sum();
    let mut c = DenseMatrix::zeros(n);
    if total == 0.0 {
        return c;
    }
    for e in star {
        for f in star {
            let (a, b) = (e.other(v), f.other(v));
            if a != b {
                c.add_edge(a, b, 0.5 * e.w * f.w / total);
            }
        }
    }
    c
}

/// Exact expectation of one clique-sample attempt on `star`, by enumerating
/// all ordered pairs `(first, second)` with the alias table's own pmf for the
/// weighted draw and `1/d` for the uniform one.
pub fn clique_sample_expectation(star: &[MultiEdge], center: usize, n: usize) -> Result<DenseMatrix, SamplingError> {
    let weights: Vec<f64> = star.iter().map(|e| e.w).collect();
    let pmf = AliasTable::new(&weights)?.pmf();
    let d = star.len();
    let mut m = DenseMatrix::zeros(n);
    for (i, &p) in pmf.iter().enumerate() {
        for j in 0..d {
            if let Some(e) = pair_sample(star, center, i, j) {
                m.add_edge(e.u, e.v, p * e.w / d as f64);
            }
        }
    }
    Ok(m)
}
