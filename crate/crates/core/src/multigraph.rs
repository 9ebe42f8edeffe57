//! Laplacians kept explicitly as sums of multi-edge Laplacians.
//!
//! Edges live in a pool addressed by index. Each vertex keeps a list of pool
//! indices; removing a star marks its edges dead and the stale entries left
//! in the neighbours' lists are skipped (and dropped) the next time those
//! lists are walked. When dead slots outnumber live ones the pool is
//! compacted, which keeps memory proportional to the live edge count.

use thiserror::Error;

/// Pools smaller than this are never compacted.
const MIN_COMPACT_POOL: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({u}, {v}) has nonpositive or non-finite weight {w}")]
    BadWeight { u: usize, v: usize, w: f64 },
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex {0} has already been eliminated")]
    Eliminated(usize),
    #[error("split factor must be at least 1")]
    ZeroSplit,
}

/// One weighted multi-edge `w * b_{u,v} b_{u,v}^T`.
///
/// `t` is an optional upper bound on the edge's leverage `w * R(u, v)`
/// measured against the input Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiEdge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
    pub t: Option<f64>,
}

impl MultiEdge {
    pub fn new(u: usize, v: usize, w: f64) -> Self {
        MultiEdge { u, v, w, t: None }
    }

    pub fn with_leverage(u: usize, v: usize, w: f64, t: f64) -> Self {
        MultiEdge { u, v, w, t: Some(t) }
    }

    /// The endpoint that is not `x`.
    #[inline]
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// One distinct neighbour of an aggregated column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnEntry {
    pub vertex: usize,
    /// Sum of the multi-edge weights to `vertex`.
    pub weight: f64,
    /// Sum of the multi-edge leverage bounds to `vertex` (0 when untracked).
    pub leverage: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregatedColumn {
    pub entries: Vec<ColumnEntry>,
    /// `w_S(v)`: the total weight of the star.
    pub total: f64,
}

/// Scratch arrays used to merge parallel multi-edges into one column entry.
///
/// Both arrays stay all-zero between calls; only touched slots are reset.
#[derive(Debug, Clone)]
pub struct DedupScratch {
    weight: Vec<f64>,
    leverage: Vec<f64>,
    touched: Vec<usize>,
}

impl DedupScratch {
    pub fn new(n: usize) -> Self {
        DedupScratch {
            weight: vec![0.0; n],
            leverage: vec![0.0; n],
            touched: Vec::new(),
        }
    }

    /// True when every slot is zero.
    pub fn is_clear(&self) -> bool {
        self.weight.iter().all(|&x| x == 0.0)
            && self.leverage.iter().all(|&x| x == 0.0)
            && self.touched.is_empty()
    }

    /// Aggregates a star (edges incident on `center`) by neighbour.
    pub fn aggregate(&mut self, center: usize, star: &[MultiEdge]) -> AggregatedColumn {
        let mut total = 0.0;
        for e in star {
            let u = e.other(center);
            if self.weight[u] == 0.0 {
                self.touched.push(u);
            }
            self.weight[u] += e.w;
            self.leverage[u] += e.t.unwrap_or(0.0);
            total += e.w;
        }
        let entries = self
            .touched
            .iter()
            .map(|&u| ColumnEntry {
                vertex: u,
                weight: self.weight[u],
                leverage: self.leverage[u],
            })
            .collect();
        for &u in &self.touched {
            self.weight[u] = 0.0;
            self.leverage[u] = 0.0;
        }
        self.touched.clear();
        AggregatedColumn { entries, total }
    }
}

/// The evolving multi-edge Laplacian.
#[derive(Debug, Clone)]
pub struct MultiGraph {
    n: usize,
    ends: Vec<[u32; 2]>,
    weight: Vec<f64>,
    // Empty unless leverage tracking is on.
    leverage: Vec<f64>,
    alive: Vec<bool>,
    adjacency: Vec<Vec<u32>>,
    live_mult: Vec<usize>,
    weighted_deg: Vec<f64>,
    eliminated: Vec<bool>,
    live_edges: usize,
    tracking: bool,
    // Adjacency entries visited, dead ones included.
    touched: u64,
}

impl MultiGraph {
    /// An edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "vertex count exceeds u32 range");
        MultiGraph {
            n,
            ends: Vec::new(),
            weight: Vec::new(),
            leverage: Vec::new(),
            alive: Vec::new(),
            adjacency: vec![Vec::new(); n],
            live_mult: vec![0; n],
            weighted_deg: vec![0.0; n],
            eliminated: vec![false; n],
            live_edges: 0,
            tracking: false,
            touched: 0,
        }
    }

    /// Builds a graph from `(u, v, w)` triples. Parallel triples stay distinct.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        let mut g = MultiGraph::empty(n);
        for &(u, v, w) in edges {
            g.validate(u, v, w)?;
        }
        for &(u, v, w) in edges {
            g.push(MultiEdge::new(u, v, w));
        }
        Ok(g)
    }

    fn validate(&self, u: usize, v: usize, w: f64) -> Result<(), GraphError> {
        for x in [u, v] {
            if x >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: x, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(GraphError::BadWeight { u, v, w });
        }
        Ok(())
    }

    fn push(&mut self, e: MultiEdge) {
        let id = self.ends.len();
        assert!(id < u32::MAX as usize, "edge pool exceeds u32 range");
        self.ends.push([e.u as u32, e.v as u32]);
        self.weight.push(e.w);
        if self.tracking {
            self.leverage.push(e.t.unwrap_or(1.0));
        }
        self.alive.push(true);
        for x in [e.u, e.v] {
            self.adjacency[x].push(id as u32);
            self.live_mult[x] += 1;
            self.weighted_deg[x] += e.w;
        }
        self.live_edges += 1;
    }

    fn edge(&self, id: usize) -> MultiEdge {
        let [u, v] = self.ends[id];
        MultiEdge {
            u: u as usize,
            v: v as usize,
            w: self.weight[id],
            t: self.tracking.then(|| self.leverage[id]),
        }
    }

    /// Replaces every live edge by `rho` copies carrying `1/rho` of its weight.
    ///
    /// With `track_leverage` each copy records the bound `t = 1/rho`; input edges
    /// are trivially 1-bounded.
    pub fn split_edges(&self, rho: usize, track_leverage: bool) -> Result<MultiGraph, GraphError> {
        if rho == 0 {
            return Err(GraphError::ZeroSplit);
        }
        let mut out = MultiGraph::empty(self.n);
        out.tracking = track_leverage;
        out.eliminated.clone_from(&self.eliminated);
        let inv = 1.0 / rho as f64;
        let live: Vec<MultiEdge> = self.alive_edges().collect();
        let total = live.len() * rho;
        out.ends.reserve_exact(total);
        out.weight.reserve_exact(total);
        out.alive.reserve_exact(total);
        if track_leverage {
            out.leverage.reserve_exact(total);
        }
        for e in live {
            let t = e.t.unwrap_or(1.0) * inv;
            let copy = MultiEdge {
                u: e.u,
                v: e.v,
                w: if rho == 1 { e.w } else { e.w * inv },
                t: Some(t),
            };
            for _ in 0..rho {
                out.push(copy);
            }
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of alive multi-edges.
    pub fn live_edge_total(&self) -> usize {
        self.live_edges
    }

    /// `mult_S(v)`: alive multi-edges incident on `v`.
    pub fn live_mult(&self, v: usize) -> usize {
        self.live_mult[v]
    }

    /// `w_S(v)`, maintained incrementally.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.weighted_deg[v]
    }

    pub fn is_eliminated(&self, v: usize) -> bool {
        self.eliminated[v]
    }

    pub fn tracks_leverage(&self) -> bool {
        self.tracking
    }

    /// Adjacency entries visited so far, including skipped dead ones.
    pub fn entries_touched(&self) -> u64 {
        self.touched
    }

    /// Slots in the edge pool (alive and dead).
    pub fn pool_len(&self) -> usize {
        self.ends.len()
    }

    pub fn alive_edges(&self) -> impl Iterator<Item = MultiEdge> + '_ {
        (0..self.ends.len())
            .filter(move |&i| self.alive[i])
            .map(move |i| self.edge(i))
    }

    /// Alive edges incident on `v`, read without mutation.
    pub fn star(&self, v: usize) -> Vec<MultiEdge> {
        self.adjacency[v]
            .iter()
            .map(|&id| id as usize)
            .filter(|&id| self.alive[id])
            .map(|id| self.edge(id))
            .collect()
    }

    /// Merges the alive edges at `v` into one entry per distinct neighbour.
    pub fn aggregated_column(&mut self, v: usize, scratch: &mut DedupScratch) -> AggregatedColumn {
        self.prune(v);
        let ids = std::mem::take(&mut self.adjacency[v]);
        let mut total = 0.0;
        for &id in &ids {
            let id = id as usize;
            let [a, b] = self.ends[id];
            let u = if a as usize == v { b } else { a } as usize;
            if scratch.weight[u] == 0.0 {
                scratch.touched.push(u);
            }
            scratch.weight[u] += self.weight[id];
            if self.tracking {
                scratch.leverage[u] += self.leverage[id];
            }
            total += self.weight[id];
        }
        self.adjacency[v] = ids;
        let entries = scratch
            .touched
            .iter()
            .map(|&u| ColumnEntry {
                vertex: u,
                weight: scratch.weight[u],
                leverage: scratch.leverage[u],
            })
            .collect();
        for &u in &scratch.touched {
            scratch.weight[u] = 0.0;
            scratch.leverage[u] = 0.0;
        }
        scratch.touched.clear();
        AggregatedColumn { entries, total }
    }

    // Drops dead entries from v's adjacency list.
    fn prune(&mut self, v: usize) {
        let alive = &self.alive;
        let list = &mut self.adjacency[v];
        self.touched += list.len() as u64;
        list.retain(|&id| alive[id as usize]);
    }

    /// Removes every alive edge incident on `v` and returns them.
    pub fn remove_star(&mut self, v: usize) -> Vec<MultiEdge> {
        let mut out = Vec::new();
        self.drain_star(v, &mut out);
        out
    }

    /// As [`remove_star`](Self::remove_star) but writes into `out` (cleared first).
    pub fn drain_star(&mut self, v: usize, out: &mut Vec<MultiEdge>) {
        out.clear();
        let ids = std::mem::take(&mut self.adjacency[v]);
        self.touched += ids.len() as u64;
        for &id in &ids {
            let id = id as usize;
            if !self.alive[id] {
                continue;
            }
            let e = self.edge(id);
            self.alive[id] = false;
            self.live_edges -= 1;
            for x in [e.u, e.v] {
                self.live_mult[x] -= 1;
                self.weighted_deg[x] -= e.w;
            }
            out.push(e);
        }
        // Exact zero once the star is gone; avoids carrying rounding residue.
        self.weighted_deg[v] = 0.0;
        let mut ids = ids;
        ids.clear();
        self.adjacency[v] = ids;
        self.maybe_compact();
    }

    /// Appends edges as alive. Fails without changing the graph if any edge is
    /// invalid or touches an eliminated vertex.
    pub fn insert_edges(&mut self, edges: &[MultiEdge]) -> Result<(), GraphError> {
        for e in edges {
            self.validate(e.u, e.v, e.w)?;
            for x in [e.u, e.v] {
                if self.eliminated[x] {
                    return Err(GraphError::Eliminated(x));
                }
            }
        }
        for &e in edges {
            self.push(e);
        }
        Ok(())
    }

    /// Marks `v` eliminated; later insertions touching it are rejected.
    pub fn mark_eliminated(&mut self, v: usize) {
        self.eliminated[v] = true;
    }

    fn maybe_compact(&mut self) {
        let pool = self.ends.len();
        if pool < MIN_COMPACT_POOL || pool - self.live_edges <= self.live_edges {
            return;
        }
        let mut remap = vec![u32::MAX; pool];
        let mut next = 0usize;
        for id in 0..pool {
            if self.alive[id] {
                remap[id] = next as u32;
                self.ends[next] = self.ends[id];
                self.weight[next] = self.weight[id];
                if self.tracking {
                    self.leverage[next] = self.leverage[id];
                }
                next += 1;
            }
        }
        self.ends.truncate(next);
        self.weight.truncate(next);
        if self.tracking {
            self.leverage.truncate(next);
        }
        self.alive.clear();
        self.alive.resize(next, true);
        for list in &mut self.adjacency {
            list.retain_mut(|id| {
                let m = remap[*id as usize];
                *id = m;
                m != u32::MAX
            });
        }
    }

    /// Recounts `(live_mult, weighted_deg, live_edge_total)` from the pool.
    pub fn rescan_counters(&self) -> (Vec<usize>, Vec<f64>, usize) {
        let mut mult = vec![0; self.n];
        let mut wdeg = vec![0.0; self.n];
        let mut total = 0;
        for e in self.alive_edges() {
            mult[e.u] += 1;
            mult[e.v] += 1;
            wdeg[e.u] += e.w;
            wdeg[e.v] += e.w;
            total += 1;
        }
        (mult, wdeg, total)
    }

    /// Connectivity of the vertices that are not eliminated, via alive edges.
    pub fn is_connected(&self) -> bool {
        let remaining: Vec<usize> = (0..self.n).filter(|&v| !self.eliminated[v]).collect();
        if remaining.len() <= 1 {
            return true;
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = remaining.len();
        for e in self.alive_edges() {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(g: &MultiGraph) -> Vec<Vec<f64>> {
        let n = g.n();
        let mut m = vec![vec![0.0; n]; n];
        for e in g.alive_edges() {
            m[e.u][e.u] += e.w;
            m[e.v][e.v] += e.w;
            m[e.u][e.v] -= e.w;
            m[e.v][e.u] -= e.w;
        }
        m
    }

    fn assert_laplacian(g: &MultiGraph) {
        let m = dense(g);
        let n = g.n();
        for i in 0..n {
            let row: f64 = m[i].iter().sum();
            assert!(row.abs() < 1e-9, "row {i} sums to {row}");
            for j in 0..n {
                assert_eq!(m[i][j], m[j][i]);
                if i != j {
                    assert!(m[i][j] <= 0.0);
                }
            }
        }
    }

    #[test]
    fn single_edge_laplacian() {
        let g = MultiGraph::from_edge_list(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(dense(&g), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn path_laplacian() {
        let g = MultiGraph::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(
            dense(&g),
            vec![vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]
        );
    }

    #[test]
    fn parallel_edges_stay_distinct() {
        let g = MultiGraph::from_edge_list(3, &[(0, 1, 2.0), (0, 1, 3.0)]).unwrap();
        assert_eq!(g.live_edge_total(), 2);
        assert_eq!(dense(&g)[0][1], -5.0);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            MultiGraph::from_edge_list(3, &[(1, 1, 1.0)]).unwrap_err(),
            GraphError::SelfLoop(1)
        );
        assert!(matches!(
            MultiGraph::from_edge_list(3, &[(0, 1, 0.0)]),
            Err(GraphError::BadWeight { .. })
        ));
        assert!(matches!(
            MultiGraph::from_edge_list(3, &[(0, 1, -2.0)]),
            Err(GraphError::BadWeight { .. })
        ));
        assert_eq!(
            MultiGraph::from_edge_list(3, &[(0, 3, 1.0)]).unwrap_err(),
            GraphError::VertexOutOfRange { vertex: 3, n: 3 }
        );
    }

    #[test]
    fn split_preserves_matrix() {
        let g = MultiGraph::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap();
        let s = g.split_edges(4, false).unwrap();
        assert_eq!(s.live_edge_total(), 12);
        let (a, b) = (dense(&g), dense(&s));
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-12);
            }
        }
        for e in s.alive_edges() {
            let orig = [1.0, 2.0, 3.0][match (e.u, e.v) {
                (0, 1) => 0,
                (1, 2) => 1,
                _ => 2,
            }];
            assert_eq!(e.w, orig / 4.0);
        }
    }

    #[test]
    fn split_by_one_is_identity() {
        let g = MultiGraph::from_edge_list(3, &[(0, 1, 1.5), (1, 2, 2.5)]).unwrap();
        let s = g.split_edges(1, false).unwrap();
        assert_eq!(g.alive_edges().collect::<Vec<_>>(), s.alive_edges().collect::<Vec<_>>());
        assert_eq!(g.split_edges(0, false).unwrap_err(), GraphError::ZeroSplit);
    }

    #[test]
    fn split_records_leverage_bound() {
        let g = MultiGraph::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = g.split_edges(8, true).unwrap();
        assert!(s.alive_edges().all(|e| e.t == Some(0.125)));
    }

    #[test]
    fn remove_star_of_path_center() {
        let mut g = MultiGraph::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let star = g.remove_star(1);
        assert_eq!(star.len(), 2);
        assert_eq!(g.live_edge_total(), 0);
        assert_eq!(g.live_mult(0), 0);
        assert_eq!(g.weighted_degree(2), 0.0);
    }

    #[test]
    fn remove_star_isolated_vertex() {
        let mut g = MultiGraph::from_edge_list(3, &[(0, 1, 1.0)]).unwrap();
        assert!(g.remove_star(2).is_empty());
        assert_eq!(g.live_edge_total(), 1);
    }

    #[test]
    fn remove_star_of_triangle_corner() {
        let mut g =
            MultiGraph::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let star = g.remove_star(0);
        assert_eq!(star.len(), 2);
        let left: Vec<_> = g.alive_edges().collect();
        assert_eq!(left, vec![MultiEdge::new(1, 2, 1.0)]);
        assert_laplacian(&g);
    }

    #[test]
    fn insert_then_remove_restores_count() {
        let mut g = MultiGraph::from_edge_list(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let before = g.live_edge_total();
        let star = vec![MultiEdge::new(3, 1, 0.5), MultiEdge::new(1, 2, 0.25)];
        g.insert_edges(&star).unwrap();
        assert_eq!(g.live_edge_total(), before + 2);
        g.insert_edges(&[]).unwrap();
        assert_eq!(g.live_edge_total(), before + 2);
        let removed = g.remove_star(1);
        assert_eq!(removed.len(), 3);
        g.insert_edges(&[MultiEdge::new(0, 2, 1.0)]).unwrap();
        assert_eq!(g.live_edge_total(), 2);
    }

    #[test]
    fn insert_rejects_eliminated_endpoint() {
        let mut g = MultiGraph::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        g.remove_star(1);
        g.mark_eliminated(1);
        assert_eq!(
            g.insert_edges(&[MultiEdge::new(0, 1, 1.0)]).unwrap_err(),
            GraphError::Eliminated(1)
        );
        assert_eq!(g.live_edge_total(), 0);
    }

    #[test]
    fn aggregated_column_merges_parallel_edges() {
        let mut g = MultiGraph::from_edge_list(4, &[(0, 1, 2.0), (1, 0, 3.0), (0, 2, 1.0)]).unwrap();
        let mut scratch = DedupScratch::new(4);
        let col = g.aggregated_column(0, &mut scratch);
        assert_eq!(col.total, 6.0);
        assert_eq!(col.entries.len(), 2);
        assert_eq!((col.entries[0].vertex, col.entries[0].weight), (1, 5.0));
        assert_eq!((col.entries[1].vertex, col.entries[1].weight), (2, 1.0));
        assert!(scratch.is_clear());

        let empty = g.aggregated_column(3, &mut scratch);
        assert!(empty.entries.is_empty());
        assert_eq!(empty.total, 0.0);
    }

    #[test]
    fn aggregated_column_survives_split() {
        let mut g = MultiGraph::from_edge_list(4, &[(0, 1, 2.0), (0, 2, 1.0), (0, 3, 0.5)]).unwrap();
        let mut s = g.split_edges(4, true).unwrap();
        let mut scratch = DedupScratch::new(4);
        let a = g.aggregated_column(0, &mut scratch);
        let b = s.aggregated_column(0, &mut scratch);
        assert_eq!(a.entries.len(), b.entries.len());
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.vertex, y.vertex);
            assert!((x.weight - y.weight).abs() < 1e-12);
            assert!((y.leverage - 1.0).abs() < 1e-12);
        }
        assert!(scratch.is_clear());
    }

    #[test]
    fn scratch_aggregate_matches_graph_column() {
        let mut g = MultiGraph::from_edge_list(4, &[(0, 1, 2.0), (1, 0, 3.0), (0, 2, 1.0)]).unwrap();
        let mut scratch = DedupScratch::new(4);
        let star = g.star(0);
        let a = scratch.aggregate(0, &star);
        let b = g.aggregated_column(0, &mut scratch);
        assert_eq!(a, b);
        assert!(scratch.is_clear());
    }

    #[test]
    fn connectivity() {
        let g = MultiGraph::from_edge_list(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(!g.is_connected());
        let g = MultiGraph::from_edge_list(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(g.is_connected());
    }

    #[test]
    fn compaction_keeps_structure() {
        // A large split star forces at least one compaction.
        let n = 6;
        let edges: Vec<_> = (1..n).map(|v| (0, v, v as f64)).chain([(1, 2, 1.0)]).collect();
        let g = MultiGraph::from_edge_list(n, &edges).unwrap();
        let mut s = g.split_edges(2000, false).unwrap();
        let star = s.remove_star(0);
        assert_eq!(star.len(), 2000 * (n - 1));
        assert!(s.pool_len() < 2000 * n);
        assert_eq!(s.live_edge_total(), 2000);
        assert_eq!(s.live_mult(1), 2000);
        assert_eq!(s.star(2).len(), 2000);
        let (mult, _, total) = s.rescan_counters();
        assert_eq!(total, 2000);
        assert_eq!(mult[1], 2000);
    }

    #[derive(Debug, Clone)]
    enum Op {
        Remove(usize),
        Insert(Vec<(usize, usize, f64)>),
    }

    fn op_strategy(n: usize) -> impl Strategy<Value = Op> {
        prop_oneof![
            (0..n).prop_map(Op::Remove),
            prop::collection::vec((0..n, 0..n, 0.01f64..10.0), 0..6).prop_map(Op::Insert),
        ]
    }

    proptest! {
        #[test]
        fn counters_match_rescan(
            edges in prop::collection::vec((0usize..8, 0usize..8, 0.01f64..10.0), 1..30),
            ops in prop::collection::vec(op_strategy(8), 1..40),
            rho in 1usize..4,
        ) {
            let edges: Vec<_> = edges.into_iter().filter(|e| e.0 != e.1).collect();
            let g = MultiGraph::from_edge_list(8, &edges).unwrap();
            let mut g = g.split_edges(rho, false).unwrap();
            let mut scratch = DedupScratch::new(8);
            for op in ops {
                match op {
                    Op::Remove(v) => {
                        let col = g.aggregated_column(v, &mut scratch);
                        prop_assert!(scratch.is_clear());
                        prop_assert!((col.total - g.weighted_degree(v)).abs() < 1e-9);
                        let before = g.live_edge_total();
                        let star = g.remove_star(v);
                        prop_assert_eq!(g.live_edge_total(), before - star.len());
                        prop_assert!(star.iter().all(|e| e.u == v || e.v == v));
                    }
                    Op::Insert(new) => {
                        let new: Vec<_> = new
                            .into_iter()
                            .filter(|e| e.0 != e.1)
                            .map(|(u, v, w)| MultiEdge::new(u, v, w))
                            .collect();
                        g.insert_edges(&new).unwrap();
                    }
                }
                let (mult, wdeg, total) = g.rescan_counters();
                prop_assert_eq!(total, g.live_edge_total());
                for v in 0..8 {
                    prop_assert_eq!(mult[v], g.live_mult(v));
                    prop_assert!((wdeg[v] - g.weighted_degree(v)).abs() < 1e-9);
                    prop_assert_eq!(g.star(v).len(), g.live_mult(v));
                }
                assert_laplacian(&g);
            }
        }
    }
}
