//! Graph ingestion: whitespace edge lists and Matrix Market Laplacians.
//!
//! Vertex ids are 1-based in files and 0-based in memory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use approxchol::{GraphError, MultiGraph};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GraphFormat {
    Edgelist,
    MatrixMarket,
}

/// Relative row-sum tolerance for Matrix Market Laplacians.
const ROW_SUM_TOL: f64 = 1e-6;

pub fn parse_graph(path: &Path, format: GraphFormat) -> Result<MultiGraph, ParseError> {
    let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        GraphFormat::Edgelist => parse_edgelist(&text),
        GraphFormat::MatrixMarket => parse_matrix_market(&text),
    }
}

fn parse_id(tok: &str, line: usize) -> Result<usize, ParseError> {
    let id: usize = tok.parse().map_err(|_| ParseError::Line {
        line,
        msg: format!("bad vertex id {tok:?}"),
    })?;
    if id == 0 {
        return Err(ParseError::Line { line, msg: "vertex ids are 1-based".into() });
    }
    Ok(id - 1)
}

fn parse_real(tok: &str, line: usize) -> Result<f64, ParseError> {
    tok.parse().map_err(|_| ParseError::Line { line, msg: format!("bad number {tok:?}") })
}

/// Lines `u v w` (1-based ids); `#` starts a comment. The vertex count is the
/// largest id seen.
pub fn parse_edgelist(text: &str) -> Result<MultiGraph, ParseError> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 3 {
            return Err(ParseError::Line { line, msg: format!("expected `u v w`, got {} fields", toks.len()) });
        }
        let u = parse_id(toks[0], line)?;
        let v = parse_id(toks[1], line)?;
        let w = parse_real(toks[2], line)?;
        if u == v {
            return Err(ParseError::Line { line, msg: format!("self-loop on vertex {}", u + 1) });
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(ParseError::Line { line, msg: format!("nonpositive weight {w}") });
        }
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    Ok(MultiGraph::from_edge_list(n, &edges)?)
}

/// A coordinate-format Laplacian. Off-diagonal `L(i, j) = -w` becomes edge
/// `(i, j, w)`; the diagonal only serves to validate row sums.
pub fn parse_matrix_market(text: &str) -> Result<MultiGraph, ParseError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| ParseError::Format("empty file".into()))?;
    let head: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if head.len() != 5 || head[0] != "%%matrixmarket" || head[1] != "matrix" || head[2] != "coordinate" {
        return Err(ParseError::Line { line: 1, msg: "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`".into() });
    }
    if head[3] != "real" && head[3] != "integer" {
        return Err(ParseError::Line { line: 1, msg: format!("unsupported field {:?}", head[3]) });
    }
    let symmetric = match head[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(ParseError::Line { line: 1, msg: format!("unsupported symmetry {other:?}") }),
    };

    let mut size = None;
    let mut entries: Vec<(usize, usize, f64, usize)> = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if size.is_none() {
            if toks.len() != 3 {
                return Err(ParseError::Line { line, msg: "expected `rows cols nnz`".into() });
            }
            let dims: Vec<usize> = toks
                .iter()
                .map(|s| s.parse().map_err(|_| ParseError::Line { line, msg: format!("bad size {s:?}") }))
                .collect::<Result<_, _>>()?;
            if dims[0] != dims[1] {
                return Err(ParseError::Line { line, msg: "matrix is not square".into() });
            }
            size = Some((dims[0], dims[2]));
            continue;
        }
        if toks.len() != 3 {
            return Err(ParseError::Line { line, msg: format!("expected `i j value`, got {} fields", toks.len()) });
        }
        let r = parse_id(toks[0], line)?;
        let c = parse_id(toks[1], line)?;
        let x = parse_real(toks[2], line)?;
        let n = size.unwrap().0;
        if r >= n || c >= n {
            return Err(ParseError::Line { line, msg: format!("entry ({}, {}) outside {n} x {n}", r + 1, c + 1) });
        }
        entries.push((r, c, x, line));
    }
    let (n, nnz) = size.ok_or_else(|| ParseError::Format("missing size line".into()))?;
    if entries.len() != nnz {
        return Err(ParseError::Format(format!("header promises {nnz} entries, found {}", entries.len())));
    }

    let mut diag = vec![0.0; n];
    let mut offsum = vec![0.0; n];
    let mut edges = Vec::new();
    let mut scale: f64 = 0.0;
    let mut general = std::collections::BTreeMap::new();
    for &(r, c, x, line) in &entries {
        scale = scale.max(x.abs());
        if r == c {
            diag[r] += x;
            continue;
        }
        if symmetric && r < c {
            return Err(ParseError::Line { line, msg: "symmetric files store only the lower triangle".into() });
        }
        let w = -x;
        if !(w > 0.0 && w.is_finite()) {
            return Err(ParseError::Line { line, msg: format!("off-diagonal entry {x} gives nonpositive weight") });
        }
        offsum[r] += w;
        offsum[c] += w;
        if symmetric {
            edges.push((r, c, w));
        } else {
            general.entry((r, c)).or_insert_with(Vec::new).push((w, line));
        }
    }
    if !symmetric {
        // Each stored (i, j) must be mirrored by (j, i) with the same total.
        offsum.iter_mut().for_each(|s| *s *= 0.5);
        for (&(r, c), list) in &general {
            let total: f64 = list.iter().map(|p| p.0).sum();
            let mirror: f64 = general.get(&(c, r)).map_or(0.0, |l| l.iter().map(|p| p.0).sum());
            if (total - mirror).abs() > 1e-12 * total.max(mirror) {
                return Err(ParseError::Line { line: list[0].1, msg: format!("asymmetric entry ({}, {})", r + 1, c + 1) });
            }
            if r > c {
                edges.extend(list.iter().map(|&(w, _)| (r, c, w)));
            }
        }
    }
    for v in 0..n {
        if (diag[v] - offsum[v]).abs() > ROW_SUM_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(ParseError::Format(format!(
                "row {} sums to {:e}; not a Laplacian",
                v + 1,
                diag[v] - offsum[v]
            )));
        }
    }
    Ok(MultiGraph::from_edge_list(n, &edges)?)
}

/// Writes the alive edges as a 1-based edge list with round-trip weights.
pub fn write_edgelist(g: &MultiGraph) -> String {
    let mut out = String::new();
    for e in g.alive_edges() {
        writeln!(out, "{} {} {}", e.u + 1, e.v + 1, e.w).unwrap();
    }
    out
}

/// Writes the Laplacian as a symmetric Matrix Market file.
pub fn write_matrix_market(g: &MultiGraph) -> String {
    let n = g.n();
    let mut diag = vec![0.0; n];
    let mut lines = Vec::new();
    for e in g.alive_edges() {
        diag[e.u] += e.w;
        diag[e.v] += e.w;
        let (hi, lo) = (e.u.max(e.v), e.u.min(e.v));
        lines.push(format!("{} {} {}", hi + 1, lo + 1, -e.w));
    }
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    writeln!(out, "{n} {n} {}", lines.len() + n).unwrap();
    for (v, d) in diag.iter().enumerate() {
        writeln!(out, "{} {} {}", v + 1, v + 1, d).unwrap();
    }
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}
