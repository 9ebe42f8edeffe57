//! Walker alias tables and clique sampling.

use rand::Rng;
use thiserror::Error;

use crate::multigraph::MultiEdge;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("cannot build an alias table from an empty weight list")]
    Empty,
    #[error("weights must be finite and nonnegative with a positive sum")]
    BadWeights,
    #[error("clique sampling needs a nonempty star")]
    EmptyStar,
}

/// Uniform index in `0..d`: `floor(u * d)` with the boundary value rejected.
#[inline]
pub fn uniform_index<R: Rng + ?Sized>(rng: &mut R, d: usize) -> usize {
    loop {
        let u: f64 = rng.gen();
        let i = (u * d as f64) as usize;
        if i < d {
            return i;
        }
    }
}

/// Walker's alias structure: O(d) build, O(1) draws.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    /// Builds with the two-worklist method. A cell is "small" when its scaled
    /// mass is at most 1; cells left over at the end keep all their mass.
    pub fn new(weights: &[f64]) -> Result<Self, SamplingError> {
        let d = weights.len();
        if d == 0 {
            return Err(SamplingError::Empty);
        }
        let mut total = 0.0;
        for &w in weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(SamplingError::BadWeights);
            }
            total += w;
        }
        if !(total > 0.0 && total.is_finite()) {
            return Err(SamplingError::BadWeights);
        }

        let scale = d as f64 / total;
        let mut prob: Vec<f64> = weights.iter().map(|&w| w * scale).collect();
        let mut alias: Vec<usize> = (0..d).collect();
        let mut small = Vec::with_capacity(d);
        let mut large = Vec::with_capacity(d);
        for (i, &q) in prob.iter().enumerate() {
            if q <= 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s] = l;
            prob[l] -= 1.0 - prob[s];
            if prob[l] <= 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
            alias[i] = i;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Per-cell `(keep probability, alias index)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.prob.iter().copied().zip(self.alias.iter().copied())
    }

    /// The distribution implied by the cells.
    pub fn pmf(&self) -> Vec<f64> {
        let d = self.len();
        let mut p = vec![0.0; d];
        for (i, (keep, alias)) in self.cells().enumerate() {
            p[i] += keep;
            if alias != i {
                p[alias] += 1.0 - keep;
            }
        }
        let inv = 1.0 / d as f64;
        p.iter_mut().for_each(|x| *x *= inv);
        p
    }

    /// One draw: a uniform cell, then a biased coin.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let cell = uniform_index(rng, self.prob.len());
        let coin: f64 = rng.gen();
        if coin < self.prob[cell] {
            cell
        } else {
            self.alias[cell]
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliqueSampleOutput {
    pub samples: Vec<MultiEdge>,
    /// Number of i.i.d. attempts made, equal to the star's multi-edge count.
    pub attempted: usize,
}

/// The outcome of one attempt that drew star edges `first` and `second`.
///
/// `None` when both edges lead to the same neighbour.
#[inline]
pub fn pair_sample(star: &[MultiEdge], center: usize, first: usize, second: usize) -> Option<MultiEdge> {
    let (e1, e2) = (&star[first], &star[second]);
    let (u1, u2) = (e1.other(center), e2.other(center));
    if u1 == u2 {
        return None;
    }
    let sum = e1.w + e2.w;
    let w = e1.w * e2.w / sum;
    let t = match (e1.t, e2.t) {
        (Some(t1), Some(t2)) => Some((e2.w * t1 + e1.w * t2) / sum),
        _ => None,
    };
    Some(MultiEdge { u: u1, v: u2, w, t })
}

/// Replaces the elimination clique of `center` by `star.len()` independent
/// samples whose expected sum is the clique.
///
/// Each attempt draws one edge proportionally to weight and one uniformly.
pub fn clique_sample<R: Rng + ?Sized>(
    star: &[MultiEdge],
    center: usize,
    rng: &mut R,
) -> Result<CliqueSampleOutput, SamplingError> {
    if star.is_empty() {
        return Err(SamplingError::EmptyStar);
    }
    let weights: Vec<f64> = star.iter().map(|e| e.w).collect();
    let table = AliasTable::new(&weights)?;
    let d = star.len();
    let mut samples = Vec::with_capacity(d);
    for _ in 0..d {
        let first = table.sample(rng);
        let second = uniform_index(rng, d);
        if let Some(e) = pair_sample(star, center, first, second) {
            samples.push(e);
        }
    }
    Ok(CliqueSampleOutput { samples, attempted: d })
}
