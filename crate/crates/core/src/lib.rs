//! Randomized sparse approximate Cholesky factorization of graph Laplacians.
//!
//! A Laplacian is held as an explicit sum of multi-edges ([`MultiGraph`]).
//! Each input edge is split into `rho` lighter copies, then vertices are
//! eliminated in random order. Instead of adding the dense elimination clique
//! on a vertex's neighbours, [`sampling::clique_sample`] adds at most as many
//! sampled edges as it removed, so the edge count never grows. The result is a
//! factorization `Z = P L D L^T P^T` that spectrally approximates the input
//! and preconditions [`solver::iterative_refinement`].
//!
//! [`oracle`] holds dense reference computations (exact Schur complements,
//! pseudoinverses, effective resistances, generalized eigenvalues) used to
//! check the sparse code at small sizes.

pub mod factorizer;
pub mod generators;
pub mod multigraph;
pub mod oracle;
pub mod sampling;
pub mod solver;

pub use factorizer::{sparse_cholesky, sparse_cholesky_observed, Config, FactorError, Factorization, Variant};
pub use multigraph::{GraphError, MultiEdge, MultiGraph};
pub use solver::{apply_precond, iterative_refinement, RefineOptions, SolveReport, SparseLaplacian};
