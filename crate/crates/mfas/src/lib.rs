//! Precedence-constrained minimum feedback arc set solving.
//!
//! The problem: given nonnegative arc weights on every ordered pair of
//! vertices and a strict partial order that must be respected, find a linear
//! extension minimizing the total weight of the pairs that comply with it.
//!
//! The solver works on a covering relaxation: every candidate 0/1 arc
//! assignment must hit a family of size-≤3 constraints (a vertex-cover
//! problem on a 3-bounded hypergraph). A deterministic primal-dual pass
//! produces a cover within a factor of 3 of the covering LP, and — when the
//! weights satisfy the triangle inequality — a constructive repair procedure
//! turns any minimal cover into a linear extension without increasing cost.
//!
//! Modules:
//! - [`instance`]: exact fixed-point weights, posets, validation, text format.
//! - [`solution`]: arc-variable solutions, permutations, feasibility checkers.
//! - [`covering`]: constraint enumeration, primal-dual cover, minimalization,
//!   certified fractional lower bounds.
//! - [`repair`]: the cover-to-order repair procedure and the full pipeline.
//! - [`oracle`]: exact ground truth at small sizes (subset DP, exhaustive cover).
//! - [`gen`]: seeded instance generators and bundled demonstration instances.

pub mod covering;
pub mod gen;
pub mod instance;
pub mod oracle;
pub mod repair;
pub mod solution;

#[cfg(test)]
pub(crate) mod testutil;
