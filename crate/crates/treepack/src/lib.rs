//! Tree packing and decomposition toolkit.
//!
//! The crate packs bounded-degree trees edge-disjointly into dense host
//! graphs and decomposes hosts into trees exactly, with every solver
//! emitting a certificate that an independent verifier can check without
//! trusting the solver. The pieces, bottom to top:
//!
//! - [`graph`]: simple and multigraph hosts with exact (rational) density
//!   and degree primitives.
//! - [`diagnostics`]: checkable structure predicates — quasi-randomness,
//!   two-set density, regular pairs, robust expansion — each returning a
//!   verdict with a witness.
//! - [`tree`]: rooted forests, tree surgery (chunk decompositions, subtree
//!   extraction, balanced subforest selection), and distance-independent
//!   sets and matchings.
//! - [`walk`]: random-walk assignment of a tree's vertices around an odd
//!   cycle of clusters, and embedding into cycle blow-ups.
//! - [`cycles`]: Eulerianization, fair partitions, a rotation–extension
//!   Hamilton heuristic, and decomposition of dense graphs into long cycles.
//! - [`orient`]: out-regular orientation via layer peeling, with an exact
//!   max-flow oracle as cross-check and fallback.
//! - [`covering`]: gadgets that embed single trees so as to cover a
//!   prescribed matching, seagull flock, parity-fixing edge, or the
//!   leftover edges at an exceptional vertex.
//! - [`packer`]: the exact small-instance decomposer, the vortex-based
//!   heuristic packer with a leaf absorber, and the certificate verifier.
//! - [`cli`]: the `treepack` command-line front end and the text/JSON file
//!   formats shared by all subcommands.

pub mod cli;
pub mod covering;
pub mod cycles;
pub mod diagnostics;
pub mod graph;
pub mod orient;
pub mod packer;
pub mod tree;
pub mod walk;
