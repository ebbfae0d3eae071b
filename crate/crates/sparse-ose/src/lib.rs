//! Sparse oblivious subspace embeddings and the machinery to stress them.
//!
//! An `(ε, δ)` oblivious subspace embedding is a random matrix `Π ∈ ℝ^{m×n}`
//! that, for any fixed `d`-dimensional subspace, preserves every vector norm
//! to within `1 ± ε` with probability at least `1 - δ`. Sparse constructions
//! (few nonzeros per column) apply fast but need more rows; empirically the
//! minimal `m` jumps from ~`d/ε²` to ~`d²/ε²` once the column sparsity drops
//! below about `1/ε`. This crate provides:
//!
//! - exact embedding verdicts via extremal singular values ([`embedding`]);
//! - the standard sparse constructions plus a deterministic block-Hadamard
//!   counterexample ([`sketches`]);
//! - factored hard-instance distributions over subspaces ([`hard_instance`]);
//! - the inner-product collision toolkit: level search against an adversarial
//!   removal quantifier ([`collision`]);
//! - an audit pipeline that hunts for large column inner products in a given
//!   sketch and an anticoncentration test tying them to embedding failure
//!   ([`auditor`]);
//! - a deterministic experiment harness with CSV/SVG reporting ([`harness`]).
//!
//! Every random quantity derives from explicit 64-bit seeds ([`rng`]);
//! results are bit-reproducible at any thread count. The `examples/`
//! directory has one runnable walk-through per capability; the `ose` binary
//! wraps the harness for the command line.

pub mod auditor;
pub mod collision;
pub mod eigen;
pub mod embedding;
pub mod error;
pub mod hard_instance;
pub mod harness;
pub mod kv;
pub mod matrix;
pub mod rng;
pub mod sketches;

pub use embedding::{
    distortion, estimate_failure, is_embedding, orthonormal_basis, sketch_apply, DistortionReport,
    FailureEstimate,
};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, SparseColMatrix};
pub use rng::SeedRng;
