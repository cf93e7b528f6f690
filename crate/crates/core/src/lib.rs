//! Rotation-projection knowledge graph embeddings.
//!
//! Each relation acts per complex dimension as an orthogonal projection onto a
//! rotated axis followed by a rotation. Projections are idempotent, which lets a
//! single relation embed a transitive chain without collapsing its entities.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: per-dimension rotation and projection primitives.
//! - [`model`]: parameter tables, scoring, checkpoints and hand-built constructions.
//! - [`training`]: losses, analytic gradients, negative sampling, Adam and the training loop.
//! - [`data`]: triple stores, transitive closure, transitivity test sets and dataset generators.
//! - [`eval`]: filtered ranking metrics, AUC-PR and embedding diagnostics.
//!
//! Data-parallel sections go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod data;
mod error;
pub mod eval;
pub mod exec;
pub mod geometry;
pub mod model;
pub mod training;

pub use error::{Error, Result};
