//! Configuration-model random multigraphs with i.i.d. infinite-mean
//! power-law degrees.
//!
//! The crate samples degree sequences with tail `P(D > k) = k^(1-tau)`,
//! `tau in (1, 2)`, pairs stubs uniformly at random (eagerly or lazily),
//! measures the graph distance between two nodes and computes the
//! extreme-value quantities (order statistics, giant nodes, structural
//! events) that explain why that distance concentrates on `{2, 3}`.

// guards of the form `!(x > 0.0)` also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod degree;
pub mod diagnostics;
pub mod distance;
pub mod enumerate;
pub mod error;
pub mod limit;
pub mod matching;
pub mod montecarlo;
pub mod stats;

pub use degree::{DegreeLaw, DegreeSequence};
pub use distance::{bidirectional_hopcount, hopcount, Hopcount};
pub use error::{Error, Result};
pub use matching::{EagerMatching, LazyMatching, StubGraph};
