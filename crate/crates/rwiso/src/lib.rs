//! Isomorphism testing for graphs of bounded rank width.
//!
//! The pipeline enumerates the tangles of the cut-rank function, builds a
//! canonical treelike decomposition on top of the tangle tree, and runs a
//! coset-valued dynamic program over a pair of such decompositions. The
//! result is the full set of isomorphisms, represented as a permutation coset.

pub mod canonical;
pub mod connfn;
pub mod decomp;
pub mod error;
pub mod f2linalg;
pub mod graphio;
pub mod isodp;
pub mod permgroup;
pub mod qblock;
pub mod tangleset;

pub use error::{Error, Result};
pub use f2linalg::{Graph, VertexSet};
