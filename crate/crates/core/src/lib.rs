//! Computational laboratory for translated maximal-torus orbits on SL(N, ℝ)/SL(N, ℤ).
//!
//! The crate builds explicit maximal ℚ-tori from number fields, the polytopes of
//! non-divergence attached to a translator, divergence graphs of unipotent
//! sequences, the restriction-of-scalars norm map, orbit statistics, and the
//! integer-matrix census for a fixed characteristic polynomial.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise; results are identical either way.

pub mod arith;
pub mod count;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod lp;
pub mod orbit;
pub mod par;
pub mod polytope;
pub mod resscalars;
pub mod torus;
pub mod wedge;

pub use error::{Error, Result};
