//! Exact symbolic computation with graded bundles: homogeneity structures,
//! graded-commutative polynomial algebra, Q-manifolds, weighted Lie
//! algebroids and groupoids, the Lie functor between them, weighted Lie
//! bi-algebroids and the associated Courant structures.
//!
//! Everything is verified by exact rational arithmetic: every claim is a
//! polynomial identity whose residual is computed and reported, never
//! approximated. Start with the `examples/` directory for a tour, or the
//! `dsl` module for the declaration language behind the `gradedkit` CLI.

pub mod algebroids;
pub mod dsl;
pub mod fields;
pub mod grading;
pub mod groupoids;
pub mod lifts;
pub mod report;
pub mod symalg;

pub use fields::{Ham, VecField};
pub use grading::{Chart, Coordinate, Parity, Weight};
pub use lifts::HomAction;
pub use symalg::{Expr, Substitution};
