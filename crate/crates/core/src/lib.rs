//! Finite-dimensional symmetrically self-dual spaces.
//!
//! A space is `R^n` with the Euclidean norm and a symmetric involutive
//! pairing matrix `P`. On top of it the crate provides:
//!
//! * [`space`]: the pairing, `q`, the duality map `iota`, `g0` and `N_q(g0)`;
//! * [`subspace`]: q-positivity, the complement `A0`, and maximality of
//!   q-positive subspaces (complement criterion plus a randomized oracle);
//! * [`functional`]: quadratics on affine subspaces, `q_A`, translations and
//!   conjugates with respect to the pairing;
//! * [`transversality`]: the splitting `c = a - n`, `a` in `A`, `n` in
//!   `N_q(g0)`;
//! * [`relation`]: linear relations in `R^n x R^n`, adjoints and maximal
//!   monotonicity.

pub mod error;
pub mod extended;
pub mod fleet;
pub mod functional;
pub mod linalg;
pub mod relation;
pub mod space;
pub mod subspace;
pub mod transversality;

pub use error::{Result, SsdbError};
pub use extended::ExtReal;
pub use functional::{Conjugate, QuadraticFunctional};
pub use relation::{LinearRelation, MaximalityMethod};
pub use space::{g0, SsdbSpace, Tolerance};
pub use subspace::{Maximality, OracleVerdict, PointSet, Subspace, Violation};
pub use transversality::{decompose, resolvent_crosscheck, DecomposeOptions, Decomposition};
