//! Numerical laboratory for pseudo-Riemannian cones.
//!
//! Given a metric `g` on a chart, the cone over it is the metric
//! `dr² + r²g` on `(0,∞) × M`. This crate builds such cones, converts
//! scalar solutions of the third-order equation
//!
//! ```text
//! DDDα(X,Y,Z) + 2 Dα(X)g(Y,Z) + Dα(Y)g(X,Z) + Dα(Z)g(X,Y) = 0
//! ```
//!
//! into parallel symmetric 2-tensors on the cone and back, instantiates
//! the explicit metric families realizing the three algebraic types of
//! the associated endomorphism (projector, nilpotent, complex), and
//! verifies the structural identities numerically: parallelism, gradient
//! and Hessian relations, α-profiles along the normalized gradient flow,
//! closed-form radial geodesics, warped-product geodesic equations, and
//! projective (but not affine) equivalence of partner metrics.
//!
//! Differentiation is exact Taylor-mode to order 3 ([`jet::Jet3`]),
//! cross-checked everywhere by an independent finite-difference oracle
//! ([`fd`]).

pub mod chart;
pub mod cone;
pub mod error;
pub mod families;
pub mod fd;
pub mod field;
pub mod fixtures;
pub mod geodesic;
pub mod geometry;
pub mod hygiene;
pub mod jet;
pub mod linalg;
pub mod obata;
pub mod projective;
pub mod suite;
pub mod warped;

pub use chart::{Chart, Point};
pub use cone::{ConeSolution, ConeSpace};
pub use error::{Error, Result};
pub use field::{MetricField, ScalarField, SymTensorField};
pub use jet::Jet3;
