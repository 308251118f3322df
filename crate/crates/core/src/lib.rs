//! Numerical laboratory for two-weight norm inequalities of commutators of
//! singular and fractional integral operators with Lipschitz symbols.
//!
//! The crate is split along the objects it manipulates:
//!
//! * [`params`] holds the parameter tuple and the classification of the
//!   `(1/r, δ̃)` plane.
//! * [`geometry`] provides balls, dyadic families, closed-form power
//!   integrals and the adaptive quadrature every other module uses.
//! * [`weights`] evaluates the class functionals numerically, decides
//!   membership exactly for radial power weights and carries the catalog of
//!   example pairs.
//! * [`operators`] evaluates kernels and higher-order commutators.
//! * [`norms`] estimates weighted oscillation seminorms and Orlicz averages.

// `!(x > 0.0)` is how NaN gets rejected along with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod norms;
pub mod operators;
pub mod params;
pub mod quadrature;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{Ball, DyadicFamily, QuadratureSpec, Region};
pub use params::{ClassParams, Exponent, RegionClass, RegionTag, Setting, Q};
pub use weights::{MembershipVerdict, Weight, WeightPair};
