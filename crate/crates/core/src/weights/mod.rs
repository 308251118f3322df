//! Two-weight class functionals, membership deciders and the example catalog.

pub mod catalog;
pub mod diagnostics;
pub mod functionals;
pub mod numeric;
pub mod plan;
pub mod symbolic;
pub mod weight;

pub use catalog::{catalog, Catalog, CatalogEntry, Expectation, Omission};
pub use diagnostics::{double_ball_check, doubling_check, reverse_holder_check, ConstantEstimate};
pub use functionals::{
    default_truncation, global_functional, h_functional, local_functional, old_class_functional,
    FunctionalValue, Functionals, ScanPoint,
};
pub use numeric::{
    check_membership_numeric, evaluate_plan, numeric_membership, perturbed_membership, BallValues,
    NumericOptions,
};
pub use plan::{BallSamplePlan, PlanBall};
pub use symbolic::{
    analyze, check_membership_old_symbolic, check_membership_symbolic, scaling_exponent, ClassKind,
    ExponentEntry, SymbolicReport,
};
pub use weight::{
    CallableWeight, FailingCondition, MembershipStatus, MembershipVerdict, Method, Weight,
    WeightPair,
};
