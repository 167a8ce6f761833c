//! Birkhoff weak integrals with respect to non-additive set functions on the
//! naturals, together with numerical checks of the Hölder and Minkowski
//! family of inequalities for those integrals.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod expr;
pub mod inequalities;
pub mod integrator;
pub mod measures;
pub mod partitions;
pub mod report;
pub mod space;

pub use expr::{Expr, SetBindings};
pub use inequalities::{CheckName, Checker, ConjugatePair, InequalityVerdict, Outcome};
pub use integrator::{
    birkhoff_weak_integral, integrate_on, p_norm, pointwise, IntegralResult, IntegralStatus,
    IntegrationConfig, PointwiseOp, ScalarFunction,
};
pub use measures::{Distortion, SetFunction, WeightSequence};
pub use partitions::{Partition, TaggedPartition, TailRule};
pub use space::MeasurableSet;
