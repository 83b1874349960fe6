//! Multi-objective reinforcement learning by Pareto ascent directional
//! decomposition.
//!
//! A population of Gaussian policies is trained on vector-reward environments.
//! Each selected policy follows the minimum-norm convex combination of its
//! per-objective gradients (a direction that improves every objective at
//! once), selection is spread over angular regions of objective space, and
//! late in training the largest gaps of the non-dominated front are
//! fine-tuned from both sides.
//!
//! The numerical core ([`pareto`], [`archive`], [`objective`]) is generic over
//! the scalar type through [`Scalar`]; the reinforcement-learning layers work
//! in `f64`. Concrete aliases for both precisions live at the crate root.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod archive;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod momdp;
pub mod objective;
pub mod pareto;
pub mod policy;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ObjectiveVectorF64 = objective::ObjectiveVector<f64>;
pub type ObjectiveVectorF32 = objective::ObjectiveVector<f32>;
pub type WeightVectorF64 = pareto::WeightVector<f64>;
pub type WeightVectorF32 = pareto::WeightVector<f32>;
pub type GradientSetF64 = pareto::GradientSet<f64>;
pub type GradientSetF32 = pareto::GradientSet<f32>;
pub type AscentResultF64 = pareto::AscentResult<f64>;
pub type AscentResultF32 = pareto::AscentResult<f32>;
pub type ReferencePointF64 = archive::ReferencePoint<f64>;
pub type ReferencePointF32 = archive::ReferencePoint<f32>;
