//! Differentiable rigid-body dynamics and gradient-based system
//! identification.
//!
//! The crate implements the recursive Newton-Euler (inverse) and articulated
//! body (forward) dynamics algorithms in Lie-algebra form, generically over a
//! scalar type so the same code runs on `f64` for simulation and on a
//! reverse-mode tape scalar for identification. Physical plausibility is
//! guaranteed through virtual parameters: every unrestricted real parameter
//! vector maps to non-negative masses and triangle-consistent inertias.
//! On top sit actuator/friction models (passive by construction where the
//! physics demands it), a constrained-particle model for a ball on an
//! inextensible string, dataset generation with offline zero-phase
//! differentiation, and the identification loop (Adam on forward/inverse
//! one-step losses, a linear-regression baseline, a black-box baseline).
//!
//! Start with the runnable examples (`cargo run --example ...`) or the thin
//! `diffdyn` binary for batch work.

pub mod actuation;
pub mod autodiff;
pub mod cli;
pub mod constraint;
pub mod data;
pub mod dynamics;
pub mod integrate;
pub mod math;
pub mod model;
pub mod spatial;
pub mod sysid;
pub mod systems;

pub use actuation::{ActuatorKind, ActuatorModel, Mlp};
pub use autodiff::{check_gradient, gradient, DiffScalar, ScalarFn, Tape};
pub use math::{Mat3, Mat6, Scalar, Vec3};
pub use model::{JointKind, Link, LinkParams, RobotModel};
pub use spatial::{SpatialInertia, SpatialTransform, SpatialVector};
