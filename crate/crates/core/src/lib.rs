//! Geometry of isotropic s-concave distributions and the margin-based learners
//! that rely on it.
//!
//! * [`bounds`]: closed-form geometry constants and learner schedules.
//! * [`densities`]: concrete s-concave families with exact samplers.
//! * [`verify`]: Monte Carlo and deterministic checks of the geometric bounds.
//! * [`optim`]: hinge minimization and halfspace separation kernels.
//! * [`learners`]: active, passive and two-halfspace learners with label oracles.
//! * [`harness`]: configuration, reports and experiment dispatch.

pub mod bounds;
pub mod densities;
pub mod error;
pub mod harness;
pub mod learners;
pub mod optim;
pub mod rng;
pub mod special;
pub mod verify;

pub use bounds::{Knobs, SConcaveParams};
pub use error::{Error, Result};
pub use rng::Stream;
