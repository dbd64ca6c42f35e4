//! Safe Lidar navigation with learned observation-space certificates.
//!
//! A barrier function `h` over raw Lidar returns and a Lyapunov function `V`
//! over goal range and bearing are learned offline, then used online by a
//! hybrid controller that alternates between goal seeking and exploration.
//! Future observations are predicted by rigidly moving the current scan with
//! the motion implied by each candidate control.
//!
//! Module map:
//!
//! - [`geometry`]: SE(2) transforms, obstacles, ray casting
//! - [`dynamics`]: Dubins car and the control grid
//! - [`lookahead`]: one-step observation prediction
//! - [`nn`]: MLPs with manual backprop
//! - [`certificates`]: the barrier and Lyapunov functions
//! - [`controller`]: goal-seeking / exploratory / fail-safe policy
//! - [`training`]: dataset, loss, SGD, sampling verification
//! - [`benchmark`]: environments, episodes, aggregate metrics
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod benchmark;
pub mod certificates;
pub mod cli;
pub mod config;
pub mod controller;
pub mod dynamics;
pub mod geometry;
pub mod lookahead;
pub mod nn;
pub mod plot;
pub mod trace;
pub mod training;

mod error;

pub use error::Error;

pub use certificates::CertificateModel;
pub use controller::{ControllerConfig, ControllerState, Mode};
pub use dynamics::{ControlGrid, ControlInput, ControlLimits};
pub use geometry::{Environment, LidarScan, Obstacle, Point2, Pose, Transform};
pub use lookahead::Observation;
