//! Implicit finite-volume simulation of the compressible
//! Navier-Stokes-Smoluchowski fluid-particle system, together with its
//! closed-form stationary states and a verification harness.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod output;
pub mod scenario;
pub mod spatial;
pub mod stationary;
pub mod stepper;

pub use error::{Error, Result};
pub use model::{Boundary, Grid, PhysParams, PotentialField, SimState};
