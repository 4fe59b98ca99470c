//! Grids, fields, constants and the integral functionals evaluated on them.

mod functionals;
mod grid;
mod params;
mod potential;
mod state;

pub use functionals::{
    dissipation, total_energy, Dissipation, EnergyComponents, EnergyLedger, LedgerRow,
};
pub(crate) use grid::norm;
pub use grid::{Face, Grid};
pub use params::{theta, PhysParams};
pub use potential::{Boundary, PotentialField};
pub use state::{masses, SimState, VACUUM_FACTOR};

/// `eta log eta` is taken as 0 for `eta <= ENTROPY_FLOOR`.
pub const ENTROPY_FLOOR: f64 = 1e-30;

/// `x log x` with the entropy floor applied.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x <= ENTROPY_FLOOR {
        0.0
    } else {
        x * x.ln()
    }
}
