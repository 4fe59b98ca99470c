//! Finite-volume operators: upwind convection, the viscous stencil and the
//! exponentially fitted particle flux.

mod bernoulli;
mod flux;
mod rhs;
mod viscous;

pub use bernoulli::{bernoulli, bernoulli_deriv, bernoulli_divided_difference};
pub use flux::{
    cell_forces, convective_flux_rho, divergence, divergence_vec, donor, face_forces,
    face_velocities, mass_flux, momentum_flux, particle_flux, particle_flux_coeffs, FaceField,
    FaceFluxes,
};
pub(crate) use flux::{
    face_forces_locked, mass_flux_locked, particle_flux_with_face_velocity, DonorLock,
};
pub use rhs::{assemble_semidiscrete_rhs, SemidiscreteRhs};
pub use viscous::{
    viscous_dissipation, viscous_dissipation_interior, viscous_operator, viscous_stencil,
};
