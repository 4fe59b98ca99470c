use super::flux::{
    cell_forces, divergence, divergence_vec, face_forces, face_velocities, mass_flux,
    momentum_flux, particle_flux_with_face_velocity,
};
use super::viscous::viscous_operator;
use crate::error::Result;
use crate::model::{PhysParams, PotentialField, SimState};

/// Time derivatives of the three conserved fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SemidiscreteRhs {
    pub rho: Vec<f64>,
    pub momentum: Vec<[f64; 2]>,
    pub eta: Vec<f64>,
}

impl SemidiscreteRhs {
    pub fn max_abs(&self) -> [f64; 3] {
        let m = |v: &mut dyn Iterator<Item = f64>| v.fold(0.0f64, |a, x| a.max(x.abs()));
        [
            m(&mut self.rho.iter().copied()),
            m(&mut self.momentum.iter().flat_map(|v| v.iter().copied())),
            m(&mut self.eta.iter().copied()),
        ]
    }
}

/// Method-of-lines right-hand side:
///
/// - `rho_t = -div F`
/// - `m_t = -div(F u) + V_h u - force`
/// - `eta_t = -div J`
///
/// with the same fluxes and face forces that the implicit stepper uses.
pub fn assemble_semidiscrete_rhs(
    state: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
) -> Result<SemidiscreteRhs> {
    let g = &state.grid;
    g.check_same(&pot.grid, "potential")?;
    let u = state.velocity();
    let uf = face_velocities(g, &u);
    let mass = mass_flux(g, &state.rho, &uf);
    let mom = momentum_flux(g, &mass, &u);
    let particle = particle_flux_with_face_velocity(g, &state.eta, &uf, pot);
    let forces = cell_forces(g, &face_forces(g, &state.rho, &state.eta, &uf, pot, params));
    let visc = viscous_operator(g, &u, params);
    let conv = divergence_vec(g, &mom);
    let dim = g.dim();
    let momentum = (0..g.len())
        .map(|c| {
            let mut out = [0.0; 2];
            for k in 0..dim {
                out[k] = -conv[c][k] + visc[c][k] - forces[c][k];
            }
            out
        })
        .collect();
    Ok(SemidiscreteRhs {
        rho: divergence(g, &mass).iter().map(|d| -d).collect(),
        momentum,
        eta: divergence(g, &particle).iter().map(|d| -d).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, Grid};

    fn params() -> PhysParams {
        PhysParams {
            a: 1.0,
            gamma: 1.6,
            mu: 0.5,
            lambda: 0.2,
            beta: 1.0,
            delta: 0.0,
            h: 0.01,
        }
    }

    #[test]
    fn resting_uniform_particles_without_potential() {
        let g = Grid::new(&[0.0, 0.0], &[1.0, 1.0], &[5, 4]).unwrap();
        let pot = PotentialField::zero(g.clone(), Boundary::Bounded);
        let s = SimState::at_rest(g.clone(), vec![0.8; 20], vec![1.3; 20]).unwrap();
        let r = assemble_semidiscrete_rhs(&s, &pot, &params()).unwrap();
        assert_eq!(r.max_abs(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn sums_telescope_for_arbitrary_states() {
        let g = Grid::new(&[0.0, 0.0], &[2.0, 1.0], &[6, 5]).unwrap();
        let pot =
            PotentialField::from_fn(g.clone(), Boundary::Bounded, |x| x[0] + x[1] * x[1]).unwrap();
        let n = g.len();
        let rho: Vec<f64> = (0..n).map(|c| 1.0 + 0.3 * ((c * 7 % 11) as f64)).collect();
        let mut eta = vec![0.0; n];
        eta[13] = 50.0;
        let m: Vec<[f64; 2]> = (0..n)
            .map(|c| [((c * 3 % 5) as f64) - 2.0, ((c % 4) as f64) - 1.5])
            .collect();
        let s = SimState::new(g, rho, m, eta, 0.0).unwrap();
        let r = assemble_semidiscrete_rhs(&s, &pot, &params()).unwrap();
        let srho: f64 = r.rho.iter().sum();
        let seta: f64 = r.eta.iter().sum();
        assert!(srho.abs() < 1e-12, "{srho}");
        assert!(seta.abs() < 1e-11, "{seta}");
    }
}
