use super::bernoulli::{bernoulli, bernoulli_divided_difference};
use crate::model::{Grid, PhysParams, PotentialField, SimState, ENTROPY_FLOOR};

/// Per-face values for each axis, in [`Grid::faces`] order.
pub type FaceField = [Vec<f64>; 2];

/// Face-normal fluxes on all interior faces. Wall faces carry no mass and no
/// particle flux, so they are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxes {
    pub mass: FaceField,
    pub momentum: [Vec<[f64; 2]>; 2],
    pub particle: FaceField,
}

/// Normal face velocity: arithmetic mean of the two adjacent cells.
pub fn face_velocities(grid: &Grid, u: &[[f64; 2]]) -> FaceField {
    let mut out: FaceField = [Vec::new(), Vec::new()];
    for (axis, o) in out.iter_mut().enumerate().take(grid.dim()) {
        *o = grid
            .faces(axis)
            .map(|f| 0.5 * (u[f.left][axis] + u[f.right][axis]))
            .collect();
    }
    out
}

/// Donor-cell choice. With `u_f = 0` the smaller value is taken, which keeps
/// wet/dry interfaces of a resting fluid force-free.
#[inline]
pub fn donor(u_f: f64, left: f64, right: f64) -> f64 {
    if u_f > 0.0 {
        left
    } else if u_f < 0.0 {
        right
    } else {
        left.min(right)
    }
}

/// Per-face donor override: 0 picks by the sign of the face velocity, -1
/// pins the left cell and 1 the right cell.
pub(crate) type DonorLock = [Vec<i8>; 2];

#[inline]
pub(crate) fn donor_locked(u_f: f64, left: f64, right: f64, lock: i8) -> f64 {
    match lock {
        -1 => left,
        1 => right,
        _ => donor(u_f, left, right),
    }
}

fn lock_at(lock: Option<&DonorLock>, axis: usize, f: usize) -> i8 {
    lock.map_or(0, |l| l[axis][f])
}

/// Upwind mass flux `u_f * rho_donor` per interior face.
pub fn mass_flux(grid: &Grid, rho: &[f64], u_face: &FaceField) -> FaceField {
    mass_flux_locked(grid, rho, u_face, None)
}

pub(crate) fn mass_flux_locked(
    grid: &Grid,
    rho: &[f64],
    u_face: &FaceField,
    lock: Option<&DonorLock>,
) -> FaceField {
    let mut out: FaceField = [Vec::new(), Vec::new()];
    for (axis, o) in out.iter_mut().enumerate().take(grid.dim()) {
        *o = grid
            .faces(axis)
            .zip(&u_face[axis])
            .enumerate()
            .map(|(i, (f, &uf))| {
                uf * donor_locked(uf, rho[f.left], rho[f.right], lock_at(lock, axis, i))
            })
            .collect();
    }
    out
}

/// Momentum flux `F * u_donor`, donor chosen by the sign of the mass flux.
pub fn momentum_flux(grid: &Grid, mass: &FaceField, u: &[[f64; 2]]) -> [Vec<[f64; 2]>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (axis, o) in out.iter_mut().enumerate().take(grid.dim()) {
        *o = grid
            .faces(axis)
            .zip(&mass[axis])
            .map(|(f, &fm)| {
                let d = if fm >= 0.0 { u[f.left] } else { u[f.right] };
                [fm * d[0], fm * d[1]]
            })
            .collect();
    }
    out
}

/// Mass and momentum parts of the convective fluxes for a state.
pub fn convective_flux_rho(state: &SimState) -> FaceFluxes {
    let g = &state.grid;
    let u = state.velocity();
    let uf = face_velocities(g, &u);
    let mass = mass_flux(g, &state.rho, &uf);
    let momentum = momentum_flux(g, &mass, &u);
    FaceFluxes {
        mass,
        momentum,
        particle: [Vec::new(), Vec::new()],
    }
}

/// Coefficients `(c_left, c_right)` of the particle flux
/// `J = c_left * eta_left + c_right * eta_right` across a face with potential
/// jump `w = phi_right - phi_left` and normal velocity `u_f`.
///
/// Drift, diffusion and transport are fitted together through the shifted
/// jump `w - u_f dx`; `c_left >= 0 >= c_right` always.
#[inline]
pub fn particle_flux_coeffs(w: f64, u_f: f64, dx: f64) -> (f64, f64) {
    let z = w - u_f * dx;
    (bernoulli(z) / dx, -bernoulli(-z) / dx)
}

/// Particle flux on every interior face.
pub fn particle_flux(eta: &[f64], u: &[[f64; 2]], pot: &PotentialField) -> FaceField {
    let g = &pot.grid;
    let uf = face_velocities(g, u);
    particle_flux_with_face_velocity(g, eta, &uf, pot)
}

pub(crate) fn particle_flux_with_face_velocity(
    grid: &Grid,
    eta: &[f64],
    u_face: &FaceField,
    pot: &PotentialField,
) -> FaceField {
    let mut out: FaceField = [Vec::new(), Vec::new()];
    for (axis, o) in out.iter_mut().enumerate().take(grid.dim()) {
        let dx = grid.spacing(axis);
        *o = grid
            .faces(axis)
            .zip(&u_face[axis])
            .map(|(f, &uf)| {
                let w = pot.phi[f.right] - pot.phi[f.left];
                let (cl, cr) = particle_flux_coeffs(w, uf, dx);
                cl * eta[f.left] + cr * eta[f.right]
            })
            .collect();
    }
    out
}

/// Face forces `G` whose cell averages give the pressure and body-force terms
/// of the momentum balance, i.e. approximations of
/// `grad(p_delta(rho) + eta) + (eta + beta rho) grad(phi)`.
///
/// The fluid part is `rho_donor * D(h(rho) + beta phi)` with the same donor
/// density as the mass flux; the particle part is `eta_hat * D(log eta + phi)`
/// with `u_f * eta_hat` equal to the transport share of the fitted flux.
/// Both vanish on the sampled stationary profiles.
pub fn face_forces(
    grid: &Grid,
    rho: &[f64],
    eta: &[f64],
    u_face: &FaceField,
    pot: &PotentialField,
    params: &PhysParams,
) -> FaceField {
    face_forces_locked(grid, rho, eta, u_face, pot, params, None)
}

pub(crate) fn face_forces_locked(
    grid: &Grid,
    rho: &[f64],
    eta: &[f64],
    u_face: &FaceField,
    pot: &PotentialField,
    params: &PhysParams,
    lock: Option<&DonorLock>,
) -> FaceField {
    let mut out: FaceField = [Vec::new(), Vec::new()];
    let enth: Vec<f64> = rho
        .iter()
        .zip(&pot.phi)
        .map(|(&r, &p)| params.enthalpy(r) + params.beta * p)
        .collect();
    let log_g: Vec<f64> = eta
        .iter()
        .zip(&pot.phi)
        .map(|(&e, &p)| e.max(ENTROPY_FLOOR).ln() + p)
        .collect();
    for (axis, o) in out.iter_mut().enumerate().take(grid.dim()) {
        let dx = grid.spacing(axis);
        *o = grid
            .faces(axis)
            .zip(&u_face[axis])
            .enumerate()
            .map(|(i, (f, &uf))| {
                let (l, r) = (f.left, f.right);
                let rho_d = donor_locked(uf, rho[l], rho[r], lock_at(lock, axis, i));
                let fluid = rho_d * (enth[r] - enth[l]) / dx;
                let w = pot.phi[r] - pot.phi[l];
                let s = uf * dx;
                let eta_hat = bernoulli_divided_difference(w, s) * eta[l]
                    + bernoulli_divided_difference(-w, -s) * eta[r];
                fluid + eta_hat * (log_g[r] - log_g[l]) / dx
            })
            .collect();
    }
    out
}

/// Cell force: per axis, the mean of the two adjacent face forces, with zero
/// at walls.
pub fn cell_forces(grid: &Grid, face: &FaceField) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; grid.len()];
    for axis in 0..grid.dim() {
        for (f, &gf) in grid.faces(axis).zip(&face[axis]) {
            out[f.left][axis] += 0.5 * gf;
            out[f.right][axis] += 0.5 * gf;
        }
    }
    out
}

/// Cell divergence of a scalar face flux (walls carry zero flux).
pub fn divergence(grid: &Grid, flux: &FaceField) -> Vec<f64> {
    let mut div = vec![0.0; grid.len()];
    for axis in 0..grid.dim() {
        let dx = grid.spacing(axis);
        for (f, &q) in grid.faces(axis).zip(&flux[axis]) {
            div[f.left] += q / dx;
            div[f.right] -= q / dx;
        }
    }
    div
}

/// Cell divergence of a vector face flux.
pub fn divergence_vec(grid: &Grid, flux: &[Vec<[f64; 2]>; 2]) -> Vec<[f64; 2]> {
    let mut div = vec![[0.0; 2]; grid.len()];
    for axis in 0..grid.dim() {
        let dx = grid.spacing(axis);
        for (f, q) in grid.faces(axis).zip(&flux[axis]) {
            for c in 0..2 {
                div[f.left][c] += q[c] / dx;
                div[f.right][c] -= q[c] / dx;
            }
        }
    }
    div
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;

    fn grid(n: usize) -> Grid {
        Grid::uniform_1d(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn donor_picks_upwind_value() {
        assert_eq!(donor(1.0, 2.0, 5.0), 2.0);
        assert_eq!(donor(-1.0, 2.0, 5.0), 5.0);
        let g = grid(4);
        let uf: FaceField = [vec![1.0, 0.0, -2.0], vec![]];
        let f = mass_flux(&g, &[2.0, 5.0, 1.0, 3.0], &uf);
        assert_eq!(f[0], vec![2.0, 0.0, -6.0]);
    }

    #[test]
    fn uniform_density_divergence_matches_hand_assembly() {
        // four cells, dx = 1/4, velocities u = (0.4, -0.2, 0.6, 0.1)
        let g = grid(4);
        let u = [[0.4, 0.0], [-0.2, 0.0], [0.6, 0.0], [0.1, 0.0]];
        let rho = 3.0;
        let s = SimState::new(
            g.clone(),
            vec![rho; 4],
            u.iter().map(|v| [rho * v[0], 0.0]).collect(),
            vec![0.0; 4],
            0.0,
        )
        .unwrap();
        let fl = convective_flux_rho(&s);
        let div = divergence(&g, &fl.mass);
        // face velocities 0.1, 0.2, 0.35; walls zero
        let dx = 0.25;
        let uf = [0.0, 0.1, 0.2, 0.35, 0.0];
        for i in 0..4 {
            let expect = rho * (uf[i + 1] - uf[i]) / dx;
            assert!(
                (div[i] - expect).abs() < 1e-13,
                "{i}: {} vs {expect}",
                div[i]
            );
        }
    }

    #[test]
    fn zero_potential_flux_is_two_point_diffusion() {
        // first three cells of the smallest admissible grid
        let g = grid(4);
        let pot = PotentialField::zero(g.clone(), Boundary::Bounded);
        let eta = [1.0, 4.0, 2.5, 0.0];
        let j = particle_flux(&eta, &[[0.0; 2]; 4], &pot);
        let dx = 0.25;
        assert!((j[0][0] - (1.0 - 4.0) / dx).abs() < 1e-13);
        assert!((j[0][1] - (4.0 - 2.5) / dx).abs() < 1e-13);
    }

    #[test]
    fn fitted_flux_vanishes_on_boltzmann_profile() {
        let g = grid(16);
        let pot = PotentialField::from_fn(g.clone(), Boundary::Bounded, |x| {
            3.0 * x[0] + (5.0 * x[0]).sin()
        })
        .unwrap();
        let eta: Vec<f64> = pot.phi.iter().map(|p| 2.0 * (-p).exp()).collect();
        let j = particle_flux(&eta, &vec![[0.0; 2]; 16], &pot);
        assert!(j[0].iter().all(|v| v.abs() < 1e-13), "{:?}", j[0]);
    }

    #[test]
    fn forces_vanish_on_stationary_profiles() {
        let g = grid(20);
        let params = PhysParams {
            a: 1.3,
            gamma: 1.4,
            mu: 1.0,
            lambda: 0.0,
            beta: 0.8,
            delta: 0.0,
            h: 0.01,
        };
        let pot =
            PotentialField::from_fn(g.clone(), Boundary::Bounded, |x| x[0] * x[0] + x[0]).unwrap();
        let c = 3.0;
        let rho: Vec<f64> = pot
            .phi
            .iter()
            .map(|p| {
                ((params.gamma - 1.0) / (params.a * params.gamma) * (c - params.beta * p))
                    .powf(1.0 / (params.gamma - 1.0))
            })
            .collect();
        let eta: Vec<f64> = pot.phi.iter().map(|p| 0.7 * (-p).exp()).collect();
        let uf = face_velocities(&g, &vec![[0.0; 2]; 20]);
        let gf = face_forces(&g, &rho, &eta, &uf, &pot, &params);
        assert!(gf[0].iter().all(|v| v.abs() < 1e-12), "{:?}", gf[0]);
    }

    #[test]
    fn particle_force_pairs_with_transport_share() {
        // u_f * eta_hat must equal J(w - u_f dx) - J(w)
        let dx = 0.1;
        for &(w, uf) in &[
            (0.3, 0.7),
            (-1.2, 0.2),
            (0.0, -3.0),
            (2.0, 1e-9),
            (0.5, -1e-7),
        ] {
            let (el, er) = (0.8, 1.9);
            let (a, b) = particle_flux_coeffs(w, uf, dx);
            let (a0, b0) = particle_flux_coeffs(w, 0.0, dx);
            let transport = (a - a0) * el + (b - b0) * er;
            let s = uf * dx;
            let eta_hat =
                bernoulli_divided_difference(w, s) * el + bernoulli_divided_difference(-w, -s) * er;
            assert!(
                (transport - uf * eta_hat).abs() < 1e-9 * (1.0 + transport.abs()),
                "w={w} u={uf}: {transport} vs {}",
                uf * eta_hat
            );
        }
    }
}
