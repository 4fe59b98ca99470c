use super::{xlogx, PhysParams, PotentialField, SimState};
use crate::error::Result;
use crate::spatial::{bernoulli, viscous_dissipation};

/// Total energy split into its named parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyComponents {
    pub kinetic: f64,
    pub pressure: f64,
    pub entropy: f64,
    pub potential: f64,
    pub total: f64,
}

/// Dissipation rate split into the velocity and particle parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dissipation {
    pub viscous: f64,
    pub particle: f64,
    pub total: f64,
}

/// `int 1/2 rho |u|^2 + Pi(rho) + eta log eta + (beta rho + eta) phi` by
/// the midpoint rule.
pub fn total_energy(
    state: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
) -> Result<EnergyComponents> {
    state.grid.check_same(&pot.grid, "potential")?;
    let vol = state.grid.cell_volume();
    let u = state.velocity();
    let mut e = EnergyComponents::default();
    for c in 0..state.grid.len() {
        let (r, eta, phi) = (state.rho[c], state.eta[c], pot.phi[c]);
        e.kinetic += 0.5 * r * (u[c][0] * u[c][0] + u[c][1] * u[c][1]);
        e.pressure += params.pressure_potential(r);
        e.entropy += xlogx(eta);
        e.potential += (params.beta * r + eta) * phi;
    }
    e.kinetic *= vol;
    e.pressure *= vol;
    e.entropy *= vol;
    e.potential *= vol;
    e.total = e.kinetic + e.pressure + e.entropy + e.potential;
    Ok(e)
}

/// `int mu |grad u|^2 + lambda |div u|^2 + |2 grad sqrt(eta) + sqrt(eta) grad phi|^2`.
///
/// The velocity part is `-<V_h u, u>` of the discrete viscous operator. The
/// particle part uses, per interior face with jump `w = phi_R - phi_L`,
/// `4 (sqrt(B(w) eta_L) - sqrt(B(-w) eta_R))^2 / dx^2`, which vanishes
/// exactly when `eta e^phi` is constant across the face.
pub fn dissipation(
    state: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
) -> Result<Dissipation> {
    let g = &state.grid;
    g.check_same(&pot.grid, "potential")?;
    let viscous = viscous_dissipation(g, &state.velocity(), params).max(0.0);
    let mut particle = 0.0;
    for axis in 0..g.dim() {
        let dx = g.spacing(axis);
        for f in g.faces(axis) {
            let w = pot.phi[f.right] - pot.phi[f.left];
            let d = (bernoulli(w) * state.eta[f.left]).sqrt()
                - (bernoulli(-w) * state.eta[f.right]).sqrt();
            particle += 4.0 * d * d / (dx * dx);
        }
    }
    particle *= g.cell_volume();
    Ok(Dissipation {
        viscous,
        particle,
        total: viscous + particle,
    })
}

/// One accepted time level of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub time: f64,
    pub mass_rho: f64,
    pub mass_eta: f64,
    pub energy: EnergyComponents,
    pub dissipation: Dissipation,
    /// Step size that produced this row (0 for the initial row).
    pub h: f64,
    /// `E_prev - E - h D`; nonnegative when the energy inequality holds
    /// without slack. 0 for the initial row.
    pub ineq_margin: f64,
}

impl LedgerRow {
    pub fn new(
        state: &SimState,
        pot: &PotentialField,
        params: &PhysParams,
        prev: Option<&LedgerRow>,
        h: f64,
    ) -> Result<Self> {
        let (mass_rho, mass_eta) = state.masses();
        let energy = total_energy(state, pot, params)?;
        let dissipation = dissipation(state, pot, params)?;
        let ineq_margin = match prev {
            Some(p) => p.energy.total - energy.total - h * dissipation.total,
            None => 0.0,
        };
        Ok(LedgerRow {
            time: state.time,
            mass_rho,
            mass_eta,
            energy,
            dissipation,
            h: if prev.is_some() { h } else { 0.0 },
            ineq_margin,
        })
    }
}

/// Time-ordered record of accepted steps, starting with the initial state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn start(state: &SimState, pot: &PotentialField, params: &PhysParams) -> Result<Self> {
        Ok(EnergyLedger {
            rows: vec![LedgerRow::new(state, pot, params, None, 0.0)?],
        })
    }

    /// Appends the row for an accepted step of size `h`.
    pub fn record(
        &mut self,
        state: &SimState,
        pot: &PotentialField,
        params: &PhysParams,
        h: f64,
    ) -> Result<&LedgerRow> {
        let row = LedgerRow::new(state, pot, params, self.rows.last(), h)?;
        self.rows.push(row);
        Ok(self.rows.last().expect("just pushed"))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first(&self) -> Option<&LedgerRow> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&LedgerRow> {
        self.rows.last()
    }

    /// Largest relative change of either mass against the first row.
    pub fn max_mass_drift(&self) -> f64 {
        let Some(r0) = self.rows.first() else {
            return 0.0;
        };
        let rel = |a: f64, b: f64| {
            if b == 0.0 {
                a.abs()
            } else {
                ((a - b) / b).abs()
            }
        };
        self.rows
            .iter()
            .map(|r| rel(r.mass_rho, r0.mass_rho).max(rel(r.mass_eta, r0.mass_eta)))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, Grid};

    fn params() -> PhysParams {
        PhysParams {
            a: 1.0,
            gamma: 2.0,
            mu: 1.0,
            lambda: 0.0,
            beta: 1.0,
            delta: 0.0,
            h: 0.01,
        }
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn uniform_and_vacuum_energies() {
        let g = Grid::uniform_1d(0.0, 1.0, 10).unwrap();
        let pot = PotentialField::zero(g.clone(), Boundary::Bounded);
        let s = SimState::at_rest(g.clone(), vec![1.0; 10], vec![1.0; 10]).unwrap();
        let e = total_energy(&s, &pot, &params()).unwrap();
        assert!((e.total - 1.0).abs() < 1e-14);
        assert!((e.pressure - 1.0).abs() < 1e-14);
        assert_eq!(e.entropy, 0.0);
        let z = SimState::zeros(g);
        assert_eq!(total_energy(&z, &pot, &params()).unwrap().total, 0.0);
    }

    #[test]
    fn tilted_profile_energy_matches_quadrature_oracle() {
        let norm = 1.0 - (-1.0f64).exp();
        let eta = |x: f64| (-x).exp() / norm;
        let integrand = |x: f64| 1.0 + eta(x) * eta(x).ln() + (1.0 + eta(x)) * x;
        let oracle = simpson(integrand, 0.0, 1.0, 20_000);
        for &n in &[1000usize, 250, 125] {
            let g = Grid::uniform_1d(0.0, 1.0, n).unwrap();
            let pot = PotentialField::from_fn(g.clone(), Boundary::Bounded, |x| x[0]).unwrap();
            let e_cells: Vec<f64> = (0..n).map(|c| eta(g.cell_center(c)[0])).collect();
            let s = SimState::at_rest(g, vec![1.0; n], e_cells).unwrap();
            let e = total_energy(&s, &pot, &params()).unwrap();
            let err = (e.total - oracle).abs();
            // midpoint rule: error ~ C dx^2
            assert!(err < 0.05 / (n * n) as f64, "n={n}: err {err}");
            let sum = e.kinetic + e.pressure + e.entropy + e.potential;
            assert_eq!(e.total, sum);
        }
    }

    #[test]
    fn particle_dissipation_of_decaying_exponential() {
        let expect = 1.0 - (-1.0f64).exp();
        for &n in &[100usize, 400, 1600] {
            let g = Grid::uniform_1d(0.0, 1.0, n).unwrap();
            let pot = PotentialField::zero(g.clone(), Boundary::Bounded);
            let eta = (0..n).map(|c| (-g.cell_center(c)[0]).exp()).collect();
            let s = SimState::at_rest(g, vec![1.0; n], eta).unwrap();
            let d = dissipation(&s, &pot, &params()).unwrap();
            assert_eq!(d.viscous, 0.0);
            // interior faces only cover (dx/2, 1 - dx/2): first-order gap
            assert!(
                (d.particle - expect).abs() < 1.5 / n as f64,
                "n={n}: {}",
                d.particle
            );
        }
    }

    #[test]
    fn dissipation_vanishes_at_equilibrium() {
        let g = Grid::new(&[0.0, 0.0], &[1.0, 2.0], &[6, 9]).unwrap();
        let pot = PotentialField::from_fn(g.clone(), Boundary::Bounded, |x| {
            x[0] * x[0] + (2.0 * x[1]).sin() + 1.0
        })
        .unwrap();
        let eta = pot.phi.iter().map(|p| 3.0 * (-p).exp()).collect();
        let s = SimState::at_rest(g.clone(), vec![0.5; g.len()], eta).unwrap();
        let d = dissipation(&s, &pot, &params()).unwrap();
        assert!(d.total.abs() < 1e-13, "{}", d.total);
    }

    #[test]
    fn linear_velocity_interior_dissipation() {
        // u = s x: interior faces see gradient s over a length 1 - dx; the
        // walls add the half-cell shear of the no-slip condition.
        let n = 20;
        let s = 0.7;
        let g = Grid::uniform_1d(0.0, 1.0, n).unwrap();
        let dx = g.spacing(0);
        let u: Vec<[f64; 2]> = (0..n).map(|c| [s * g.cell_center(c)[0], 0.0]).collect();
        let p = params();
        let interior = crate::spatial::viscous_dissipation_interior(&g, &u, &p);
        assert!((interior - s * s * (1.0 - dx)).abs() < 1e-12);
        let total = crate::spatial::viscous_dissipation(&g, &u, &p);
        let (u0, un) = (u[0][0], u[n - 1][0]);
        let wall = 2.0 * (u0 * u0 + un * un) / dx * 1.0;
        assert!(
            (total - interior - wall).abs() < 1e-10,
            "{total} {interior} {wall}"
        );
    }

    #[test]
    fn ledger_margin_and_mass_drift() {
        let g = Grid::uniform_1d(0.0, 1.0, 8).unwrap();
        let pot = PotentialField::zero(g.clone(), Boundary::Bounded);
        let s0 = SimState::at_rest(g.clone(), vec![1.0; 8], vec![1.0; 8]).unwrap();
        let mut ledger = EnergyLedger::start(&s0, &pot, &params()).unwrap();
        let mut s1 = s0.clone();
        s1.time = 0.1;
        s1.rho[0] = 1.0 + 1e-3;
        let row = *ledger.record(&s1, &pot, &params(), 0.1).unwrap();
        assert!(row.ineq_margin < 0.0);
        assert!((ledger.max_mass_drift() - 1e-3 / 8.0).abs() < 1e-15);
        assert_eq!(ledger.len(), 2);
    }
}
