use super::grid::Grid;
use crate::error::{Error, Result};

/// Relative vacuum threshold: velocity is only recovered from momentum where
/// `rho > VACUUM_FACTOR * mass_rho / |domain|`.
pub const VACUUM_FACTOR: f64 = 1e-12;

/// Discrete fields at one time level.
///
/// Momentum is stored per cell as a two-component vector; the second
/// component is identically zero on one-dimensional grids.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub momentum: Vec<[f64; 2]>,
    pub eta: Vec<f64>,
    pub time: f64,
}

impl SimState {
    pub fn new(
        grid: Grid,
        rho: Vec<f64>,
        momentum: Vec<[f64; 2]>,
        eta: Vec<f64>,
        time: f64,
    ) -> Result<Self> {
        let s = SimState {
            grid,
            rho,
            momentum,
            eta,
            time,
        };
        s.validate()?;
        Ok(s)
    }

    /// State with zero momentum.
    pub fn at_rest(grid: Grid, rho: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        SimState::new(grid, rho, vec![[0.0; 2]; n], eta, 0.0)
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        SimState {
            grid,
            rho: vec![0.0; n],
            momentum: vec![[0.0; 2]; n],
            eta: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        self.grid.check_len(self.rho.len(), "rho")?;
        self.grid.check_len(self.eta.len(), "eta")?;
        self.grid.check_len(self.momentum.len(), "momentum")?;
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(Error::Domain(format!("time {} must be >= 0", self.time)));
        }
        for i in 0..n {
            if !(self.rho[i] >= 0.0 && self.rho[i].is_finite()) {
                return Err(Error::Domain(format!(
                    "rho[{i}] = {} is not >= 0",
                    self.rho[i]
                )));
            }
            if !(self.eta[i] >= 0.0 && self.eta[i].is_finite()) {
                return Err(Error::Domain(format!(
                    "eta[{i}] = {} is not >= 0",
                    self.eta[i]
                )));
            }
            if !self.momentum[i].iter().all(|m| m.is_finite()) {
                return Err(Error::Domain(format!("momentum[{i}] is not finite")));
            }
        }
        if self.grid.dim() == 1 && self.momentum.iter().any(|m| m[1] != 0.0) {
            return Err(Error::Domain(
                "one-dimensional state carries a second momentum component".into(),
            ));
        }
        Ok(())
    }

    pub fn masses(&self) -> (f64, f64) {
        let vol = self.grid.cell_volume();
        (
            self.rho.iter().sum::<f64>() * vol,
            self.eta.iter().sum::<f64>() * vol,
        )
    }

    pub fn vacuum_floor(&self) -> f64 {
        VACUUM_FACTOR * self.masses().0 / self.grid.volume()
    }

    /// Cell velocities `m / rho`, zero at or below the vacuum floor.
    pub fn velocity(&self) -> Vec<[f64; 2]> {
        let floor = self.vacuum_floor();
        self.rho
            .iter()
            .zip(&self.momentum)
            .map(|(&r, m)| {
                if r > floor {
                    [m[0] / r, m[1] / r]
                } else {
                    [0.0, 0.0]
                }
            })
            .collect()
    }

    /// Zeroes momentum in vacuum cells so that the state invariant holds.
    pub fn clear_vacuum_momentum(&mut self) {
        let floor = self.vacuum_floor();
        for (r, m) in self.rho.iter().zip(self.momentum.iter_mut()) {
            if *r <= floor {
                *m = [0.0, 0.0];
            }
        }
    }
}

/// Cell-volume weighted sums of `rho` and `eta`.
pub fn masses(state: &SimState) -> (f64, f64) {
    state.masses()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masses_of_simple_fields() {
        let g = Grid::uniform_1d(0.0, 1.0, 10).unwrap();
        let s = SimState::at_rest(g.clone(), vec![1.0; 10], vec![0.0; 10]).unwrap();
        let (mr, me) = s.masses();
        assert!((mr - 1.0).abs() < 1e-15);
        assert_eq!(me, 0.0);

        // rho(x) = (3/2 - x)/2 is linear, so the midpoint sum is exact: 1/2.
        let rho: Vec<f64> = (0..10).map(|i| (1.5 - g.cell_center(i)[0]) / 2.0).collect();
        let s = SimState::at_rest(g, rho, vec![0.0; 10]).unwrap();
        assert!((s.masses().0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_density() {
        let g = Grid::uniform_1d(0.0, 1.0, 4).unwrap();
        assert!(SimState::at_rest(g.clone(), vec![1.0, -1e-9, 1.0, 1.0], vec![0.0; 4]).is_err());
        assert!(SimState::at_rest(g, vec![1.0; 4], vec![0.0, 0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn velocity_vanishes_in_vacuum() {
        let g = Grid::uniform_1d(0.0, 1.0, 4).unwrap();
        let s = SimState::new(
            g,
            vec![2.0, 0.0, 1e-20, 1.0],
            vec![[1.0, 0.0], [0.0, 0.0], [5.0, 0.0], [-3.0, 0.0]],
            vec![0.0; 4],
            0.0,
        )
        .unwrap();
        let u = s.velocity();
        assert_eq!(u[0][0], 0.5);
        assert_eq!(u[1][0], 0.0);
        assert_eq!(u[2][0], 0.0);
        assert_eq!(u[3][0], -3.0);
    }
}
