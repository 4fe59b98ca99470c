use super::grid::Grid;
use crate::error::{Error, Result};

/// Whether the grid is the whole domain or a truncation of an unbounded one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Bounded,
    TruncatedUnbounded,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Bounded => "bounded",
            Boundary::TruncatedUnbounded => "truncated-unbounded",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bounded" => Ok(Boundary::Bounded),
            "truncated-unbounded" => Ok(Boundary::TruncatedUnbounded),
            other => Err(format!(
                "expected `bounded` or `truncated-unbounded`, got `{other}`"
            )),
        }
    }
}

/// External potential sampled at cell centers, with grid-derived gradient
/// (one value per interior face) and Laplacian (one value per cell).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub grid: Grid,
    pub phi: Vec<f64>,
    /// `grad_phi[axis][f]` is `(phi_right - phi_left) / dx` on the f-th
    /// interior face of `axis`.
    pub grad_phi: [Vec<f64>; 2],
    pub lap_phi: Vec<f64>,
    pub boundary: Boundary,
}

impl PotentialField {
    /// Builds the field, shifting it up so that `min(phi) = 0` when some
    /// sample is negative.
    ///
    /// Nonnegative samples are kept as they are: a potential whose infimum
    /// over the domain is 0 (e.g. `g x` on `(0, L)`) has a positive smallest
    /// cell-center sample, and shifting it would move the stationary
    /// constants by `O(dx)`.
    pub fn new(grid: Grid, mut phi: Vec<f64>, boundary: Boundary) -> Result<Self> {
        grid.check_len(phi.len(), "potential")?;
        let min = phi.iter().copied().fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return Err(Error::Domain("potential samples must be finite".into()));
        }
        if min < 0.0 {
            phi.iter_mut().for_each(|p| *p -= min);
        }
        Self::unnormalized(grid, phi, boundary)
    }

    /// Builds the field without any shift. Useful for checking how
    /// quantities transform under `phi -> phi + c`.
    pub fn unnormalized(grid: Grid, phi: Vec<f64>, boundary: Boundary) -> Result<Self> {
        grid.check_len(phi.len(), "potential")?;
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("potential samples must be finite".into()));
        }
        let mut grad_phi = [Vec::new(), Vec::new()];
        for (axis, grad) in grad_phi.iter_mut().enumerate().take(grid.dim()) {
            let dx = grid.spacing(axis);
            *grad = grid
                .faces(axis)
                .map(|f| (phi[f.right] - phi[f.left]) / dx)
                .collect();
        }
        let lap_phi = laplacian(&grid, &phi);
        Ok(PotentialField {
            grid,
            phi,
            grad_phi,
            lap_phi,
            boundary,
        })
    }

    pub fn from_fn(grid: Grid, boundary: Boundary, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let phi = (0..grid.len()).map(|c| f(grid.cell_center(c))).collect();
        Self::new(grid, phi, boundary)
    }

    pub fn zero(grid: Grid, boundary: Boundary) -> Self {
        let n = grid.len();
        Self::new(grid, vec![0.0; n], boundary).expect("zero potential is valid")
    }

    /// Cell-centered gradient: average of the two adjacent face gradients,
    /// or the single adjacent one at a wall.
    pub fn cell_gradient(&self, c: usize) -> [f64; 2] {
        let g = &self.grid;
        let mut out = [0.0; 2];
        for (axis, o) in out.iter_mut().enumerate().take(g.dim()) {
            let dx = g.spacing(axis);
            let lo = g.neighbor(c, axis, -1);
            let hi = g.neighbor(c, axis, 1);
            *o = match (lo, hi) {
                (Some(l), Some(r)) => (self.phi[r] - self.phi[l]) / (2.0 * dx),
                (None, Some(r)) => (self.phi[r] - self.phi[c]) / dx,
                (Some(l), None) => (self.phi[c] - self.phi[l]) / dx,
                (None, None) => 0.0,
            };
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.phi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Second differences summed over axes; boundary cells reuse the stencil
/// of the nearest interior cell.
fn laplacian(grid: &Grid, phi: &[f64]) -> Vec<f64> {
    let mut lap = vec![0.0; grid.len()];
    for axis in 0..grid.dim() {
        let dx2 = grid.spacing(axis).powi(2);
        let s = grid.stride(axis);
        let n = grid.cells(axis);
        for (c, l) in lap.iter_mut().enumerate() {
            let k = grid.coords(c)[axis];
            let center = if k == 0 {
                c + s
            } else if k + 1 == n {
                c - s
            } else {
                c
            };
            *l += (phi[center + s] - 2.0 * phi[center] + phi[center - s]) / dx2;
        }
    }
    lap
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_negative_minimum_to_zero() {
        let g = Grid::uniform_1d(0.0, 1.0, 8).unwrap();
        let kept = PotentialField::from_fn(g.clone(), Boundary::Bounded, |x| x[0]).unwrap();
        assert_eq!(kept.min(), 1.0 / 16.0);
        let p = PotentialField::from_fn(g, Boundary::Bounded, |x| 2.0 * x[0] - 3.0).unwrap();
        assert_eq!(p.min(), 0.0);
        assert!(p.grad_phi[0].iter().all(|&d| (d - 2.0).abs() < 1e-12));
        assert!(p.lap_phi.iter().all(|&l| l.abs() < 1e-9));
    }

    #[test]
    fn quadratic_laplacian_is_exact() {
        let g = Grid::new(&[-1.0, -1.0], &[1.0, 1.0], &[6, 7]).unwrap();
        let p = PotentialField::from_fn(g, Boundary::Bounded, |x| x[0] * x[0] + 3.0 * x[1] * x[1])
            .unwrap();
        for &l in &p.lap_phi {
            assert!((l - 8.0).abs() < 1e-10, "{l}");
        }
        let c = p.grid.index(2, 3);
        let gc = p.cell_gradient(c);
        let x = p.grid.cell_center(c);
        assert!((gc[0] - 2.0 * x[0]).abs() < 1e-12);
        assert!((gc[1] - 6.0 * x[1]).abs() < 1e-12);
    }

    #[test]
    fn boundary_flag_parses() {
        assert_eq!("bounded".parse::<Boundary>().unwrap(), Boundary::Bounded);
        assert_eq!(
            "truncated-unbounded".parse::<Boundary>().unwrap(),
            Boundary::TruncatedUnbounded
        );
        assert!("open".parse::<Boundary>().is_err());
    }
}
