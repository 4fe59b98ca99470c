use crate::error::{Error, Result};

/// Uniform cell-centered box grid in one or two dimensions.
///
/// Cells are numbered with the first axis running fastest. Interior faces of
/// an axis are enumerated by [`Grid::faces`]; every per-face array in the crate
/// uses that ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    cells: [usize; 2],
}

/// Interior face between two face-adjacent cells, `left` having the smaller
/// coordinate along `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub left: usize,
    pub right: usize,
}

impl Grid {
    pub fn new(lo: &[f64], hi: &[f64], cells: &[usize]) -> Result<Self> {
        let dim = cells.len();
        if !(1..=2).contains(&dim) || lo.len() != dim || hi.len() != dim {
            return Err(Error::Domain(format!(
                "grid needs matching lo/hi/cells of length 1 or 2, got {}/{}/{}",
                lo.len(),
                hi.len(),
                cells.len()
            )));
        }
        let mut g = Grid {
            dim,
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
            cells: [1, 1],
        };
        for a in 0..dim {
            if !(lo[a].is_finite() && hi[a].is_finite() && hi[a] > lo[a]) {
                return Err(Error::Domain(format!(
                    "axis {a}: need finite lo < hi, got [{}, {}]",
                    lo[a], hi[a]
                )));
            }
            if cells[a] < 4 {
                return Err(Error::Domain(format!(
                    "axis {a}: at least 4 cells required, got {}",
                    cells[a]
                )));
            }
            g.lo[a] = lo[a];
            g.hi[a] = hi[a];
            g.cells[a] = cells[a];
        }
        Ok(g)
    }

    pub fn uniform_1d(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Grid::new(&[lo], &[hi], &[n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.hi[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Measure of a face normal to `axis` (1 in one dimension).
    pub fn face_area(&self, axis: usize) -> f64 {
        self.cell_volume() / self.spacing(axis)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.cells[0]
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.cells[0] * j
    }

    pub fn coords(&self, idx: usize) -> [usize; 2] {
        [idx % self.cells[0], idx / self.cells[0]]
    }

    pub fn cell_center(&self, idx: usize) -> [f64; 2] {
        let c = self.coords(idx);
        let mut x = [0.0; 2];
        for a in 0..self.dim {
            x[a] = self.lo[a] + (c[a] as f64 + 0.5) * self.spacing(a);
        }
        x
    }

    /// Neighbor of `idx` one cell along `axis` in direction `step` (±1).
    pub fn neighbor(&self, idx: usize, axis: usize, step: i32) -> Option<usize> {
        let c = self.coords(idx)[axis];
        match step {
            1 if c + 1 < self.cells[axis] => Some(idx + self.stride(axis)),
            -1 if c > 0 => Some(idx - self.stride(axis)),
            _ => None,
        }
    }

    pub fn n_faces(&self, axis: usize) -> usize {
        if axis >= self.dim {
            return 0;
        }
        let mut n = self.cells;
        n[axis] -= 1;
        n[0] * n[1]
    }

    /// Interior faces normal to `axis`.
    pub fn faces(&self, axis: usize) -> impl Iterator<Item = Face> + '_ {
        let stride = self.stride(axis);
        (0..self.len())
            .filter(move |&c| axis < self.dim && self.coords(c)[axis] + 1 < self.cells[axis])
            .map(move |left| Face {
                axis,
                left,
                right: left + stride,
            })
    }

    /// True when the cell touches the domain boundary along `axis`.
    pub fn on_boundary(&self, idx: usize, axis: usize) -> bool {
        let c = self.coords(idx)[axis];
        c == 0 || c + 1 == self.cells[axis]
    }

    /// Largest Euclidean distance from the coordinate origin to a cell center.
    pub fn radius(&self) -> f64 {
        (0..self.len())
            .map(|c| norm(self.cell_center(c), self.dim))
            .fold(0.0, f64::max)
    }

    pub fn check_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Usage(format!("{what}: grids do not match")))
        }
    }

    pub fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "{what}: expected {} cell values, got {len}",
                self.len()
            )))
        }
    }
}

pub(crate) fn norm(x: [f64; 2], dim: usize) -> f64 {
    x[..dim].iter().map(|v| v * v).sum::<f64>().sqrt()
}
