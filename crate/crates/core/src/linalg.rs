//! Banded direct solver for the implicit systems.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Storage reserves `kl` extra super-diagonals so LU with partial pivoting can
/// run in place.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `v` at `(i, j)`. Panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.slot(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = b`; the relative max-norm residual must end up at or
    /// below `tol` (one sweep of iterative refinement is attempted first).
    /// Solves `A x = b` with one step of iterative refinement. The result
    /// must have normwise backward error `|b - A x| / (|A| |x| + |b|)` (max
    /// norms) at most `tol`.
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.n);
        let lu = self.factor()?;
        let mut x = lu.solve(b);
        let anorm = self.norm_inf();
        let scale = |x: &[f64]| anorm * max_abs(x) + max_abs(b);
        let mut res = self.residual(&x, b);
        if max_abs(&res) > tol * scale(&x) {
            let dx = lu.solve(&res);
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
            res = self.residual(&x, b);
        }
        let r = max_abs(&res);
        let s = scale(&x);
        if r > tol * s || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve(format!(
                "backward error {:.3e} exceeds tolerance {tol:.1e} (n = {})",
                r / s.max(f64::MIN_POSITIVE),
                self.n
            )));
        }
        Ok(x)
    }

    /// Largest absolute row sum.
    fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                (lo..=hi).map(|c| self.get(r, c).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let ax = self.mul_vec(x);
        b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
    }

    fn factor(&self) -> Result<BandLu> {
        let mut a = self.clone();
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let mut mult = vec![0.0; n * kl.max(1)];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.data[a.slot(k, k)].abs();
            for r in k + 1..=last_row {
                let v = a.data[a.slot(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= f64::MIN_POSITIVE * scale || !best.is_finite() {
                return Err(Error::LinearSolve(format!(
                    "matrix is singular to working precision at row {k}"
                )));
            }
            piv[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (sk, sp) = (a.slot(k, j), a.slot(p, j));
                    a.data.swap(sk, sp);
                }
            }
            let d = a.data[a.slot(k, k)];
            for r in k + 1..=last_row {
                let f = a.data[a.slot(r, k)] / d;
                mult[k * kl.max(1) + (r - k - 1)] = f;
                let s = a.slot(r, k);
                a.data[s] = 0.0;
                if f != 0.0 {
                    for j in k + 1..=last_col {
                        let v = a.data[a.slot(k, j)];
                        let s = a.slot(r, j);
                        a.data[s] -= f * v;
                    }
                }
            }
        }
        Ok(BandLu { a, piv, mult })
    }
}

struct BandLu {
    a: BandMatrix,
    piv: Vec<usize>,
    mult: Vec<f64>,
}

impl BandLu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.a;
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let mut y = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                y.swap(k, p);
            }
            let last_row = (k + kl).min(n - 1);
            for r in k + 1..=last_row {
                y[r] -= self.mult[k * kl.max(1) + (r - k - 1)] * y[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + kl + ku).min(n - 1);
            let mut s = y[k];
            for j in k + 1..=last_col {
                s -= a.data[a.slot(k, j)] * y[j];
            }
            y[k] = s / a.data[a.slot(k, k)];
        }
        y
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for r in k + 1..n {
                let f = a[r][k] / a[k][k];
                for j in k..n {
                    a[r][j] -= f * a[k][j];
                }
                b[r] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    #[test]
    fn matches_dense_elimination_with_pivoting() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(9, 1, 1), (17, 3, 2), (12, 0, 4), (15, 5, 0)] {
            let mut m = BandMatrix::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    // weak diagonal forces row exchanges
                    let v = rng.gen_range(-1.0..1.0) + if i == j { 0.05 } else { 0.0 };
                    m.add(i, j, v);
                    dense[i][j] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = m.solve(&b, 1e-9).unwrap();
            let xd = dense_solve(dense, b);
            for (u, v) in x.iter().zip(&xd) {
                assert!((u - v).abs() < 1e-8 * v.abs().max(1.0), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut m = BandMatrix::zeros(4, 1, 1);
        for i in 0..4 {
            m.add(i, i, 1.0);
        }
        let s = m.slot(2, 2);
        m.data[s] = 0.0;
        assert!(matches!(
            m.solve(&[1.0; 4], 1e-12),
            Err(Error::LinearSolve(_))
        ));
    }
}
