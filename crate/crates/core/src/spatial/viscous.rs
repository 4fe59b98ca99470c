use crate::model::{Grid, PhysParams};

/// Emits the entries of the discrete viscous operator
/// `mu Lap_h u + lambda grad_h(div_h u)` as
/// `(row_cell, row_comp, col_cell, col_comp, coefficient)`.
///
/// Second derivatives along an axis use the compact three-point stencil with
/// the no-slip wall half a cell away from the boundary cell center. The mixed
/// derivatives of the 2D `grad div` term are products of centered differences
/// with zero ghost values, which keeps the operator symmetric.
pub fn viscous_stencil(
    grid: &Grid,
    params: &PhysParams,
    mut emit: impl FnMut(usize, usize, usize, usize, f64),
) {
    let dim = grid.dim();
    for c in 0..grid.len() {
        for comp in 0..dim {
            for axis in 0..dim {
                let coef = if axis == comp {
                    params.mu + params.lambda
                } else {
                    params.mu
                };
                let dx2 = grid.spacing(axis).powi(2);
                let mut diag = 0.0;
                for step in [-1, 1] {
                    match grid.neighbor(c, axis, step) {
                        Some(n) => {
                            emit(c, comp, n, comp, coef / dx2);
                            diag -= coef / dx2;
                        }
                        None => diag -= 2.0 * coef / dx2,
                    }
                }
                emit(c, comp, c, comp, diag);
            }
        }
        if dim == 2 && params.lambda != 0.0 {
            let k = params.lambda / (4.0 * grid.spacing(0) * grid.spacing(1));
            for (sx, sy, sign) in [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
                let diag = grid
                    .neighbor(c, 0, sx)
                    .and_then(|n| grid.neighbor(n, 1, sy));
                if let Some(n) = diag {
                    emit(c, 0, n, 1, sign * k);
                    emit(c, 1, n, 0, sign * k);
                }
            }
        }
    }
}

/// `mu Lap_h u + lambda grad_h(div_h u)` per cell.
pub fn viscous_operator(grid: &Grid, u: &[[f64; 2]], params: &PhysParams) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; grid.len()];
    viscous_stencil(grid, params, |rc, rk, cc, ck, v| {
        out[rc][rk] += v * u[cc][ck]
    });
    out
}

/// `-<V_h u, u>` integrated over the domain, assembled as sums of squared
/// face differences (wall faces included) plus the mixed term.
pub fn viscous_dissipation(grid: &Grid, u: &[[f64; 2]], params: &PhysParams) -> f64 {
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let mut total = 0.0;
    for axis in 0..dim {
        let dx = grid.spacing(axis);
        for comp in 0..dim {
            let coef = if axis == comp {
                params.mu + params.lambda
            } else {
                params.mu
            };
            let mut s = 0.0;
            for f in grid.faces(axis) {
                s += ((u[f.right][comp] - u[f.left][comp]) / dx).powi(2);
            }
            let mut wall = 0.0;
            for c in 0..grid.len() {
                for step in [-1, 1] {
                    if grid.neighbor(c, axis, step).is_none() {
                        wall += (2.0 * u[c][comp] / dx).powi(2) * 0.5;
                    }
                }
            }
            total += coef * (s + wall) * vol;
        }
    }
    if dim == 2 && params.lambda != 0.0 {
        let cross: f64 = (0..grid.len())
            .map(|c| centered(grid, u, c, 0, 0) * centered(grid, u, c, 1, 1))
            .sum();
        total += 2.0 * params.lambda * cross * vol;
    }
    total
}

/// Viscous dissipation restricted to interior faces (no wall shear).
pub fn viscous_dissipation_interior(grid: &Grid, u: &[[f64; 2]], params: &PhysParams) -> f64 {
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let mut total = 0.0;
    for axis in 0..dim {
        let dx = grid.spacing(axis);
        for comp in 0..dim {
            let coef = if axis == comp {
                params.mu + params.lambda
            } else {
                params.mu
            };
            let s: f64 = grid
                .faces(axis)
                .map(|f| ((u[f.right][comp] - u[f.left][comp]) / dx).powi(2))
                .sum();
            total += coef * s * vol;
        }
    }
    total
}

/// Centered difference of component `comp` along `axis` with zero ghosts.
fn centered(grid: &Grid, u: &[[f64; 2]], c: usize, axis: usize, comp: usize) -> f64 {
    let up = grid.neighbor(c, axis, 1).map_or(0.0, |n| u[n][comp]);
    let dn = grid.neighbor(c, axis, -1).map_or(0.0, |n| u[n][comp]);
    (up - dn) / (2.0 * grid.spacing(axis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(mu: f64, lambda: f64) -> PhysParams {
        PhysParams {
            a: 1.0,
            gamma: 2.0,
            mu,
            lambda,
            beta: 1.0,
            delta: 0.0,
            h: 0.1,
        }
    }

    fn random_field(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<[f64; 2]> {
        (0..n)
            .map(|_| {
                let mut v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                if dim == 1 {
                    v[1] = 0.0;
                }
                v
            })
            .collect()
    }

    fn dot(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| x[0] * y[0] + x[1] * y[1])
            .sum()
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let g = Grid::uniform_1d(0.0, 1.0, 8).unwrap();
        let out = viscous_operator(&g, &vec![[0.0; 2]; 8], &params(1.0, 0.3));
        assert!(out.iter().all(|v| v == &[0.0, 0.0]));
    }

    #[test]
    fn quadratic_profile_has_second_difference_minus_two() {
        let g = Grid::uniform_1d(0.0, 1.0, 32).unwrap();
        let u: Vec<[f64; 2]> = (0..32)
            .map(|c| {
                let x = g.cell_center(c)[0];
                [x * (1.0 - x), 0.0]
            })
            .collect();
        let out = viscous_operator(&g, &u, &params(0.6, 0.4));
        for v in &out[1..31] {
            assert!((v[0] + 2.0).abs() < 1e-10, "{}", v[0]);
        }
    }

    #[test]
    fn symmetric_and_matches_dissipation_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grids = [
            Grid::uniform_1d(0.0, 1.0, 8).unwrap(),
            Grid::new(&[0.0, 0.0], &[1.0, 2.0], &[4, 5]).unwrap(),
        ];
        for g in &grids {
            for &(mu, lambda) in &[(1.0, 0.0), (0.7, 0.5), (1.0, -0.4)] {
                let p = params(mu, lambda);
                for _ in 0..5 {
                    let u = random_field(&mut rng, g.len(), g.dim());
                    let v = random_field(&mut rng, g.len(), g.dim());
                    let vu = viscous_operator(g, &u, &p);
                    let vv = viscous_operator(g, &v, &p);
                    assert!((dot(&vu, &v) - dot(&vv, &u)).abs() < 1e-9 * dot(&vu, &vu).sqrt());
                    let d = viscous_dissipation(g, &u, &p);
                    let form = -dot(&vu, &u) * g.cell_volume();
                    assert!((d - form).abs() < 1e-9 * d.abs().max(1.0), "{d} vs {form}");
                    if g.dim() == 1 || lambda >= 0.0 {
                        assert!(d > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn mixed_term_matches_dense_assembly() {
        // Oracle: build dense centered-difference matrices Dx, Dy (zero
        // ghosts) and compare lambda * Dx * Dy against the stencil entries
        // that couple the two components.
        let g = Grid::new(&[0.0, 0.0], &[1.0, 1.0], &[4, 4]).unwrap();
        let n = g.len();
        let (hx, hy) = (g.spacing(0), g.spacing(1));
        let mut dx = vec![vec![0.0; n]; n];
        let mut dy = vec![vec![0.0; n]; n];
        for j in 0..4 {
            for i in 0..4 {
                let c = g.index(i, j);
                if i + 1 < 4 {
                    dx[c][g.index(i + 1, j)] = 1.0 / (2.0 * hx);
                }
                if i > 0 {
                    dx[c][g.index(i - 1, j)] = -1.0 / (2.0 * hx);
                }
                if j + 1 < 4 {
                    dy[c][g.index(i, j + 1)] = 1.0 / (2.0 * hy);
                }
                if j > 0 {
                    dy[c][g.index(i, j - 1)] = -1.0 / (2.0 * hy);
                }
            }
        }
        let lambda = 0.75;
        let mut cross = vec![vec![0.0; n]; n];
        viscous_stencil(&g, &params(1.0, lambda), |rc, rk, cc, ck, v| {
            if rk == 0 && ck == 1 {
                cross[rc][cc] += v;
            }
        });
        for r in 0..n {
            for c in 0..n {
                let expect: f64 = lambda * (0..n).map(|k| dx[r][k] * dy[k][c]).sum::<f64>();
                assert!((cross[r][c] - expect).abs() < 1e-12, "({r},{c})");
            }
        }
    }
}
