//! Closed-form stationary states and the confinement checks on sampled
//! potentials.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{norm, Boundary, Grid, PhysParams, PotentialField, SimState};
use crate::spatial::particle_flux;

/// Relative mass tolerance of the density root finder.
pub const MASS_TOL: f64 = 1e-10;

/// Stationary profiles for given masses.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryState {
    pub rho_s: Vec<f64>,
    pub eta_s: Vec<f64>,
    pub c_rho: f64,
    pub c_eta: f64,
    pub mass_rho_target: f64,
    pub mass_eta_target: f64,
}

impl StationaryState {
    /// The profiles as a fluid at rest.
    pub fn to_state(&self, grid: &Grid) -> Result<SimState> {
        SimState::at_rest(grid.clone(), self.rho_s.clone(), self.eta_s.clone())
    }
}

/// `eta_s = C_eta e^{-phi}` with `C_eta = mass / int e^{-phi}`.
pub fn solve_eta_s(pot: &PotentialField, mass_eta: f64) -> Result<(Vec<f64>, f64)> {
    if !(mass_eta > 0.0 && mass_eta.is_finite()) {
        return Err(Error::Domain(format!("mass_eta = {mass_eta} must be > 0")));
    }
    let vol = pot.grid.cell_volume();
    let z: f64 = pot.phi.iter().map(|p| (-p).exp()).sum::<f64>() * vol;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!(
            "integral of exp(-phi) is {z}; no normalizable particle profile"
        )));
    }
    let c = mass_eta / z;
    Ok((pot.phi.iter().map(|p| c * (-p).exp()).collect(), c))
}

fn rho_profile<'a>(
    pot: &'a PotentialField,
    params: &'a PhysParams,
    c: f64,
) -> impl Iterator<Item = f64> + 'a {
    let k = (params.gamma - 1.0) / (params.a * params.gamma);
    let e = 1.0 / (params.gamma - 1.0);
    pot.phi.iter().map(move |p| {
        let s = c - params.beta * p;
        if s > 0.0 {
            (k * s).powf(e)
        } else {
            0.0
        }
    })
}

fn rho_mass(pot: &PotentialField, params: &PhysParams, c: f64) -> f64 {
    rho_profile(pot, params, c).sum::<f64>() * pot.grid.cell_volume()
}

/// `rho_s = ((gamma-1)/(a gamma) [C - beta phi]^+)^{1/(gamma-1)}` with `C`
/// fixed by the mass. The artificial-pressure weight is ignored: these are
/// the profiles of the physical pressure law.
pub fn solve_rho_s(
    pot: &PotentialField,
    params: &PhysParams,
    mass_rho: f64,
) -> Result<(Vec<f64>, f64)> {
    solve_rho_s_from(pot, params, mass_rho, 1.0)
}

/// As [`solve_rho_s`], starting bisection from the bracket
/// `[min beta phi, min beta phi + width]` (expanded by doubling as needed).
pub fn solve_rho_s_from(
    pot: &PotentialField,
    params: &PhysParams,
    mass_rho: f64,
    width: f64,
) -> Result<(Vec<f64>, f64)> {
    if !(mass_rho > 0.0 && mass_rho.is_finite()) {
        return Err(Error::Domain(format!("mass_rho = {mass_rho} must be > 0")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Domain(format!("bracket width {width} must be > 0")));
    }
    params.validate()?;
    let lo0 = pot
        .phi
        .iter()
        .map(|p| params.beta * p)
        .fold(f64::INFINITY, f64::min);
    let mut lo = lo0;
    let mut hi = lo0 + width;
    let mut expansions = 0;
    while rho_mass(pot, params, hi) < mass_rho {
        lo = hi;
        hi = lo0 + (hi - lo0) * 2.0;
        expansions += 1;
        if expansions > 200 || !hi.is_finite() {
            return Err(Error::RootFinding(format!(
                "could not bracket mass_rho = {mass_rho}: mass({hi:.3e}) = {:.3e} after {expansions} expansions",
                rho_mass(pot, params, hi)
            )));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rho_mass(pot, params, mid) < mass_rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let got = rho_mass(pot, params, c);
    if (got - mass_rho).abs() > MASS_TOL * mass_rho {
        return Err(Error::RootFinding(format!(
            "bisection stalled at C = {c:.17e} with mass {got:.17e} (target {mass_rho:.17e})"
        )));
    }
    Ok((rho_profile(pot, params, c).collect(), c))
}

pub fn solve_stationary(
    pot: &PotentialField,
    params: &PhysParams,
    mass_rho: f64,
    mass_eta: f64,
) -> Result<StationaryState> {
    let (rho_s, c_rho) = solve_rho_s(pot, params, mass_rho)?;
    let (eta_s, c_eta) = solve_eta_s(pot, mass_eta)?;
    Ok(StationaryState {
        rho_s,
        eta_s,
        c_rho,
        c_eta,
        mass_rho_target: mass_rho,
        mass_eta_target: mass_eta,
    })
}

/// Max-norm residuals of the stationary equations on interior faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryResidual {
    /// `|D p(rho_s) + beta rho_face D phi|`, faces touching vacuum excluded.
    pub rho: f64,
    /// `|D eta_s + eta_face D phi|`.
    pub eta: f64,
    /// Largest exponentially fitted particle flux at rest.
    pub eta_flux: f64,
}

pub fn stationary_residual(
    st: &StationaryState,
    pot: &PotentialField,
    params: &PhysParams,
) -> Result<StationaryResidual> {
    let g = &pot.grid;
    g.check_len(st.rho_s.len(), "rho_s")?;
    g.check_len(st.eta_s.len(), "eta_s")?;
    let p0 = params.with_delta(0.0);
    let mut r = StationaryResidual {
        rho: 0.0,
        eta: 0.0,
        eta_flux: 0.0,
    };
    for axis in 0..g.dim() {
        let dx = g.spacing(axis);
        for f in g.faces(axis) {
            let (l, rr) = (f.left, f.right);
            let dphi = (pot.phi[rr] - pot.phi[l]) / dx;
            if st.rho_s[l] > 0.0 && st.rho_s[rr] > 0.0 {
                let dp =
                    (p0.pressure_unchecked(st.rho_s[rr]) - p0.pressure_unchecked(st.rho_s[l])) / dx;
                let rf = 0.5 * (st.rho_s[l] + st.rho_s[rr]);
                r.rho = r.rho.max((dp + params.beta * rf * dphi).abs());
            }
            let de = (st.eta_s[rr] - st.eta_s[l]) / dx;
            let ef = 0.5 * (st.eta_s[l] + st.eta_s[rr]);
            r.eta = r.eta.max((de + ef * dphi).abs());
        }
    }
    let j = particle_flux(&st.eta_s, &vec![[0.0; 2]; g.len()], pot);
    r.eta_flux = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(r)
}

/// Implementation constants of the confinement checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfinementOptions {
    pub levels: usize,
    /// Outer shell `|x| >= (1 - shell) * radius` used for the tail check.
    pub tail_shell: f64,
    pub tail_threshold: f64,
    /// Growth constants are fitted on `|x| > radius_fraction * radius`.
    pub radius_fraction: f64,
}

impl Default for ConfinementOptions {
    fn default() -> Self {
        ConfinementOptions {
            levels: 16,
            tail_shell: 0.1,
            tail_threshold: 0.05,
            radius_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub applicable: bool,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub c1: f64,
    pub c2: f64,
    pub r: f64,
    pub cells: usize,
    /// Smallest potential value on the fitting region.
    pub min_phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfinementReport {
    pub passed: bool,
    pub boundary: Boundary,
    pub checks: Vec<Check>,
    /// `(threshold, number of components of {phi < threshold})`.
    pub levels: Vec<(f64, usize)>,
    pub tail_fraction: Option<f64>,
    pub growth: Option<GrowthFit>,
    pub notes: Vec<String>,
}

impl ConfinementReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Human-readable block followed by a `key = value` section.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "confinement report ({})", self.boundary.as_str());
        let _ = writeln!(s, "overall: {}", if self.passed { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let state = match (c.applicable, c.passed) {
                (false, _) => "skip",
                (true, true) => "pass",
                (true, false) => "FAIL",
            };
            let _ = writeln!(s, "  [{state}] {}: {}", c.name, c.detail);
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        let _ = writeln!(s, "\n[values]");
        let _ = writeln!(s, "passed = {}", self.passed);
        let _ = writeln!(s, "boundary = {}", self.boundary.as_str());
        for c in &self.checks {
            let v = if !c.applicable {
                "skipped"
            } else if c.passed {
                "pass"
            } else {
                "fail"
            };
            let _ = writeln!(s, "check.{} = {v}", c.name);
        }
        for (i, (k, n)) in self.levels.iter().enumerate() {
            let _ = writeln!(s, "level.{i}.threshold = {k:.16e}");
            let _ = writeln!(s, "level.{i}.components = {n}");
        }
        if let Some(t) = self.tail_fraction {
            let _ = writeln!(s, "tail_fraction = {t:.16e}");
        }
        if let Some(g) = &self.growth {
            let _ = writeln!(s, "growth.c1 = {:.16e}", g.c1);
            let _ = writeln!(s, "growth.c2 = {:.16e}", g.c2);
            let _ = writeln!(s, "growth.R = {:.16e}", g.r);
            let _ = writeln!(s, "growth.cells = {}", g.cells);
            let _ = writeln!(s, "growth.min_phi = {:.16e}", g.min_phi);
        }
        s
    }
}

/// Number of face-connected components of the cells where `mask` holds.
pub fn count_components(grid: &Grid, mask: &[bool]) -> usize {
    let mut seen = vec![false; grid.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..grid.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            for axis in 0..grid.dim() {
                for step in [-1, 1] {
                    if let Some(n) = grid.neighbor(c, axis, step) {
                        if mask[n] && !seen[n] {
                            seen[n] = true;
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
    }
    count
}

pub fn validate_confinement(pot: &PotentialField, params: &PhysParams) -> ConfinementReport {
    validate_confinement_with(pot, params, &ConfinementOptions::default())
}

pub fn validate_confinement_with(
    pot: &PotentialField,
    params: &PhysParams,
    opts: &ConfinementOptions,
) -> ConfinementReport {
    let g = &pot.grid;
    let unbounded = pot.boundary == Boundary::TruncatedUnbounded;
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let (min, max) = (pot.min(), pot.max());

    let finite = pot.phi.iter().all(|p| p.is_finite());
    checks.push(Check {
        name: "normalization",
        applicable: true,
        passed: finite && min >= 0.0,
        detail: format!("min phi = {min:.6e}, max phi = {max:.6e}"),
    });

    let mut levels = Vec::with_capacity(opts.levels);
    let mut split = Vec::new();
    for j in 0..opts.levels {
        let k = min + (j as f64 + 0.5) / opts.levels as f64 * (max - min);
        let mask: Vec<bool> = pot.phi.iter().map(|&p| p < k).collect();
        let n = count_components(g, &mask);
        if n > 1 {
            split.push(k);
        }
        levels.push((k, n));
    }
    checks.push(Check {
        name: "connectivity",
        applicable: true,
        passed: split.is_empty(),
        detail: if split.is_empty() {
            format!("all {} sub-level sets connected", opts.levels)
        } else {
            format!(
                "disconnected sub-level sets at k = {}",
                split
                    .iter()
                    .map(|k| format!("{k:.4}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        },
    });

    let radius = g.radius();
    let vol = g.cell_volume();
    let total: f64 = pot.phi.iter().map(|p| (-0.5 * p).exp()).sum::<f64>() * vol;
    let shell_r = (1.0 - opts.tail_shell) * radius;
    let shell: f64 = (0..g.len())
        .filter(|&c| norm(g.cell_center(c), g.dim()) >= shell_r)
        .map(|c| (-0.5 * pot.phi[c]).exp())
        .sum::<f64>()
        * vol;
    let tail_fraction = shell / total;
    checks.push(Check {
        name: "tail_decay",
        applicable: unbounded,
        passed: tail_fraction < opts.tail_threshold,
        detail: format!(
            "int exp(-phi/2) = {total:.6e}; shell |x| >= {shell_r:.4} holds {:.3}% (limit {:.1}%)",
            100.0 * tail_fraction,
            100.0 * opts.tail_threshold
        ),
    });

    let growth = fit_growth(pot, opts.radius_fraction * radius);
    let growth_ok =
        growth.cells > 0 && growth.min_phi > 0.0 && growth.c1.is_finite() && growth.c2.is_finite();
    checks.push(Check {
        name: "growth",
        applicable: unbounded,
        passed: growth_ok,
        detail: format!(
            "|lap phi| <= c1 |grad phi| <= c2 phi on |x| > R = {:.4}: c1 = {:.4e}, c2 = {:.4e} over {} cells, min phi = {:.3e}",
            growth.r, growth.c1, growth.c2, growth.cells, growth.min_phi
        ),
    });

    checks.push(Check {
        name: "beta_positive",
        applicable: unbounded,
        passed: params.beta > 0.0,
        detail: format!("beta = {}", params.beta),
    });

    if !unbounded {
        notes.push("bounded domain: tail, growth and beta checks do not apply".into());
    }
    let passed = checks.iter().all(|c| !c.applicable || c.passed);
    ConfinementReport {
        passed,
        boundary: pot.boundary,
        checks,
        levels,
        tail_fraction: Some(tail_fraction),
        growth: Some(growth),
        notes,
    }
}

fn fit_growth(pot: &PotentialField, r: f64) -> GrowthFit {
    let g = &pot.grid;
    let dx_min = (0..g.dim())
        .map(|a| g.spacing(a))
        .fold(f64::INFINITY, f64::min);
    // discrete Laplacians of affine samples are roundoff, not curvature
    let lap_zero = 64.0 * f64::EPSILON * (1.0 + pot.max()) / (dx_min * dx_min);
    let mut fit = GrowthFit {
        c1: 0.0,
        c2: 0.0,
        r,
        cells: 0,
        min_phi: f64::INFINITY,
    };
    let mut ratios = Vec::new();
    for c in 0..g.len() {
        if norm(g.cell_center(c), g.dim()) <= r {
            continue;
        }
        fit.cells += 1;
        let grad = norm(pot.cell_gradient(c), g.dim());
        let lap = pot.lap_phi[c].abs();
        let phi = pot.phi[c];
        fit.min_phi = fit.min_phi.min(phi);
        let c1 = if lap <= lap_zero {
            0.0
        } else if grad > 0.0 {
            lap / grad
        } else {
            f64::INFINITY
        };
        fit.c1 = fit.c1.max(c1);
        ratios.push((grad, phi));
    }
    for (grad, phi) in ratios {
        let need = fit.c1 * grad;
        let c2 = if need == 0.0 {
            0.0
        } else if phi > 0.0 {
            need / phi
        } else {
            f64::INFINITY
        };
        fit.c2 = fit.c2.max(c2);
    }
    if fit.cells == 0 {
        fit.min_phi = f64::NAN;
    }
    fit
}
