//! Backward-Euler time stepping by Picard iteration on the per-step
//! fixed-point map, with energy-based acceptance and step halving.

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::model::{
    dissipation, total_energy, EnergyLedger, Grid, LedgerRow, PhysParams, PotentialField, SimState,
};
use crate::spatial::{
    cell_forces, divergence, divergence_vec, face_forces_locked, face_velocities, mass_flux_locked,
    momentum_flux, particle_flux_coeffs, particle_flux_with_face_velocity, viscous_stencil,
    DonorLock, FaceField,
};

/// Picard sweeps after which a face whose upwind side keeps switching gets
/// its donor pinned for the rest of the step.
const LOCK_AFTER: usize = 4;

/// Halvings tried on a rejected step before the run aborts.
pub const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct StepConfig {
    pub h: f64,
    /// Relative L2 change between Picard iterates that counts as converged.
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Relative max-norm residual required of every linear solve.
    pub linear_tol: f64,
    /// Allowed energy-inequality violation per step, relative to `|E^0|`.
    pub energy_slack: f64,
    /// Artificial-pressure weights for continuation runs, strictly
    /// decreasing.
    pub delta_schedule: Vec<f64>,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            h: 1e-3,
            picard_tol: 1e-11,
            picard_max: 60,
            linear_tol: 1e-13,
            energy_slack: 1e-10,
            delta_schedule: Vec::new(),
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h = {} violates h > 0", self.h));
        }
        if !(self.picard_tol > 0.0) {
            return bad(format!(
                "picard_tol = {} violates picard_tol > 0",
                self.picard_tol
            ));
        }
        if self.picard_max < 1 {
            return bad("picard_max must be at least 1".into());
        }
        if !(self.linear_tol > 0.0) {
            return bad(format!(
                "linear_tol = {} violates linear_tol > 0",
                self.linear_tol
            ));
        }
        if !(self.energy_slack >= 0.0) {
            return bad(format!(
                "energy_slack = {} violates energy_slack >= 0",
                self.energy_slack
            ));
        }
        let s = &self.delta_schedule;
        if s.iter().any(|d| !(*d >= 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!(
                "delta_schedule {s:?} must be nonnegative and strictly decreasing"
            ));
        }
        Ok(())
    }

    pub fn with_h(&self, h: f64) -> Self {
        StepConfig { h, ..self.clone() }
    }
}

/// Outcome of one attempted implicit step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub accepted: bool,
    pub picard_iters: usize,
    /// Final relative change of `(rho, m, eta)` between Picard iterates.
    pub residuals: [f64; 3],
    pub energy_before: f64,
    pub energy_after: f64,
    /// `h` times the dissipation of the new state.
    pub dissipated: f64,
    pub inequality_ok: bool,
    pub h: f64,
    pub message: Option<String>,
    /// Faces whose upwind donor was pinned during the Picard iteration.
    pub locked: Vec<LockedFace>,
}

/// Interior face `face` along `axis` whose donor is fixed to cell `donor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LockedFace {
    pub axis: usize,
    pub face: usize,
    pub donor: usize,
}

fn donor_lock(g: &Grid, locked: &[LockedFace]) -> Result<DonorLock> {
    let mut lock: DonorLock = [
        vec![0; g.n_faces(0)],
        vec![0; if g.dim() > 1 { g.n_faces(1) } else { 0 }],
    ];
    for l in locked {
        let f = (l.axis < g.dim())
            .then(|| g.faces(l.axis).nth(l.face))
            .flatten()
            .ok_or_else(|| Error::Usage(format!("no face {} along axis {}", l.face, l.axis)))?;
        lock[l.axis][l.face] = if l.donor == f.left {
            -1
        } else if l.donor == f.right {
            1
        } else {
            return Err(Error::Usage(format!(
                "cell {} is not beside face {}",
                l.donor, l.face
            )));
        };
    }
    Ok(lock)
}

/// One application of the fixed-point map to the iterate `guess`:
///
/// 1. the particle equation, linear once the transport velocity is frozen
///    at the guess;
/// 2. continuity with the frozen face velocity;
/// 3. momentum, linear in the new velocity, with the density and particle
///    density of steps 1-2 in the pressure and body forces.
pub fn fixed_point_map(
    guess: &SimState,
    prev: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
    cfg: &StepConfig,
) -> Result<SimState> {
    let lock = donor_lock(&prev.grid, &[])?;
    fixed_point_map_locked(guess, prev, pot, params, cfg, &lock)
}

fn fixed_point_map_locked(
    guess: &SimState,
    prev: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
    cfg: &StepConfig,
    lock: &DonorLock,
) -> Result<SimState> {
    let g = &prev.grid;
    g.check_same(&guess.grid, "guess")?;
    g.check_same(&pot.grid, "potential")?;
    let h = cfg.h;
    if !(h > 0.0) {
        return Err(Error::Domain(format!("h = {h} violates h > 0")));
    }
    let z = guess.velocity();
    let zf = face_velocities(g, &z);
    let eta = solve_eta(g, &prev.eta, &zf, pot, h, cfg.linear_tol)?;
    let rho = solve_rho(g, &prev.rho, &zf, lock, h, cfg.linear_tol)?;
    let floor = prev.vacuum_floor();
    let u = solve_momentum(
        g,
        prev,
        &rho,
        &eta,
        &zf,
        lock,
        pot,
        params,
        h,
        floor,
        cfg.linear_tol,
    )?;
    let momentum = rho
        .iter()
        .zip(&u)
        .map(|(&r, v)| {
            if r > floor {
                [r * v[0], r * v[1]]
            } else {
                [0.0; 2]
            }
        })
        .collect();
    Ok(SimState {
        grid: g.clone(),
        rho,
        momentum,
        eta,
        time: prev.time + h,
    })
}

fn solve_eta(
    g: &Grid,
    eta0: &[f64],
    zf: &FaceField,
    pot: &PotentialField,
    h: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = g.len();
    let bw = if g.dim() == 1 { 1 } else { g.stride(1) };
    let mut a = BandMatrix::zeros(n, bw, bw);
    for c in 0..n {
        a.add(c, c, 1.0);
    }
    for axis in 0..g.dim() {
        let dx = g.spacing(axis);
        for (f, &uf) in g.faces(axis).zip(&zf[axis]) {
            let w = pot.phi[f.right] - pot.phi[f.left];
            let (cl, cr) = particle_flux_coeffs(w, uf, dx);
            let (cl, cr) = (h * cl / dx, h * cr / dx);
            a.add(f.left, f.left, cl);
            a.add(f.left, f.right, cr);
            a.add(f.right, f.left, -cl);
            a.add(f.right, f.right, -cr);
        }
    }
    let mut eta = a.solve(eta0, tol)?;
    // roundoff can leave -1e-300 where the exact M-matrix solution is >= 0
    eta.iter_mut().for_each(|e| *e = e.max(0.0));
    Ok(eta)
}

fn solve_rho(
    g: &Grid,
    rho0: &[f64],
    zf: &FaceField,
    lock: &DonorLock,
    h: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = g.len();
    let bw = if g.dim() == 1 { 1 } else { g.stride(1) };
    let mut a = BandMatrix::zeros(n, bw, bw);
    for c in 0..n {
        a.add(c, c, 1.0);
    }
    for axis in 0..g.dim() {
        let k = h / g.spacing(axis);
        for ((f, &uf), &lk) in g.faces(axis).zip(&zf[axis]).zip(&lock[axis]) {
            if uf == 0.0 {
                continue;
            }
            let d = match lk {
                -1 => f.left,
                1 => f.right,
                _ if uf > 0.0 => f.left,
                _ => f.right,
            };
            a.add(f.left, d, k * uf);
            a.add(f.right, d, -k * uf);
        }
    }
    let mut rho = a.solve(rho0, tol)?;
    rho.iter_mut().for_each(|r| *r = r.max(0.0));
    Ok(rho)
}

#[allow(clippy::too_many_arguments)]
fn solve_momentum(
    g: &Grid,
    prev: &SimState,
    rho: &[f64],
    eta: &[f64],
    zf: &FaceField,
    lock: &DonorLock,
    pot: &PotentialField,
    params: &PhysParams,
    h: f64,
    floor: f64,
    tol: f64,
) -> Result<Vec<[f64; 2]>> {
    let n = g.len();
    let dim = g.dim();
    let idx = |c: usize, k: usize| c * dim + k;
    let bw = if dim == 1 {
        1
    } else {
        dim * (g.stride(1) + 1) + 1
    };
    let mut a = BandMatrix::zeros(n * dim, bw, bw);
    let mut b = vec![0.0; n * dim];
    let vacuum: Vec<bool> = rho.iter().map(|&r| r <= floor).collect();
    let forces = cell_forces(
        g,
        &face_forces_locked(g, rho, eta, zf, pot, params, Some(lock)),
    );
    let mass = mass_flux_locked(g, rho, zf, Some(lock));
    for c in 0..n {
        for k in 0..dim {
            let i = idx(c, k);
            if vacuum[c] {
                a.add(i, i, 1.0);
            } else {
                a.add(i, i, rho[c]);
                b[i] = prev.momentum[c][k] - h * forces[c][k];
            }
        }
    }
    for axis in 0..dim {
        let k_ax = h / g.spacing(axis);
        for (f, &fm) in g.faces(axis).zip(&mass[axis]) {
            if fm == 0.0 {
                continue;
            }
            let d = if fm >= 0.0 { f.left } else { f.right };
            for k in 0..dim {
                if !vacuum[f.left] {
                    a.add(idx(f.left, k), idx(d, k), k_ax * fm);
                }
                if !vacuum[f.right] {
                    a.add(idx(f.right, k), idx(d, k), -k_ax * fm);
                }
            }
        }
    }
    viscous_stencil(g, params, |rc, rk, cc, ck, v| {
        if !vacuum[rc] {
            a.add(idx(rc, rk), idx(cc, ck), -h * v);
        }
    });
    let x = a.solve(&b, tol)?;
    Ok((0..n)
        .map(|c| {
            let mut v = [0.0; 2];
            for k in 0..dim {
                v[k] = if vacuum[c] { 0.0 } else { x[idx(c, k)] };
            }
            v
        })
        .collect())
}

fn l2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative L2 change between two iterates for `(rho, m, eta)`. The momentum
/// change is measured against `max(|m|, |rho| c)` with `c` the largest sound
/// speed, so that a fluid at rest does not divide by zero.
fn iterate_change(a: &SimState, b: &SimState, params: &PhysParams) -> [f64; 3] {
    let rel = |d: f64, s: f64| if s > 0.0 { d / s } else { d };
    let nr = l2(b.rho.iter().copied());
    let ne = l2(b.eta.iter().copied());
    let nm = l2(b.momentum.iter().flat_map(|m| m.iter().copied()));
    let c = b
        .rho
        .iter()
        .map(|&r| params.sound_speed_sq(r))
        .fold(0.0f64, f64::max)
        .sqrt();
    [
        rel(l2(a.rho.iter().zip(&b.rho).map(|(x, y)| x - y)), nr),
        rel(
            l2(a.momentum
                .iter()
                .zip(&b.momentum)
                .flat_map(|(x, y)| [x[0] - y[0], x[1] - y[1]])),
            nm.max(nr * c),
        ),
        rel(l2(a.eta.iter().zip(&b.eta).map(|(x, y)| x - y)), ne),
    ]
}

/// Residuals of the discrete equations at an accepted state, relative to
/// the same scales as the Picard change: `h |R_rho| / |rho|`,
/// `h |R_m| / max(|m|, |rho| c)` and `h |R_eta| / |eta|`. `locked` lists the
/// pinned donors of the step, see [`StepReport::locked`].
pub fn step_residuals(
    prev: &SimState,
    next: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
    h: f64,
    locked: &[LockedFace],
) -> Result<[f64; 3]> {
    let g = &prev.grid;
    g.check_same(&next.grid, "next state")?;
    let lock = donor_lock(g, locked)?;
    let u = next.velocity();
    let uf = face_velocities(g, &u);
    let mass = mass_flux_locked(g, &next.rho, &uf, Some(&lock));
    let div_rho = divergence(g, &mass);
    let div_eta = divergence(g, &particle_flux_with_face_velocity(g, &next.eta, &uf, pot));
    let conv = divergence_vec(g, &momentum_flux(g, &mass, &u));
    let forces = cell_forces(
        g,
        &face_forces_locked(g, &next.rho, &next.eta, &uf, pot, params, Some(&lock)),
    );
    let visc = crate::spatial::viscous_operator(g, &u, params);
    let floor = prev.vacuum_floor();
    let r_rho = l2((0..g.len()).map(|c| next.rho[c] - prev.rho[c] + h * div_rho[c]));
    let r_eta = l2((0..g.len()).map(|c| next.eta[c] - prev.eta[c] + h * div_eta[c]));
    let r_m = l2((0..g.len())
        .flat_map(|c| {
            let vac = next.rho[c] <= floor;
            (0..g.dim()).map(move |k| (c, k, vac))
        })
        .map(|(c, k, vac)| {
            if vac {
                0.0
            } else {
                next.momentum[c][k] - prev.momentum[c][k]
                    + h * (conv[c][k] - visc[c][k] + forces[c][k])
            }
        }));
    let nr = l2(next.rho.iter().copied());
    let ne = l2(next.eta.iter().copied());
    let nm = l2(next.momentum.iter().flat_map(|m| m.iter().copied()));
    let c = next
        .rho
        .iter()
        .map(|&r| params.sound_speed_sq(r))
        .fold(0.0f64, f64::max)
        .sqrt();
    let rel = |d: f64, s: f64| if s > 0.0 { d / s } else { d };
    Ok([rel(r_rho, nr), rel(r_m, nm.max(nr * c)), rel(r_eta, ne)])
}

/// Implicit step from `prev` with step size `cfg.h`, the energy slack taken
/// relative to the energy of `prev`.
pub fn implicit_step(
    prev: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
    cfg: &StepConfig,
) -> Result<(SimState, StepReport)> {
    let e0 = total_energy(prev, pot, params)?.total;
    implicit_step_with_slack(prev, pot, params, cfg, cfg.energy_slack * e0.abs())
}

fn implicit_step_with_slack(
    prev: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
    cfg: &StepConfig,
    slack: f64,
) -> Result<(SimState, StepReport)> {
    cfg.validate()?;
    prev.validate()?;
    let energy_before = total_energy(prev, pot, params)?.total;
    let mut report = StepReport {
        accepted: false,
        picard_iters: 0,
        residuals: [f64::INFINITY; 3],
        energy_before,
        energy_after: f64::NAN,
        dissipated: f64::NAN,
        inequality_ok: false,
        h: cfg.h,
        message: None,
        locked: Vec::new(),
    };
    let mut guess = prev.clone();
    guess.time = prev.time + cfg.h;
    let g = &prev.grid;
    let mut lock = donor_lock(g, &[])?;
    let mut signs = face_signs(&guess);
    let mut converged = false;
    for it in 1..=cfg.picard_max {
        let next = match fixed_point_map_locked(&guess, prev, pot, params, cfg, &lock) {
            Ok(s) => s,
            Err(e) => {
                report.picard_iters = it;
                report.message = Some(e.to_string());
                return Ok((guess, report));
            }
        };
        let change = iterate_change(&next, &guess, params);
        report.picard_iters = it;
        report.residuals = change;
        let next_signs = face_signs(&next);
        if it >= LOCK_AFTER {
            // a face whose upwind side flips between sweeps makes the map
            // discontinuous there; pin it to the thinner side
            for axis in 0..g.dim() {
                for (i, f) in g.faces(axis).enumerate() {
                    if lock[axis][i] == 0 && next_signs[axis][i] * signs[axis][i] < 0 {
                        lock[axis][i] = if next.rho[f.left] <= next.rho[f.right] {
                            -1
                        } else {
                            1
                        };
                    }
                }
            }
        }
        signs = next_signs;
        guess = next;
        if change.iter().any(|c| !c.is_finite()) {
            report.message = Some("Picard iterate is not finite".into());
            return Ok((guess, report));
        }
        if change.iter().all(|&c| c <= cfg.picard_tol) {
            converged = true;
            break;
        }
    }
    for axis in 0..g.dim() {
        for (i, f) in g.faces(axis).enumerate() {
            match lock[axis][i] {
                -1 => report.locked.push(LockedFace {
                    axis,
                    face: i,
                    donor: f.left,
                }),
                1 => report.locked.push(LockedFace {
                    axis,
                    face: i,
                    donor: f.right,
                }),
                _ => {}
            }
        }
    }
    let after = total_energy(&guess, pot, params)?.total;
    let d = dissipation(&guess, pot, params)?.total;
    report.energy_after = after;
    report.dissipated = cfg.h * d;
    report.inequality_ok = after + cfg.h * d <= energy_before + slack;
    if !converged {
        report.message = Some(format!(
            "Picard did not converge in {} sweeps (changes {:.2e}, {:.2e}, {:.2e})",
            cfg.picard_max, report.residuals[0], report.residuals[1], report.residuals[2]
        ));
    } else if !report.inequality_ok {
        report.message = Some(format!(
            "energy inequality violated by {:.3e} (slack {slack:.3e})",
            after + cfg.h * d - energy_before
        ));
    }
    report.accepted = converged && report.inequality_ok;
    Ok((guess, report))
}

fn face_signs(s: &SimState) -> [Vec<i8>; 2] {
    let zf = face_velocities(&s.grid, &s.velocity());
    let sign = |v: &Vec<f64>| {
        v.iter()
            .map(|x| {
                if *x > 0.0 {
                    1
                } else if *x < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect()
    };
    [sign(&zf[0]), sign(&zf[1])]
}

/// A run that stopped early, with everything computed up to that point.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub state: SimState,
    pub ledger: EnergyLedger,
    /// Reports of the rejected attempts of the failing step.
    pub rejected: Vec<StepReport>,
}

impl From<RunFailure> for Error {
    fn from(f: RunFailure) -> Error {
        f.error
    }
}

pub type RunResult = std::result::Result<(SimState, EnergyLedger), Box<RunFailure>>;

/// Advances to `t_end`, halving `h` on rejection. See [`run_observed`].
pub fn run(
    prev: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
    cfg: &StepConfig,
    t_end: f64,
) -> RunResult {
    run_observed(prev, pot, params, cfg, t_end, |_, _, _| {})
}

/// Advances to `t_end`. Every step starts at `cfg.h` (or the remaining time)
/// and is halved on rejection at most [`MAX_HALVINGS`] times before the run
/// aborts. `observe` sees each accepted state with its ledger row and report.
pub fn run_observed(
    prev: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
    cfg: &StepConfig,
    t_end: f64,
    mut observe: impl FnMut(&SimState, &LedgerRow, &StepReport),
) -> RunResult {
    let fail = |error: Error, state: &SimState, ledger: EnergyLedger| {
        Box::new(RunFailure {
            error,
            state: state.clone(),
            ledger,
            rejected: Vec::new(),
        })
    };
    let mut ledger = match EnergyLedger::start(prev, pot, params) {
        Ok(l) => l,
        Err(e) => return Err(fail(e, prev, EnergyLedger::default())),
    };
    if let Err(e) = cfg.validate() {
        return Err(fail(e, prev, ledger));
    }
    if !(t_end >= prev.time) {
        return Err(fail(
            Error::Domain(format!(
                "t_end = {t_end} precedes the start time {}",
                prev.time
            )),
            prev,
            ledger,
        ));
    }
    let slack = cfg.energy_slack * ledger.rows[0].energy.total.abs();
    let eps = 1e-12 * t_end.abs().max(1.0);
    let mut state = prev.clone();
    while state.time < t_end - eps {
        let mut h = cfg.h.min(t_end - state.time);
        let mut rejected = Vec::new();
        let mut halvings = 0;
        loop {
            let (next, report) =
                match implicit_step_with_slack(&state, pot, params, &cfg.with_h(h), slack) {
                    Ok(r) => r,
                    Err(e) => return Err(fail(e, &state, ledger)),
                };
            if report.accepted {
                let mut next = next;
                // snap the final step onto t_end exactly
                if (t_end - next.time).abs() <= eps {
                    next.time = t_end;
                }
                let row = match ledger.record(&next, pot, params, h) {
                    Ok(r) => *r,
                    Err(e) => return Err(fail(e, &state, ledger)),
                };
                observe(&next, &row, &report);
                state = next;
                break;
            }
            rejected.push(report);
            if halvings == MAX_HALVINGS {
                let last = rejected.last().and_then(|r| r.message.clone());
                let error = Error::StepAbort {
                    time: state.time,
                    message: format!(
                        "step {} rejected after {MAX_HALVINGS} halvings (h = {h:.3e}): {}",
                        ledger.len(),
                        last.unwrap_or_default()
                    ),
                };
                let mut f = fail(error, &state, ledger);
                f.rejected = rejected;
                return Err(f);
            }
            halvings += 1;
            h *= 0.5;
        }
    }
    Ok((state, ledger))
}

/// Result of one run of a continuation sweep.
#[derive(Debug, Clone)]
pub struct ContinuationRun {
    pub delta: f64,
    pub ledger: EnergyLedger,
    pub state: SimState,
    /// `int_0^T int rho^(gamma + theta) dx dt` with `theta = min(2 gamma/3 - 1, 1/4)`,
    /// by the rectangle rule at the accepted time levels.
    pub higher_integrability: f64,
}

/// Runs the full simulation once per artificial-pressure weight in
/// `cfg.delta_schedule`, each on its own thread.
pub fn delta_continuation(
    initial: &SimState,
    pot: &PotentialField,
    params: &PhysParams,
    cfg: &StepConfig,
    t_end: f64,
) -> Result<Vec<ContinuationRun>> {
    cfg.validate()?;
    if cfg.delta_schedule.is_empty() {
        return Err(Error::Domain("delta_schedule must not be empty".into()));
    }
    let exponent = params.gamma + params.theta();
    let vol = initial.grid.cell_volume();
    let results: Vec<std::result::Result<ContinuationRun, Error>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .delta_schedule
            .iter()
            .map(|&delta| {
                s.spawn(move || {
                    let p = params.with_delta(delta);
                    let mut integral = 0.0;
                    let (state, ledger) =
                        run_observed(initial, pot, &p, cfg, t_end, |st, row, _| {
                            integral +=
                                row.h * vol * st.rho.iter().map(|r| r.powf(exponent)).sum::<f64>();
                        })
                        .map_err(|f| f.error)?;
                    Ok(ContinuationRun {
                        delta,
                        ledger,
                        state,
                        higher_integrability: integral,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("continuation thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;

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

    #[test]
    fn two_cell_diffusion_solve_matches_hand_elimination() {
        // Mirror-symmetric data on four cells keeps e1 = e2, so the middle
        // face carries no flux and each half is the two-cell system
        //   (1 + k) x - k y = 3,  -k x + (1 + k) y = 1,  k = h / dx^2.
        let g = Grid::uniform_1d(0.0, 1.0, 4).unwrap();
        let pot = PotentialField::zero(g.clone(), Boundary::Bounded);
        let zf: FaceField = [vec![0.0; 3], vec![]];
        let e0 = [3.0, 1.0, 1.0, 3.0];
        for &h in &[0.01, 0.05, 1.0, 1e6] {
            let k = h / (0.25f64 * 0.25);
            let det = (1.0 + k) * (1.0 + k) - k * k;
            let x = (3.0 * (1.0 + k) + k) / det;
            let y = ((1.0 + k) + 3.0 * k) / det;
            let eta = solve_eta(&g, &e0, &zf, &pot, h, 1e-13).unwrap();
            let tol = 1e-13 * (1.0 + k);
            assert!(
                (eta[0] - x).abs() < tol && (eta[1] - y).abs() < tol,
                "{eta:?}"
            );
            assert!((eta.iter().sum::<f64>() - 8.0).abs() < 8.0 * tol);
            if h >= 1e6 {
                // large steps drive the solution to the mean
                assert!(eta.iter().all(|e| (e - 2.0).abs() < 1e-5), "{eta:?}");
            }
        }
    }

    #[test]
    fn zero_data_maps_to_zero() {
        let g = Grid::uniform_1d(0.0, 1.0, 6).unwrap();
        let pot = PotentialField::from_fn(g.clone(), Boundary::Bounded, |x| x[0]).unwrap();
        let z = SimState::zeros(g);
        let cfg = StepConfig::default();
        let out = fixed_point_map(&z, &z, &pot, &params(), &cfg).unwrap();
        assert!(out.rho.iter().chain(&out.eta).all(|&v| v == 0.0));
        assert!(out.momentum.iter().all(|m| m == &[0.0, 0.0]));
        let (_, rep) = implicit_step(&z, &pot, &params(), &cfg).unwrap();
        assert!(rep.accepted);
    }

    #[test]
    fn zero_step_is_rejected() {
        let g = Grid::uniform_1d(0.0, 1.0, 6).unwrap();
        let pot = PotentialField::zero(g.clone(), Boundary::Bounded);
        let s = SimState::at_rest(g, vec![1.0; 6], vec![1.0; 6]).unwrap();
        let cfg = StepConfig::default().with_h(0.0);
        assert!(matches!(
            implicit_step(&s, &pot, &params(), &cfg),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = StepConfig::default();
        assert!(c.validate().is_ok());
        c.delta_schedule = vec![1e-2, 1e-3, 0.0];
        assert!(c.validate().is_ok());
        c.delta_schedule = vec![1e-3, 1e-2];
        assert!(c.validate().is_err());
        let c = StepConfig {
            picard_max: 0,
            ..StepConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_interval_gives_initial_row_only() {
        let g = Grid::uniform_1d(0.0, 1.0, 6).unwrap();
        let pot = PotentialField::zero(g.clone(), Boundary::Bounded);
        let s = SimState::at_rest(g, vec![1.0; 6], vec![1.0; 6]).unwrap();
        let (out, ledger) = run(&s, &pot, &params(), &StepConfig::default(), 0.0).unwrap();
        assert_eq!(ledger.len(), 1);
        assert_eq!(out, s);
    }

    #[test]
    fn sloshing_fluid_loses_energy_and_keeps_mass() {
        let n = 32;
        let g = Grid::uniform_1d(0.0, 1.0, n).unwrap();
        let pot = PotentialField::from_fn(g.clone(), Boundary::Bounded, |x| x[0]).unwrap();
        let rho: Vec<f64> = (0..n)
            .map(|c| 1.0 + 0.3 * (std::f64::consts::PI * g.cell_center(c)[0]).cos())
            .collect();
        let m: Vec<[f64; 2]> = (0..n)
            .map(|c| {
                [
                    0.5 * (std::f64::consts::PI * g.cell_center(c)[0]).sin(),
                    0.0,
                ]
            })
            .collect();
        let eta = (0..n).map(|c| 1.0 + 0.5 * ((c % 3) as f64)).collect();
        let s = SimState::new(g, rho, m, eta, 0.0).unwrap();
        let cfg = StepConfig::default().with_h(5e-3);
        let (_, ledger) = run(&s, &pot, &params(), &cfg, 0.1).unwrap();
        assert_eq!(ledger.len(), 21);
        assert!(
            ledger.max_mass_drift() < 1e-13,
            "{}",
            ledger.max_mass_drift()
        );
        let slack = 1e-10 * ledger.rows[0].energy.total.abs();
        for r in &ledger.rows[1..] {
            assert!(r.ineq_margin >= -slack, "{r:?}");
        }
    }
}
