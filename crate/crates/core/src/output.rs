//! CSV and text writers. Numbers are printed with 17 significant digits so
//! that every value parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::AsymptoticsReport;
use crate::error::{Error, Result};
use crate::model::{EnergyLedger, Grid, SimState};
use crate::stationary::{StationaryResidual, StationaryState};

pub const LEDGER_HEADER: &str = "time,mass_rho,mass_eta,E_total,E_kinetic,E_pressure,E_entropy,E_potential,dissipation,ineq_margin";
pub const ASYMPTOTICS_HEADER: &str = "time,dist_rho_Lgamma,kinetic_sup,dist_eta_L1,dist_eta_L2";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}

const AXES: [&str; 2] = ["x", "y"];
const VEL: [&str; 2] = ["u", "v"];

pub fn ledger_csv(ledger: &EnergyLedger) -> String {
    let mut s = String::from(LEDGER_HEADER);
    s.push('\n');
    for r in &ledger.rows {
        let e = &r.energy;
        s += &row(&[
            r.time,
            r.mass_rho,
            r.mass_eta,
            e.total,
            e.kinetic,
            e.pressure,
            e.entropy,
            e.potential,
            r.dissipation.total,
            r.ineq_margin,
        ]);
        s.push('\n');
    }
    s
}

/// `cell_center..., rho, u..., eta`, one row per cell.
pub fn fields_csv(state: &SimState) -> String {
    let g = &state.grid;
    let dim = g.dim();
    let mut cols: Vec<&str> = AXES[..dim].to_vec();
    cols.push("rho");
    cols.extend(&VEL[..dim]);
    cols.push("eta");
    let mut s = cols.join(",");
    s.push('\n');
    let u = state.velocity();
    for c in 0..g.len() {
        let x = g.cell_center(c);
        let mut v: Vec<f64> = x[..dim].to_vec();
        v.push(state.rho[c]);
        v.extend(&u[c][..dim]);
        v.push(state.eta[c]);
        s += &row(&v);
        s.push('\n');
    }
    s
}

/// `cell_center..., rho_s, eta_s`.
pub fn stationary_csv(grid: &Grid, st: &StationaryState) -> String {
    let dim = grid.dim();
    let mut s = AXES[..dim].join(",");
    s += ",rho_s,eta_s\n";
    for c in 0..grid.len() {
        let x = grid.cell_center(c);
        let mut v: Vec<f64> = x[..dim].to_vec();
        v.push(st.rho_s[c]);
        v.push(st.eta_s[c]);
        s += &row(&v);
        s.push('\n');
    }
    s
}

pub fn stationary_report(st: &StationaryState, res: &StationaryResidual) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[constants]");
    let _ = writeln!(s, "c_rho = {}", num(st.c_rho));
    let _ = writeln!(s, "c_eta = {}", num(st.c_eta));
    let _ = writeln!(s, "mass_rho = {}", num(st.mass_rho_target));
    let _ = writeln!(s, "mass_eta = {}", num(st.mass_eta_target));
    let _ = writeln!(s, "\n[residuals]");
    let _ = writeln!(s, "rho = {}", num(res.rho));
    let _ = writeln!(s, "eta = {}", num(res.eta));
    let _ = writeln!(s, "eta_flux = {}", num(res.eta_flux));
    s
}

pub fn asymptotics_csv(rep: &AsymptoticsReport) -> String {
    let mut s = String::from(ASYMPTOTICS_HEADER);
    s.push('\n');
    for i in 0..rep.times.len() {
        s += &row(&[
            rep.times[i],
            rep.dist_rho_lgamma[i],
            rep.kinetic_sup[i],
            rep.dist_eta_l1[i],
            rep.dist_eta_l2[i],
        ]);
        s.push('\n');
    }
    s
}

/// Creates `dir` unless it exists. Its parent must already exist.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        return Ok(());
    }
    std::fs::create_dir(dir).map_err(|e| Error::io(dir, e))
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, contents).map_err(|e| Error::io(p, e))
}
