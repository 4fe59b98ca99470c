//! Builds grids, potentials and initial states from a [`RunConfig`], and
//! holds the shipped presets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_config, InitialSpec, PotentialSpec, RunConfig};
use crate::error::{Error, Result};
use crate::model::{Grid, PotentialField, SimState};
use crate::stationary::solve_stationary;

/// Preset names, in the order they are listed by the CLI.
pub const PRESETS: [&str; 3] = ["column_1d", "halfline_1d", "double_well_1d"];

/// Text of a shipped preset.
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "column_1d" => Some(include_str!("../presets/column_1d.cfg")),
        "halfline_1d" => Some(include_str!("../presets/halfline_1d.cfg")),
        "double_well_1d" => Some(include_str!("../presets/double_well_1d.cfg")),
        _ => None,
    }
}

pub fn preset_config(name: &str) -> Result<RunConfig> {
    let text = preset(name).ok_or_else(|| {
        Error::Usage(format!(
            "unknown preset `{name}` (available: {})",
            PRESETS.join(", ")
        ))
    })?;
    parse_config(text)
}

/// Everything a run needs, built from one configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: RunConfig,
    pub grid: Grid,
    pub potential: PotentialField,
    pub initial: SimState,
}

impl Scenario {
    pub fn new(config: RunConfig) -> Result<Self> {
        let grid = config.grid.build()?;
        let potential = build_potential(&config, &grid)?;
        let initial = initial_state(&config, &potential)?;
        Ok(Scenario {
            config,
            grid,
            potential,
            initial,
        })
    }

    /// Masses of the initial state, the targets of the stationary solve.
    pub fn masses(&self) -> (f64, f64) {
        self.initial.masses()
    }
}

pub fn build_potential(cfg: &RunConfig, grid: &Grid) -> Result<PotentialField> {
    let dim = grid.dim();
    let b = cfg.boundary;
    match &cfg.potential {
        PotentialSpec::Linear { g } => PotentialField::from_fn(grid.clone(), b, |x| g * x[dim - 1]),
        PotentialSpec::Quadratic { k, center } => PotentialField::from_fn(grid.clone(), b, |x| {
            0.5 * k * (0..dim).map(|a| (x[a] - center[a]).powi(2)).sum::<f64>()
        }),
        PotentialSpec::DoubleWell { scale } => {
            let mid = 0.5 * (grid.lo(0) + grid.hi(0));
            let quarter = 0.25 * (grid.hi(0) - grid.lo(0));
            PotentialField::from_fn(grid.clone(), b, |x| {
                let s = (x[0] - mid) / quarter;
                scale * (s * s - 1.0).powi(2)
            })
        }
        PotentialSpec::Tabulated { values, .. } => {
            PotentialField::new(grid.clone(), values.clone(), b)
        }
    }
}

/// `1 + amplitude * xi` with `xi` a seeded sum of cosine modes satisfying
/// `|xi| <= 1`; each mode is compatible with the no-flux walls.
fn perturbation(grid: &Grid, amplitude: f64, modes: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dim = grid.dim();
    let terms: Vec<(f64, [usize; 2])> = (0..modes)
        .map(|m| {
            let mut k = [0usize; 2];
            k[0] = m + 1;
            if dim == 2 {
                k[1] = rng.gen_range(0..=modes);
            }
            (rng.gen_range(-1.0..1.0) / modes as f64, k)
        })
        .collect();
    (0..grid.len())
        .map(|c| {
            let x = grid.cell_center(c);
            let xi: f64 = terms
                .iter()
                .map(|(w, k)| {
                    (0..dim)
                        .map(|a| {
                            let s = (x[a] - grid.lo(a)) / (grid.hi(a) - grid.lo(a));
                            (k[a] as f64 * std::f64::consts::PI * s).cos()
                        })
                        .product::<f64>()
                        * w
                })
                .sum();
            1.0 + amplitude * xi
        })
        .collect()
}

fn rescale(v: &mut [f64], vol: f64, mass: f64) {
    let m: f64 = v.iter().sum::<f64>() * vol;
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x *= mass / m);
    }
}

/// Width-3 box filter along every axis; a missing wall neighbor is replaced
/// by the cell itself, which keeps the total mass.
pub fn box_smooth(grid: &Grid, v: &[f64]) -> Vec<f64> {
    let mut cur = v.to_vec();
    for axis in 0..grid.dim() {
        cur = (0..grid.len())
            .map(|c| {
                let l = grid.neighbor(c, axis, -1).unwrap_or(c);
                let r = grid.neighbor(c, axis, 1).unwrap_or(c);
                (cur[l] + cur[c] + cur[r]) / 3.0
            })
            .collect();
    }
    cur
}

pub fn initial_state(cfg: &RunConfig, pot: &PotentialField) -> Result<SimState> {
    let grid = &pot.grid;
    let n = grid.len();
    let vol = grid.cell_volume();
    let mut s = match &cfg.initial {
        InitialSpec::Uniform { rho0, eta0 } => {
            SimState::at_rest(grid.clone(), vec![*rho0; n], vec![*eta0; n])?
        }
        InitialSpec::Equilibrium { mass_rho, mass_eta } => {
            solve_stationary(pot, &cfg.params, *mass_rho, *mass_eta)?.to_state(grid)?
        }
        InitialSpec::PerturbedEquilibrium {
            mass_rho,
            mass_eta,
            amplitude,
            modes,
            seed,
        } => {
            let st = solve_stationary(pot, &cfg.params, *mass_rho, *mass_eta)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let pr = perturbation(grid, *amplitude, *modes, &mut rng);
            let pe = perturbation(grid, *amplitude, *modes, &mut rng);
            let mut rho: Vec<f64> = st.rho_s.iter().zip(&pr).map(|(r, p)| r * p).collect();
            let mut eta: Vec<f64> = st.eta_s.iter().zip(&pe).map(|(e, p)| e * p).collect();
            rescale(&mut rho, vol, *mass_rho);
            rescale(&mut eta, vol, *mass_eta);
            SimState::at_rest(grid.clone(), rho, eta)?
        }
        InitialSpec::Tabulated { fields, .. } => {
            let momentum = fields
                .rho
                .iter()
                .zip(&fields.velocity)
                .map(|(r, u)| [r * u[0], r * u[1]])
                .collect();
            SimState::new(
                grid.clone(),
                fields.rho.clone(),
                momentum,
                fields.eta.clone(),
                0.0,
            )?
        }
    };
    if cfg.smooth {
        s.rho = box_smooth(grid, &s.rho);
        s.eta = box_smooth(grid, &s.eta);
        for k in 0..grid.dim() {
            let comp: Vec<f64> = s.momentum.iter().map(|v| v[k]).collect();
            let sm = box_smooth(grid, &comp);
            s.momentum.iter_mut().zip(sm).for_each(|(v, x)| v[k] = x);
        }
        s.clear_vacuum_momentum();
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_build() {
        for name in PRESETS {
            let sc = Scenario::new(preset_config(name).unwrap()).unwrap();
            assert_eq!(sc.grid.len(), sc.initial.rho.len());
            assert!(sc.initial.rho.iter().all(|r| *r >= 0.0), "{name}");
        }
        assert!(preset_config("nope").is_err());
    }

    #[test]
    fn perturbed_equilibrium_keeps_masses_and_is_seeded() {
        let cfg = preset_config("column_1d").unwrap();
        let a = Scenario::new(cfg.clone()).unwrap();
        let b = Scenario::new(cfg.clone()).unwrap();
        assert_eq!(a.initial, b.initial);
        let (mr, me) = a.masses();
        assert!((mr - 1.0).abs() < 1e-14 && (me - 1.0).abs() < 1e-14);
        let mut other = cfg;
        if let InitialSpec::PerturbedEquilibrium { seed, .. } = &mut other.initial {
            *seed += 1;
        }
        assert_ne!(Scenario::new(other).unwrap().initial.rho, a.initial.rho);
    }

    #[test]
    fn box_smoothing_keeps_mass_and_constants() {
        let g = Grid::new(&[0.0, 0.0], &[1.0, 1.0], &[5, 6]).unwrap();
        let v: Vec<f64> = (0..30).map(|c| ((c * 7) % 5) as f64).collect();
        let s = box_smooth(&g, &v);
        let (a, b): (f64, f64) = (v.iter().sum(), s.iter().sum());
        assert!((a - b).abs() < 1e-12);
        assert_eq!(box_smooth(&g, &[2.0; 30]), vec![2.0; 30]);
    }

    #[test]
    fn double_well_has_two_minima() {
        let cfg = preset_config("double_well_1d").unwrap();
        let g = cfg.grid.build().unwrap();
        let pot = build_potential(&cfg, &g).unwrap();
        let n = g.len();
        let mid = pot.phi[n / 2];
        assert!(pot.phi[n / 4] < 0.01 * mid && pot.phi[3 * n / 4] < 0.01 * mid);
    }
}
