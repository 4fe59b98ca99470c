//! Command-line front end. Every verb writes whole files into the output
//! directory and maps its outcome to an exit code:
//! 0 success, 1 configuration or validation error, 2 step-controller abort
//! (or asymptotics not converged), 3 root-finder failure, 4 confinement
//! check failed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, parse_config_with, ConfigOverrides, RunConfig};
use crate::diagnostics::{
    asymptotics, energy_inequality_audit, entropy_bounds_check, AsymptoticsReport,
};
use crate::error::{Error, Result};
use crate::model::{EnergyLedger, SimState};
use crate::output::{self, num};
use crate::scenario::{preset, Scenario, PRESETS};
use crate::stationary::{solve_stationary, stationary_residual, validate_confinement_with};
use crate::stepper::{delta_continuation, run_observed, RunFailure, StepReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_STEP_ABORT: i32 = 2;
pub const EXIT_ROOT_FINDING: i32 = 3;
pub const EXIT_CONFINEMENT: i32 = 4;
/// Shares the code of a step abort: the run finished but did not settle.
pub const EXIT_NOT_CONVERGED: i32 = EXIT_STEP_ABORT;

#[derive(Debug, Parser)]
#[command(
    name = "bubbleflow",
    version,
    about = "Fluid-particle flow simulator and stationary-state toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Configuration file.
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "preset",
        required_unless_present = "preset"
    )]
    pub config: Option<PathBuf>,
    /// Shipped preset instead of a configuration file.
    #[arg(long, value_name = "NAME", value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    pub preset: Option<String>,
    /// Output directory (overrides `output.dir`). Its parent must exist.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for randomized initial conditions (overrides `initial.seed`).
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Suppress progress messages.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the time stepper and write the ledger, snapshots and audit.
    Simulate(Common),
    /// Solve for the stationary profiles with the initial masses.
    Stationary(Common),
    /// Check the potential against the confinement conditions.
    ValidatePotential(Common),
    /// Simulate and measure the distance to the stationary state over time.
    Asymptotics(Common),
    /// Repeat the run for each artificial-pressure weight in `params.delta_schedule`.
    SweepDelta(Common),
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    execute(&cli.command)
}

pub fn execute(cmd: &Command) -> i32 {
    let (common, f): (&Common, fn(&Scenario, &Path, bool) -> Result<i32>) = match cmd {
        Command::Simulate(c) => (c, cmd_simulate),
        Command::Stationary(c) => (c, cmd_stationary),
        Command::ValidatePotential(c) => (c, cmd_validate_potential),
        Command::Asymptotics(c) => (c, cmd_asymptotics),
        Command::SweepDelta(c) => (c, cmd_sweep_delta),
    };
    let result = load(common).and_then(|cfg| {
        let out = cfg.output_dir.clone();
        let sc = Scenario::new(cfg)?;
        output::ensure_dir(&out)?;
        f(&sc, &out, common.quiet)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(c: &Common) -> Result<RunConfig> {
    let ov = ConfigOverrides {
        seed: c.seed,
        output_dir: c.out.clone(),
    };
    match (&c.config, &c.preset) {
        (Some(path), _) => load_config(path, &ov),
        (None, Some(name)) => {
            let text =
                preset(name).ok_or_else(|| Error::Usage(format!("unknown preset `{name}`")))?;
            parse_config_with(text, Path::new("."), &ov)
        }
        (None, None) => Err(Error::Usage(
            "one of --config or --preset is required".into(),
        )),
    }
}

fn progress(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        eprintln!("{}", msg.as_ref());
    }
}

/// What a simulation run produced, complete or not.
pub struct SimOutcome {
    pub state: SimState,
    pub ledger: EnergyLedger,
    /// Initial state, every `sample_every`-th accepted state and the final
    /// state.
    pub samples: Vec<SimState>,
    pub min_rho: f64,
    pub min_eta: f64,
    /// Smallest entropy-lemma margins over all accepted states.
    pub entropy_margins: [f64; 2],
    pub failure: Option<(Error, Vec<StepReport>)>,
}

/// Runs the configured simulation, writing `fields_<k>.csv` snapshots when
/// `out` is given.
pub fn simulate(sc: &Scenario, out: Option<&Path>, quiet: bool) -> Result<SimOutcome> {
    let cfg = &sc.config;
    let mut samples = vec![sc.initial.clone()];
    let mut min_rho = min_of(&sc.initial.rho);
    let mut min_eta = min_of(&sc.initial.eta);
    let b0 = entropy_bounds_check(&sc.initial, &sc.potential)?;
    let mut margins = [b0.negative_part_margin(), b0.free_energy_margin()];
    let mut io_error: Option<Error> = None;
    let write_snapshot = |k: usize, s: &SimState, io_error: &mut Option<Error>| {
        if let (Some(dir), None) = (out, io_error.as_ref()) {
            if let Err(e) = output::write(dir, &format!("fields_{k}.csv"), &output::fields_csv(s)) {
                *io_error = Some(e);
            }
        }
    };
    write_snapshot(0, &sc.initial, &mut io_error);
    let mut steps = 0usize;
    let report_every = (cfg.t_end / cfg.step.h / 10.0).ceil().max(1.0) as usize;
    let result = run_observed(
        &sc.initial,
        &sc.potential,
        &cfg.params,
        &cfg.step,
        cfg.t_end,
        |s, row, _| {
            steps += 1;
            min_rho = min_rho.min(min_of(&s.rho));
            min_eta = min_eta.min(min_of(&s.eta));
            if let Ok(b) = entropy_bounds_check(s, &sc.potential) {
                margins[0] = margins[0].min(b.negative_part_margin());
                margins[1] = margins[1].min(b.free_energy_margin());
            }
            let last = (s.time - cfg.t_end).abs() <= 1e-12 * cfg.t_end.max(1.0);
            if steps % cfg.sample_every == 0 || last {
                samples.push(s.clone());
                write_snapshot(samples.len() - 1, s, &mut io_error);
            }
            if steps % report_every == 0 {
                progress(
                    quiet,
                    format!(
                        "t = {:.4}  E = {:.10e}  D = {:.4e}",
                        s.time, row.energy.total, row.dissipation.total
                    ),
                );
            }
        },
    );
    if let Some(e) = io_error {
        return Err(e);
    }
    let (state, ledger, failure) = match result {
        Ok((s, l)) => (s, l, None),
        Err(f) => {
            let RunFailure {
                error,
                state,
                ledger,
                rejected,
            } = *f;
            (state, ledger, Some((error, rejected)))
        }
    };
    Ok(SimOutcome {
        state,
        ledger,
        samples,
        min_rho,
        min_eta,
        entropy_margins: margins,
        failure,
    })
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Text of `audit.txt`.
pub fn audit_text(sc: &Scenario, o: &SimOutcome) -> String {
    let e0 = o.ledger.first().map_or(0.0, |r| r.energy.total);
    let slack = sc.config.step.energy_slack * e0.abs();
    let audit = energy_inequality_audit(&o.ledger, slack);
    let mut s = String::new();
    let _ = writeln!(s, "steps accepted = {}", o.ledger.len().saturating_sub(1));
    let _ = writeln!(s, "slack_per_step = {}", num(slack));
    let _ = writeln!(s, "max_mass_drift = {}", num(o.ledger.max_mass_drift()));
    s += &audit.render();
    let pos = o.min_rho >= 0.0 && o.min_eta >= 0.0;
    let _ = writeln!(
        s,
        "positivity: {} (min rho = {}, min eta = {})",
        if pos { "PASS" } else { "FAIL" },
        num(o.min_rho),
        num(o.min_eta)
    );
    let ent = o
        .entropy_margins
        .iter()
        .all(|m| *m >= -crate::diagnostics::ENTROPY_MARGIN_TOL);
    let _ = writeln!(
        s,
        "entropy bounds: {} (negative-part margin = {}, free-energy margin = {})",
        if ent { "PASS" } else { "FAIL" },
        num(o.entropy_margins[0]),
        num(o.entropy_margins[1])
    );
    match &o.failure {
        None => {
            let _ = writeln!(s, "run: completed at t = {}", num(o.state.time));
        }
        Some((e, rejected)) => {
            let _ = writeln!(
                s,
                "run: ABORTED at step {} (t = {}): {e}",
                o.ledger.len(),
                num(o.state.time)
            );
            for r in rejected {
                let _ = writeln!(
                    s,
                    "  rejected h = {:.6e}, picard iterations = {}, residuals = [{:.3e}, {:.3e}, {:.3e}]{}",
                    r.h,
                    r.picard_iters,
                    r.residuals[0],
                    r.residuals[1],
                    r.residuals[2],
                    r.message.as_ref().map(|m| format!(": {m}")).unwrap_or_default()
                );
            }
        }
    }
    s
}

fn write_run(sc: &Scenario, out: &Path, o: &SimOutcome) -> Result<()> {
    output::write(out, "config_echo.txt", &sc.config.echo())?;
    output::write(out, "ledger.csv", &output::ledger_csv(&o.ledger))?;
    output::write(out, "audit.txt", &audit_text(sc, o))
}

fn failure_code(o: SimOutcome) -> Result<i32> {
    match o.failure {
        None => Ok(EXIT_OK),
        Some((e, _)) => {
            eprintln!("error: {e}");
            Ok(e.exit_code())
        }
    }
}

pub fn cmd_simulate(sc: &Scenario, out: &Path, quiet: bool) -> Result<i32> {
    output::write(out, "config_echo.txt", &sc.config.echo())?;
    let o = simulate(sc, Some(out), quiet)?;
    write_run(sc, out, &o)?;
    progress(quiet, format!("wrote {}", out.display()));
    failure_code(o)
}

pub fn cmd_stationary(sc: &Scenario, out: &Path, quiet: bool) -> Result<i32> {
    let (mr, me) = sc.masses();
    let st = solve_stationary(&sc.potential, &sc.config.params, mr, me)?;
    let res = stationary_residual(&st, &sc.potential, &sc.config.params)?;
    output::write(
        out,
        "stationary.csv",
        &output::stationary_csv(&sc.grid, &st),
    )?;
    output::write(
        out,
        "stationary_report.txt",
        &output::stationary_report(&st, &res),
    )?;
    progress(
        quiet,
        format!("c_rho = {}  c_eta = {}", num(st.c_rho), num(st.c_eta)),
    );
    Ok(EXIT_OK)
}

pub fn cmd_validate_potential(sc: &Scenario, out: &Path, quiet: bool) -> Result<i32> {
    let rep = validate_confinement_with(&sc.potential, &sc.config.params, &sc.config.confinement);
    let text = rep.render();
    output::write(out, "confinement_report.txt", &text)?;
    progress(
        quiet,
        text.lines()
            .take(1 + rep.checks.len() + 1)
            .collect::<Vec<_>>()
            .join("\n"),
    );
    Ok(if rep.passed {
        EXIT_OK
    } else {
        EXIT_CONFINEMENT
    })
}

/// Number of samples a run of the configuration yields.
pub fn expected_samples(cfg: &RunConfig) -> usize {
    let steps = (cfg.t_end / cfg.step.h).ceil() as usize;
    1 + steps / cfg.sample_every + usize::from(steps % cfg.sample_every != 0)
}

pub fn asymptotics_summary(rep: &AsymptoticsReport) -> String {
    let mut s = rep.render();
    let _ = writeln!(s, "\n[windowed_dissipation]");
    for (t, w) in rep.times.iter().zip(&rep.windowed_dissipation) {
        let _ = writeln!(s, "{} = {}", num(*t), num(*w));
    }
    s
}

pub fn cmd_asymptotics(sc: &Scenario, out: &Path, quiet: bool) -> Result<i32> {
    let n = expected_samples(&sc.config);
    if n < 8 {
        return Err(Error::Validation {
            key: "run.t_end".into(),
            line: 0,
            message: format!(
                "t_end / (h * sample_every) yields {n} sample times; at least 8 are needed"
            ),
        });
    }
    let (mr, me) = sc.masses();
    let st = solve_stationary(&sc.potential, &sc.config.params, mr, me)?;
    output::write(out, "config_echo.txt", &sc.config.echo())?;
    let o = simulate(sc, Some(out), quiet)?;
    write_run(sc, out, &o)?;
    if o.failure.is_some() {
        return failure_code(o);
    }
    let rep = asymptotics(
        &o.samples,
        &o.ledger,
        &st,
        &sc.config.params,
        sc.config.thresholds,
    )?;
    output::write(out, "asymptotics.csv", &output::asymptotics_csv(&rep))?;
    let summary = asymptotics_summary(&rep);
    output::write(out, "asymptotics.txt", &summary)?;
    progress(quiet, rep.render());
    Ok(if rep.all_converged() {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

pub fn cmd_sweep_delta(sc: &Scenario, out: &Path, quiet: bool) -> Result<i32> {
    let cfg = &sc.config;
    let runs = delta_continuation(
        &sc.initial,
        &sc.potential,
        &cfg.params,
        &cfg.step,
        cfg.t_end,
    )?;
    let mut csv = String::from("delta,higher_integrability,E_final,max_mass_drift\n");
    for (i, r) in runs.iter().enumerate() {
        let e = r.ledger.last().map_or(f64::NAN, |l| l.energy.total);
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            num(r.delta),
            num(r.higher_integrability),
            num(e),
            num(r.ledger.max_mass_drift())
        );
        output::write(
            out,
            &format!("ledger_delta_{i}.csv"),
            &output::ledger_csv(&r.ledger),
        )?;
    }
    output::write(out, "config_echo.txt", &cfg.echo())?;
    output::write(out, "sweep.csv", &csv)?;
    let vals: Vec<f64> = runs.iter().map(|r| r.higher_integrability).collect();
    let ratio = vals.iter().copied().fold(0.0, f64::max) / min_of(&vals);
    let summary = format!("higher-integrability ratio max/min = {}\n", num(ratio));
    output::write(out, "sweep.txt", &summary)?;
    progress(quiet, summary.trim_end());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_bad_flags() {
        assert_eq!(main_with_args(["bubbleflow", "--help"]), EXIT_OK);
        assert_eq!(main_with_args(["bubbleflow", "simulate"]), EXIT_CONFIG);
        assert_eq!(
            main_with_args(["bubbleflow", "simulate", "--preset", "nope"]),
            EXIT_CONFIG
        );
    }

    #[test]
    fn sample_count() {
        let cfg = crate::scenario::preset_config("column_1d").unwrap();
        assert_eq!(expected_samples(&cfg), 21);
    }
}
