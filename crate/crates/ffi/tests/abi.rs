use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use bubbleflow_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(bf_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn from_config(text: &str) -> (BfStatus, *mut BfSimulation) {
    let c = CString::new(text).unwrap();
    let mut sim = ptr::null_mut();
    let s = unsafe { bf_simulation_from_config(c.as_ptr(), &mut sim) };
    (s, sim)
}

const EQUILIBRIUM: &str = "\
[grid]
cells = 40
[params]
h = 5e-3
[potential]
kind = linear
g = 1
[initial]
kind = equilibrium
mass_rho = 0.5
mass_eta = 1
[run]
t_end = 1
";

#[test]
fn equilibrium_handle_round_trip() {
    let (s, sim) = from_config(EQUILIBRIUM);
    assert_eq!(s, BfStatus::Ok, "{}", last_error());
    let (mut n, mut dim) = (0usize, 0usize);
    unsafe {
        assert_eq!(
            bf_simulation_cell_count(sim, &mut n, &mut dim),
            BfStatus::Ok
        );
        assert_eq!((n, dim), (40, 1));
        let mut rho0 = vec![0.0; n];
        let mut eta0 = vec![0.0; n];
        assert_eq!(
            bf_simulation_copy_fields(
                sim,
                rho0.as_mut_ptr(),
                ptr::null_mut(),
                eta0.as_mut_ptr(),
                n
            ),
            BfStatus::Ok
        );
        assert_eq!(bf_simulation_run(sim, 0.1), BfStatus::Ok);
        let (mut t, mut steps) = (0.0, 0usize);
        bf_simulation_time(sim, &mut t);
        bf_simulation_steps(sim, &mut steps);
        assert_eq!((t, steps), (0.1, 20));
        let mut rho = vec![0.0; n];
        let mut u = vec![1.0; n];
        let mut eta = vec![0.0; n];
        assert_eq!(
            bf_simulation_copy_fields(sim, rho.as_mut_ptr(), u.as_mut_ptr(), eta.as_mut_ptr(), n),
            BfStatus::Ok
        );
        for c in 0..n {
            assert!((rho[c] - rho0[c]).abs() < 1e-10 && (eta[c] - eta0[c]).abs() < 1e-10);
            assert!(u[c].abs() < 1e-10);
        }
        let (mut cr, mut ce) = (0.0, 0.0);
        let mut rho_s = vec![0.0; n];
        assert_eq!(
            bf_stationary_solve(
                sim,
                rho_s.as_mut_ptr(),
                ptr::null_mut(),
                n,
                &mut cr,
                &mut ce
            ),
            BfStatus::Ok
        );
        assert!((cr - 1.5).abs() < 1e-8);
        assert!(rho_s.iter().zip(&rho0).all(|(a, b)| (a - b).abs() < 1e-12));
        let mut e = BfEnergy::default();
        assert_eq!(bf_simulation_energy(sim, &mut e), BfStatus::Ok);
        assert!(e.kinetic.abs() < 1e-20 && e.dissipation >= 0.0);
        bf_simulation_free(sim);
    }
}

#[test]
fn errors_are_reported() {
    let (s, sim) = from_config("[grid]\ncells = 4\n");
    assert_eq!(s, BfStatus::ConfigError);
    assert!(sim.is_null());
    assert!(last_error().contains("potential.kind"), "{}", last_error());

    let (s, sim) = from_config(&EQUILIBRIUM.replace("mass_rho = 0.5", "mass_rho = -1"));
    assert_eq!(s, BfStatus::ConfigError);
    assert!(sim.is_null());

    let name = CString::new("nope").unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(
        unsafe { bf_simulation_from_preset(name.as_ptr(), &mut sim) },
        BfStatus::ConfigError
    );
    assert_eq!(
        unsafe { bf_simulation_from_preset(ptr::null(), &mut sim) },
        BfStatus::NullPointer
    );
    assert_eq!(
        unsafe { bf_simulation_step(ptr::null_mut()) },
        BfStatus::NullPointer
    );
    unsafe { bf_simulation_free(ptr::null_mut()) };

    let (_, sim) = from_config(EQUILIBRIUM);
    let mut buf = vec![0.0; 3];
    unsafe {
        assert_eq!(
            bf_simulation_copy_fields(sim, buf.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), 3),
            BfStatus::InvalidArgument
        );
        assert_eq!(bf_simulation_run(sim, -1.0), BfStatus::InvalidArgument);
        bf_simulation_free(sim);
    }
}

#[test]
fn failed_run_keeps_last_accepted_state() {
    let text = EQUILIBRIUM.replace(
        "kind = equilibrium\nmass_rho = 0.5\nmass_eta = 1",
        "kind = uniform",
    ) + "[solver]\npicard_max = 1\n";
    let (s, sim) = from_config(&text);
    assert_eq!(s, BfStatus::Ok, "{}", last_error());
    unsafe {
        assert_eq!(bf_simulation_step(sim), BfStatus::StepAborted);
        assert!(last_error().contains("rejected"), "{}", last_error());
        let mut t = 1.0;
        bf_simulation_time(sim, &mut t);
        assert_eq!(t, 0.0);
        bf_simulation_free(sim);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(bf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libbubbleflow_ffi.a");
    lib.is_file().then_some(lib)
}

fn have(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok()
}

#[test]
fn c_program_links_and_runs() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    if !have("cc") {
        eprintln!("no C compiler; skipped");
        return;
    }
    let Some(lib) = static_lib() else {
        eprintln!("static library not built; skipped");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(root.join("include"))
        .arg(root.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("128 cells"));
}
