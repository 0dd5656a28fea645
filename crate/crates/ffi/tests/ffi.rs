use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use twodomain_ffi::*;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe {
        td_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn load(name: &str) -> *mut TdProblem {
    let path = CString::new(configs().join(name).to_str().unwrap()).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { td_problem_from_file(path.as_ptr(), &mut p) }, TdStatus::Ok, "{}", last_error());
    p
}

#[test]
fn gap_values_through_the_c_interface() {
    let p = load("gap.toml");
    let (mut dim, mut horizon) = (0usize, 0.0);
    assert_eq!(unsafe { td_problem_info(p, &mut dim, &mut horizon) }, TdStatus::Ok);
    assert_eq!((dim, horizon), (1, 1.0));
    let mut values = Vec::new();
    for variant in [TdVariant::Minus, TdVariant::Plus] {
        let mut f = ptr::null_mut();
        assert_eq!(unsafe { td_solve_with_spacing(p, variant, 0.02, &mut f) }, TdStatus::Ok);
        let mut v = f64::NAN;
        assert_eq!(unsafe { td_field_value(f, [0.0].as_ptr(), 1, 1.0, &mut v) }, TdStatus::Ok);
        values.push(v);
        let (mut nodes, mut steps, mut dt) = (0usize, 0usize, 0.0);
        assert_eq!(unsafe { td_field_shape(f, &mut nodes, &mut steps, &mut dt) }, TdStatus::Ok);
        assert_eq!(nodes, 201);
        assert!((steps as f64 * dt - 1.0).abs() < 1e-12);
        let mut layer = vec![0.0; nodes];
        assert_eq!(unsafe { td_field_layer(f, 0, layer.as_mut_ptr(), nodes) }, TdStatus::Ok);
        // terminal layer is g(x) = min(2|x|, 2)
        assert_eq!(layer[0], 2.0);
        assert_eq!(layer[100], 0.0);
        assert_eq!(unsafe { td_field_layer(f, 0, layer.as_mut_ptr(), 3) }, TdStatus::BufferTooSmall);
        assert_eq!(unsafe { td_field_layer(f, steps + 1, layer.as_mut_ptr(), nodes) }, TdStatus::InvalidArgument);
        unsafe { td_field_free(f) };
    }
    assert!(values[0].abs() < 1e-9);
    assert!((values[1] - 1.0).abs() < 1e-9);
    unsafe { td_problem_free(p) };
}

#[test]
fn hamiltonians_through_the_c_interface() {
    let p = load("gap.toml");
    let mut h = f64::NAN;
    // side 2 at p = 0: sup over α of -(1 + α) is 0, attained at α = -1
    assert_eq!(unsafe { td_hamiltonian_side(p, 2, [0.5].as_ptr(), 0.0, [0.0].as_ptr(), 1, &mut h) }, TdStatus::Ok);
    assert_eq!(h, 0.0);
    assert_eq!(unsafe { td_hamiltonian_side(p, 3, [0.5].as_ptr(), 0.0, [0.0].as_ptr(), 1, &mut h) }, TdStatus::InvalidArgument);
    assert!(last_error().contains("side"));
    // singular sliding is free, regular sliding costs 1
    assert_eq!(unsafe { td_hamiltonian_tangential(p, [0.0].as_ptr(), 1, 0.0, ptr::null(), 0, &mut h) }, TdStatus::Ok);
    assert_eq!(h, 0.0);
    assert_eq!(unsafe { td_hamiltonian_tangential(p, [0.0].as_ptr(), 1, 0.0, ptr::null(), 1, &mut h) }, TdStatus::Ok);
    assert_eq!(h, -1.0);
    assert_eq!(unsafe { td_hamiltonian_tangential(p, [0.5].as_ptr(), 1, 0.0, ptr::null(), 1, &mut h) }, TdStatus::InvalidArgument);
    unsafe { td_problem_free(p) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut p = ptr::null_mut();
    let bad = CString::new("[geometry]\ndim = 1\nlower = [0.0]\nupper = [1.0]\nbogus = 3\n").unwrap();
    assert_eq!(unsafe { td_problem_from_toml(bad.as_ptr(), &mut p) }, TdStatus::Config);
    assert!(p.is_null());
    assert!(last_error().contains("line"), "{}", last_error());
    let missing = CString::new("/nonexistent/problem.toml").unwrap();
    assert_eq!(unsafe { td_problem_from_file(missing.as_ptr(), &mut p) }, TdStatus::Io);
    assert_eq!(unsafe { td_problem_from_toml(ptr::null(), &mut p) }, TdStatus::NullPointer);
    assert_eq!(unsafe { td_problem_from_toml(bad.as_ptr(), ptr::null_mut()) }, TdStatus::NullPointer);
    assert_eq!(unsafe { td_solve(ptr::null(), TdVariant::Plus, &mut ptr::null_mut()) }, TdStatus::NullPointer);
    let needed = unsafe { td_last_error_message(ptr::null_mut(), 0) };
    assert_eq!(needed, last_error().len() + 1);
    // freeing null is a no-op
    unsafe {
        td_problem_free(ptr::null_mut());
        td_field_free(ptr::null_mut());
    }
    let version = unsafe { CStr::from_ptr(td_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn solve_uses_the_configured_grid() {
    let p = load("transport.toml");
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { td_solve(p, TdVariant::SingleDomain, &mut f) }, TdStatus::Ok);
    let mut nodes = 0usize;
    assert_eq!(unsafe { td_field_shape(f, &mut nodes, ptr::null_mut(), ptr::null_mut()) }, TdStatus::Ok);
    assert!(nodes > 1);
    unsafe {
        td_field_free(f);
        td_problem_free(p);
    }
}

#[test]
fn header_is_generated_and_c_program_links() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/twodomain.h")).unwrap();
    for name in ["td_problem_from_toml", "td_solve_with_spacing", "td_field_value", "TD_STATUS_BUFFER_TOO_SMALL", "typedef struct TdProblem TdProblem"] {
        assert!(header.contains(name), "{name}");
    }
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libtwodomain_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping C link test: static library or cc unavailable");
        return;
    }
    let exe = target.join("ffi_smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).arg(configs().join("gap.toml")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1.000000000000");
}
