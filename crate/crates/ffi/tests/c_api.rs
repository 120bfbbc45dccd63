use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use indoordim_ffi::*;

fn last_error() -> String {
    let p = indoordim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn preset(name: &str) -> *mut IndoordimScenario {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { indoordim_scenario_from_preset(name.as_ptr(), &mut s) };
    assert_eq!(st, IndoordimStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn unknown_preset_reports_an_error() {
    let name = CString::new("table2").unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { indoordim_scenario_from_preset(name.as_ptr(), &mut s) };
    assert_ne!(st, IndoordimStatus::Ok);
    assert!(s.is_null());
    assert!(last_error().contains("table2"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut s = ptr::null_mut();
    let st = unsafe { indoordim_scenario_from_preset(ptr::null(), &mut s) };
    assert_eq!(st, IndoordimStatus::NullPointer);
    let st = unsafe { indoordim_evaluate_deployment(ptr::null(), IndoordimSystem::ZfIdeal, 1, 1, ptr::null_mut()) };
    assert_eq!(st, IndoordimStatus::NullPointer);
    unsafe { indoordim_scenario_free(ptr::null_mut()) };
    unsafe { indoordim_dimensioning_free(ptr::null_mut()) };
}

#[test]
fn schema_errors_name_the_key() {
    let s = preset("table1-open");
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { indoordim_scenario_to_toml(s, &mut text) }, IndoordimStatus::Ok);
    let toml = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    unsafe { indoordim_string_free(text) };
    unsafe { indoordim_scenario_free(s) };

    let bad = CString::new(toml.replace("beta = 0.05", "beta = 1.5")).unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { indoordim_scenario_from_toml(bad.as_ptr(), &mut s) };
    assert_eq!(st, IndoordimStatus::Config);
    assert!(last_error().contains("beta"), "{}", last_error());

    let good = CString::new(toml).unwrap();
    assert_eq!(
        unsafe { indoordim_scenario_from_toml(good.as_ptr(), &mut s) },
        IndoordimStatus::Ok
    );
    unsafe { indoordim_scenario_free(s) };
}

#[test]
fn evaluates_a_saturated_wifi_deployment() {
    let s = preset("table1-open");
    assert_eq!(unsafe { indoordim_scenario_set_engine(s, 40, 7) }, IndoordimStatus::Ok);
    assert_eq!(
        unsafe { indoordim_scenario_set_engine(s, 0, 7) },
        IndoordimStatus::Config
    );
    let mut out = IndoordimDeployment::default();
    let st = unsafe { indoordim_evaluate_deployment(s, IndoordimSystem::WifiBaseline, 2, 2, &mut out) };
    assert_eq!(st, IndoordimStatus::Ok);
    assert_eq!((out.nx, out.ny, out.ap_count, out.k), (2, 2, 4, 3));
    assert!((out.throughput.mean - 16_200.0).abs() < 0.02 * 16_200.0);
    assert_eq!(out.throughput.n, 40);
    assert!(out.outage.lower <= out.outage.mean && out.outage.mean <= out.outage.upper);
    unsafe { indoordim_scenario_free(s) };
}

#[test]
fn dimensioning_handle_accessors() {
    let toml = CString::new(
        "preset = \"table1-open\"\n[engine]\nn_snapshots = 100\nseed = 3\nmax_aps = 4\n[demand]\ngrid = [1.0, 8.0, 1000.0]\n",
    )
    .unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { indoordim_scenario_from_toml(toml.as_ptr(), &mut s) },
        IndoordimStatus::Ok,
        "{}",
        last_error()
    );
    let mut d = ptr::null_mut();
    assert_eq!(
        unsafe { indoordim_dimension(s, IndoordimSystem::WifiBaseline, false, &mut d) },
        IndoordimStatus::Ok
    );
    assert_eq!(unsafe { indoordim_dimensioning_len(d) }, 3);
    assert_eq!(unsafe { indoordim_dimensioning_ladder_cap(d) }, 4);
    let mut demand = 0.0;
    let mut count = 0u32;
    let expect = [(1.0, 1), (8.0, 4), (1000.0, 0)];
    for (i, &(dm, c)) in expect.iter().enumerate() {
        assert_eq!(
            unsafe { indoordim_dimensioning_point(d, i, &mut demand, &mut count) },
            IndoordimStatus::Ok
        );
        assert_eq!((demand, count), (dm, c));
    }
    assert_eq!(
        unsafe { indoordim_dimensioning_point(d, 3, &mut demand, &mut count) },
        IndoordimStatus::OutOfRange
    );
    unsafe { indoordim_dimensioning_free(d) };
    unsafe { indoordim_scenario_free(s) };
}

#[test]
fn scalar_helpers() {
    let mut v = 0.0;
    assert_eq!(
        unsafe { indoordim_path_loss_db(37.0, 4.0, 10.0, 10.0, 2, &mut v) },
        IndoordimStatus::Ok
    );
    assert!((v - 97.0).abs() < 1e-12);
    assert_eq!(
        unsafe { indoordim_path_loss_db(37.0, -1.0, 10.0, 10.0, 2, &mut v) },
        IndoordimStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { indoordim_throughput_to_demand(1.0, 0.2, &mut v) },
        IndoordimStatus::Ok
    );
    assert!((v - 65.917_968_75).abs() < 1e-9);
    assert_eq!(
        unsafe { indoordim_throughput_to_demand(-1.0, 0.2, &mut v) },
        IndoordimStatus::InvalidArgument
    );
}

#[test]
fn header_is_generated_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/indoordim.h");
    let text = std::fs::read_to_string(&header).expect("header written by build script");
    for sym in [
        "typedef struct IndoordimScenario IndoordimScenario;",
        "IndoordimStatus indoordim_scenario_from_preset(",
        "IndoordimStatus indoordim_evaluate_deployment(",
        "const char *indoordim_last_error(void);",
        "INDOORDIM_STATUS_OK = 0",
    ] {
        assert!(text.contains(sym), "missing `{sym}`");
    }
    // syntax check with whatever C compiler is around
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler found, skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
