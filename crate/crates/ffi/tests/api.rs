use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use aquannr::estimators::{NnrConfig, NnrPredictor, SnrSample};
use aquannr_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(aq_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn nnr_handle_matches_the_library() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { aq_nnr_new(3, 3, &mut p) }, AqStatus::Ok);
    let mut reference = NnrPredictor::new(NnrConfig::default()).unwrap();
    let mut out = 0.0;
    assert_eq!(unsafe { aq_nnr_predict(p, &mut out) }, AqStatus::InsufficientData);
    assert!(!last_error().is_empty());
    for i in 0..300 {
        let v = (i as f64 * 0.37).sin() * 4.0 + 10.0;
        assert_eq!(unsafe { aq_nnr_push(p, i as f64, v) }, AqStatus::Ok);
        reference.push(SnrSample::new(i as f64, v)).unwrap();
    }
    assert_eq!(unsafe { aq_nnr_predict(p, &mut out) }, AqStatus::Ok);
    assert_eq!(last_error(), "");
    assert_eq!(out, reference.predict().unwrap());
    let mut len = 0usize;
    assert_eq!(unsafe { aq_nnr_len(p, &mut len) }, AqStatus::Ok);
    assert_eq!(len, 300);
    assert_eq!(unsafe { aq_nnr_push(p, 10.0, 1.0) }, AqStatus::InvalidArgument);
    assert_eq!(unsafe { aq_nnr_push(p, 400.0, f64::NAN) }, AqStatus::InvalidArgument);
    unsafe { aq_nnr_free(p) };
}

#[test]
fn compression_bounds_storage() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { aq_nnr_new(3, 3, &mut p) }, AqStatus::Ok);
    assert_eq!(unsafe { aq_nnr_set_compression(p, 100, 0.2) }, AqStatus::Ok);
    assert_eq!(unsafe { aq_nnr_set_compression(p, 100, 0.9) }, AqStatus::Config);
    for i in 0..1000 {
        assert_eq!(unsafe { aq_nnr_push(p, i as f64, (i % 7) as f64) }, AqStatus::Ok);
    }
    let mut len = 0usize;
    assert_eq!(unsafe { aq_nnr_len(p, &mut len) }, AqStatus::Ok);
    assert!(len < 100, "{len}");
    unsafe { aq_nnr_free(p) };
}

#[test]
fn invalid_parameters_and_null_pointers() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { aq_nnr_new(0, 3, &mut p) }, AqStatus::Config);
    assert!(p.is_null());
    assert_eq!(unsafe { aq_nnr_new(3, 3, ptr::null_mut()) }, AqStatus::NullPointer);
    let mut out = 0.0;
    assert_eq!(unsafe { aq_nnr_predict(ptr::null_mut(), &mut out) }, AqStatus::NullPointer);
    assert_eq!(unsafe { aq_stats_update(ptr::null_mut(), 1.0) }, AqStatus::NullPointer);
    let mut e = ptr::null_mut();
    assert_ne!(unsafe { aq_ema_new(1.5, &mut e) }, AqStatus::Ok);
    assert!(e.is_null());
    unsafe {
        aq_nnr_free(ptr::null_mut());
        aq_stats_free(ptr::null_mut());
        aq_ema_free(ptr::null_mut());
    }
}

#[test]
fn stats_and_ema() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { aq_stats_new(&mut s) }, AqStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { aq_stats_mean(s, &mut v) }, AqStatus::InsufficientData);
    for x in [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0] {
        assert_eq!(unsafe { aq_stats_update(s, x) }, AqStatus::Ok);
    }
    let mut n = 0u64;
    assert_eq!(unsafe { aq_stats_count(s, &mut n) }, AqStatus::Ok);
    assert_eq!(n, 8);
    assert_eq!(unsafe { aq_stats_mean(s, &mut v) }, AqStatus::Ok);
    assert_eq!(v, 5.0);
    assert_eq!(unsafe { aq_stats_variance(s, &mut v) }, AqStatus::Ok);
    assert!((v - 32.0 / 7.0).abs() < 1e-12);
    unsafe { aq_stats_free(s) };

    let mut e = ptr::null_mut();
    assert_eq!(unsafe { aq_ema_new(0.5, &mut e) }, AqStatus::Ok);
    assert_eq!(unsafe { aq_ema_predict(e, &mut v) }, AqStatus::InsufficientData);
    assert_eq!(unsafe { aq_ema_update(e, 10.0) }, AqStatus::Ok);
    assert_eq!(unsafe { aq_ema_update(e, 20.0) }, AqStatus::Ok);
    assert_eq!(unsafe { aq_ema_predict(e, &mut v) }, AqStatus::Ok);
    assert_eq!(v, 15.0);
    unsafe { aq_ema_free(e) };
}

#[test]
fn channel_functions() {
    let mut params = AqChannelParams {
        tx_power_w: 0.0,
        carrier_khz: 0.0,
        spreading_exponent: 0.0,
        noise_psd_w_per_hz: 0.0,
        bandwidth_hz: 0.0,
    };
    assert_eq!(unsafe { aq_channel_default(&mut params) }, AqStatus::Ok);
    let mut near = 0.0;
    let mut far = 0.0;
    assert_eq!(unsafe { aq_snr_db(&params, 50.0, &mut near) }, AqStatus::Ok);
    assert_eq!(unsafe { aq_snr_db(&params, 150.0, &mut far) }, AqStatus::Ok);
    assert!(near > far);
    assert_eq!(unsafe { aq_snr_db(&params, -1.0, &mut far) }, AqStatus::Domain);
    let mut a = 0.0;
    assert_eq!(unsafe { aq_absorption_db_per_km(10.0, &mut a) }, AqStatus::Ok);
    assert!(a > 0.0);
    let mut psr = 0.0;
    assert_eq!(unsafe { aq_packet_success_prob(0.0, 10, &mut psr) }, AqStatus::Ok);
    assert!((psr - 0.5f64.powi(10)).abs() < 1e-15);
    assert_eq!(unsafe { aq_packet_success_prob(f64::INFINITY, 10, &mut psr) }, AqStatus::Ok);
    assert_eq!(psr, 1.0);
}

#[test]
fn simulation_from_text() {
    let cfg = CString::new("# tiny\nnode_count = 12\nduration_s = 200\nprotocol = dbr\n").unwrap();
    let mut m = AqSimMetrics {
        packet_delivery_ratio: 0.0,
        avg_end_to_end_delay: 0.0,
        avg_energy_per_delivered_packet: 0.0,
        packets_sent: 0,
        packets_delivered: 0,
        total_energy: 0.0,
    };
    assert_eq!(unsafe { aq_sim_run(cfg.as_ptr(), &mut m) }, AqStatus::Ok);
    assert_eq!(m.packets_sent, 20);
    assert!((0.0..=1.0).contains(&m.packet_delivery_ratio));
    let again = m;
    assert_eq!(unsafe { aq_sim_run(cfg.as_ptr(), &mut m) }, AqStatus::Ok);
    assert_eq!(m.total_energy.to_bits(), again.total_energy.to_bits());

    let bad = CString::new("node_count = 1\n").unwrap();
    assert_eq!(unsafe { aq_sim_run(bad.as_ptr(), &mut m) }, AqStatus::Config);
    let unknown = CString::new("warp = 9\n").unwrap();
    assert_eq!(unsafe { aq_sim_run(unknown.as_ptr(), &mut m) }, AqStatus::Config);
    assert!(last_error().contains("warp"));
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(aq_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/aquannr.h")).unwrap();
    for name in [
        "typedef struct AqNnrPredictor AqNnrPredictor;",
        "AQ_STATUS_OK = 0",
        "aq_nnr_new",
        "aq_stats_variance",
        "aq_ema_predict",
        "aq_packet_success_prob",
        "aq_sim_run",
        "aq_last_error",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

/// Compiles a C program against the generated header and the shared library.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let lib_dir: PathBuf = exe.parent().unwrap().parent().unwrap().to_path_buf();
    assert!(
        lib_dir.join("libaquannr_ffi.so").exists(),
        "shared library not found in {}",
        lib_dir.display()
    );
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new("cc")
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(format!("-L{}", lib_dir.display()))
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .args(["-laquannr_ffi", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
