//! Exercises the C ABI from Rust, exactly as a C caller would.

use std::ptr;

use linkseg_ffi::*;

fn det_scenario() -> *mut LinksegScenario {
    let mut handle: *mut LinksegScenario = ptr::null_mut();
    let status =
        linkseg_scenario_deterministic(100.0, 40.0, 1.0, 0.0, 0.005, &mut handle);
    assert_eq!(status, LinksegStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn analyze_matches_hand_enumeration() {
    let handle = det_scenario();
    let mut metrics = LinksegMetrics {
        edge_probability: 0.0,
        mean_packet: 0.0,
        packet_variance: 0.0,
        mean_batch: 0.0,
        mean_batch_sq: 0.0,
        es: 0.0,
        es2: 0.0,
        load: 0.0,
        ew1: 0.0,
        ew2: 0.0,
        ew: 0.0,
        er: 0.0,
    };
    assert_eq!(linkseg_analyze(handle, &mut metrics), LinksegStatus::Ok);
    assert!((metrics.edge_probability - 1.0 / 3.0).abs() < 1e-12);
    assert!((metrics.mean_batch - 3.0).abs() < 1e-12);
    assert!((metrics.mean_batch_sq - 9.0).abs() < 1e-12);
    assert!((metrics.es - 100.0 / 3.0).abs() < 1e-12);
    assert!((metrics.es2 - 1200.0).abs() < 1e-9);
    assert!((metrics.ew1 - 154.0 / 3.0).abs() < 1e-9);
    assert!((metrics.ew2 - 80.0).abs() < 1e-12);
    assert!((metrics.er - 494.0 / 3.0).abs() < 1e-9);
    linkseg_scenario_free(handle);
}

#[test]
fn set_payload_reprices_the_scenario() {
    let handle = det_scenario();
    assert_eq!(
        linkseg_scenario_set_payload(handle, 100.0),
        LinksegStatus::Ok
    );
    let mut metrics = unsafe { std::mem::zeroed::<LinksegMetrics>() };
    assert_eq!(linkseg_analyze(handle, &mut metrics), LinksegStatus::Ok);
    assert!((metrics.ew - 50.0).abs() < 1e-9);
    assert!((metrics.er - 150.0).abs() < 1e-9);
    assert_eq!(
        linkseg_scenario_set_payload(handle, -5.0),
        LinksegStatus::InvalidArgument
    );
    linkseg_scenario_free(handle);
}

#[test]
fn unstable_load_reports_its_status() {
    let mut handle: *mut LinksegScenario = ptr::null_mut();
    // Offered load = 0.02 * 3 * (100/3) = 2.
    let status = linkseg_scenario_deterministic(100.0, 40.0, 1.0, 0.0, 0.02, &mut handle);
    assert_eq!(status, LinksegStatus::Ok);
    let mut metrics = unsafe { std::mem::zeroed::<LinksegMetrics>() };
    assert_eq!(
        linkseg_analyze(handle, &mut metrics),
        LinksegStatus::Unstable
    );
    assert!((metrics.load - 2.0).abs() < 1e-12);
    assert!(metrics.er.is_nan());
    // Segmentation does not depend on the arrival rate.
    assert!((metrics.mean_batch - 3.0).abs() < 1e-12);
    linkseg_scenario_free(handle);
}

#[test]
fn null_pointers_are_rejected() {
    let mut metrics = unsafe { std::mem::zeroed::<LinksegMetrics>() };
    assert_eq!(
        linkseg_analyze(ptr::null(), &mut metrics),
        LinksegStatus::NullPointer
    );
    let handle = det_scenario();
    assert_eq!(
        linkseg_analyze(handle, ptr::null_mut()),
        LinksegStatus::NullPointer
    );
    assert_eq!(
        linkseg_scenario_deterministic(100.0, 40.0, 1.0, 0.0, 0.005, ptr::null_mut()),
        LinksegStatus::NullPointer
    );
    assert_eq!(
        linkseg_scenario_empirical(ptr::null(), 4, 40.0, 1.0, 0.0, 0.005, ptr::null_mut()),
        LinksegStatus::NullPointer
    );
    linkseg_scenario_free(handle);
    linkseg_scenario_free(ptr::null_mut());
}

#[test]
fn empirical_population_round_trips() {
    let sizes = [100.0, 200.0, 300.0, 400.0];
    let mut handle: *mut LinksegScenario = ptr::null_mut();
    let status = linkseg_scenario_empirical(
        sizes.as_ptr(),
        sizes.len(),
        100.0,
        1.0,
        0.0,
        1e-4,
        &mut handle,
    );
    assert_eq!(status, LinksegStatus::Ok);
    let mut metrics = unsafe { std::mem::zeroed::<LinksegMetrics>() };
    assert_eq!(linkseg_analyze(handle, &mut metrics), LinksegStatus::Ok);
    // Batch sizes 1,2,3,4 equally likely.
    assert!((metrics.mean_batch - 2.5).abs() < 1e-12);
    assert!((metrics.mean_batch_sq - 7.5).abs() < 1e-12);
    linkseg_scenario_free(handle);
}

#[test]
fn simulation_brackets_the_closed_form() {
    let handle = det_scenario();
    let mut metrics = unsafe { std::mem::zeroed::<LinksegMetrics>() };
    assert_eq!(linkseg_analyze(handle, &mut metrics), LinksegStatus::Ok);
    let mut result = unsafe { std::mem::zeroed::<LinksegSimResult>() };
    let status = linkseg_simulate(handle, 1000, 20000, 5, 7, 0.95, &mut result);
    assert_eq!(status, LinksegStatus::Ok);
    assert_eq!(result.messages, 100_000);
    assert!((result.mean_r_composed - metrics.er).abs() <= result.hw_r_composed);
    assert!((result.mean_w2 - 80.0).abs() < 1e-9);
    linkseg_scenario_free(handle);
}

#[test]
fn optimize_finds_the_unsegmented_payload() {
    let handle = det_scenario();
    let grid = [40.0, 100.0];
    let mut best_payload = 0.0;
    let mut best_er = 0.0;
    let status = linkseg_optimize(
        handle,
        grid.as_ptr(),
        grid.len(),
        0,
        &mut best_payload,
        &mut best_er,
    );
    assert_eq!(status, LinksegStatus::Ok);
    assert_eq!(best_payload, 100.0);
    assert!((best_er - 150.0).abs() < 1e-9);
    linkseg_scenario_free(handle);
}

#[test]
fn tolerance_updates_are_validated() {
    let handle = det_scenario();
    assert_eq!(
        linkseg_scenario_set_tolerance(handle, 1e-6, 1 << 20),
        LinksegStatus::Ok
    );
    assert_eq!(
        linkseg_scenario_set_tolerance(handle, 2.0, 1 << 20),
        LinksegStatus::InvalidArgument
    );
    assert_eq!(
        linkseg_scenario_set_tolerance(ptr::null_mut(), 1e-6, 1 << 20),
        LinksegStatus::NullPointer
    );
    linkseg_scenario_free(handle);
}

#[test]
fn status_descriptions_are_nul_terminated() {
    for status in [
        LinksegStatus::Ok,
        LinksegStatus::NullPointer,
        LinksegStatus::InvalidArgument,
        LinksegStatus::Unstable,
        LinksegStatus::Truncation,
        LinksegStatus::NoStablePoint,
        LinksegStatus::Io,
        LinksegStatus::Internal,
    ] {
        let ptr = linkseg_status_describe(status);
        assert!(!ptr.is_null());
        let text = unsafe { std::ffi::CStr::from_ptr(ptr) };
        assert!(!text.to_str().unwrap().is_empty());
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = include_str!("../include/linkseg.h");
    for decl in [
        "typedef struct LinksegScenario LinksegScenario;",
        "LINKSEG_STATUS_OK",
        "linkseg_scenario_deterministic",
        "linkseg_scenario_empirical",
        "linkseg_analyze",
        "linkseg_simulate",
        "linkseg_optimize",
        "linkseg_scenario_free",
        "linkseg_status_describe",
    ] {
        assert!(header.contains(decl), "header is missing {decl}");
    }
}
