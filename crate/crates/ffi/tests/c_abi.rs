use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use edgesim_ffi::*;

const SCENARIO: &str = r#"{
    "duration_min": 5,
    "device_count": 20,
    "access_points": [
        {"attractiveness_s": 120, "wlan_bandwidth_mbps": 100},
        {"attractiveness_s": 240, "wlan_bandwidth_mbps": 100}
    ],
    "edge": {"vms_per_ap": 2, "mips": 4000},
    "cloud": {"vm_count": 2, "mips": 20000},
    "profiles": [{
        "weight": 1.0, "name": "app", "interarrival_mean_s": 10,
        "active_s": 40, "idle_s": 20, "upload_bytes": 100000,
        "download_bytes": 100000, "length_mi": 4000,
        "vm_utilization_pct": 20, "cloud_probability": 0.2
    }]
}"#;

fn last_error() -> String {
    let p = edgesim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(json: &str) -> *mut EdgesimScenario {
    let json = CString::new(json).unwrap();
    let mut handle = ptr::null_mut();
    let st = unsafe { edgesim_scenario_from_json(json.as_ptr(), &mut handle) };
    assert_eq!(st, EdgesimStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn run_both_engines_through_handle() {
    let h = load(SCENARIO);
    let mut base = EdgesimSummary::default();
    let mut reno = EdgesimSummary::default();
    unsafe {
        assert_eq!(edgesim_run(h, EdgesimEngine::Baseline as i32, 11, &mut base), EdgesimStatus::Ok);
        assert_eq!(edgesim_run(h, EdgesimEngine::Renovated as i32, 11, &mut reno), EdgesimStatus::Ok);
        edgesim_scenario_free(h);
    }
    assert!(edgesim_last_error().is_null());
    assert!(base.tasks_generated > 0);
    assert_eq!(base.tasks_generated, reno.tasks_generated);
    assert_eq!(base.completed + base.failed_network + base.failed_mobility + base.failed_vm, base.tasks_generated);
    assert_eq!(
        (base.failed_network, base.failed_mobility, base.failed_vm),
        (reno.failed_network, reno.failed_mobility, reno.failed_vm)
    );
}

#[test]
fn errors_map_to_status_codes() {
    let mut handle = ptr::null_mut();
    unsafe {
        assert_eq!(edgesim_scenario_from_json(ptr::null(), &mut handle), EdgesimStatus::NullPointer);
        assert!(handle.is_null());
        assert!(last_error().contains("json"));

        let bad = CString::new(SCENARIO.replace("\"device_count\": 20", "\"device_count\": 0")).unwrap();
        assert_eq!(edgesim_scenario_from_json(bad.as_ptr(), &mut handle), EdgesimStatus::InvalidScenario);
        assert!(last_error().contains("device_count"));

        let garbage = CString::new("{not json").unwrap();
        assert_eq!(edgesim_scenario_from_json(garbage.as_ptr(), &mut handle), EdgesimStatus::InvalidScenario);

        let missing = CString::new("/nonexistent/scenario.json").unwrap();
        assert_eq!(edgesim_scenario_from_file(missing.as_ptr(), &mut handle), EdgesimStatus::Io);

        let h = load(SCENARIO);
        let mut out = EdgesimSummary::default();
        assert_eq!(edgesim_run(h, 7, 1, &mut out), EdgesimStatus::InvalidArgument);
        assert!(last_error().contains("engine"));
        assert_eq!(edgesim_run(h, 0, 1, ptr::null_mut()), EdgesimStatus::NullPointer);
        assert_eq!(edgesim_scenario_set_device_count(h, 0), EdgesimStatus::InvalidScenario);
        assert_eq!(edgesim_scenario_set_device_count(h, 5), EdgesimStatus::Ok);
        edgesim_scenario_free(h);
        edgesim_scenario_free(ptr::null_mut());
    }
}

#[test]
fn scenario_from_file() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/desk.json");
    let path = CString::new(path.to_str().unwrap()).unwrap();
    let mut handle = ptr::null_mut();
    unsafe {
        assert_eq!(edgesim_scenario_from_file(path.as_ptr(), &mut handle), EdgesimStatus::Ok);
        edgesim_scenario_free(handle);
    }
}

#[test]
fn ks_through_abi() {
    let a = [1.0, 2.0, 3.0, 4.0];
    let b = [2.0, 3.0, 4.0, 5.0];
    let mut r = EdgesimKsResult::default();
    unsafe {
        assert_eq!(edgesim_ks_test(a.as_ptr(), 4, b.as_ptr(), 4, &mut r), EdgesimStatus::Ok);
        assert!((r.d - 0.25).abs() < 1e-12);
        assert_eq!((r.n, r.m), (4, 4));
        assert_eq!(edgesim_ks_test(a.as_ptr(), 0, b.as_ptr(), 4, &mut r), EdgesimStatus::InvalidArgument);
        assert_eq!(edgesim_ks_test(ptr::null(), 4, b.as_ptr(), 4, &mut r), EdgesimStatus::NullPointer);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(edgesim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/edgesim.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in
        ["edgesim_run", "edgesim_ks_test", "edgesim_last_error", "EDGESIM_STATUS_PANIC", "EDGESIM_ENGINE_RENOVATED"]
    {
        assert!(text.contains(name), "header lacks {name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"edgesim.h\"\nint main(void) { EdgesimSummary s; EdgesimScenario *h = 0;\n\
         return edgesim_run(h, EDGESIM_ENGINE_BASELINE, 1, &s) == EDGESIM_STATUS_OK; }\n",
    )
    .unwrap();
    let Ok(status) = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler on PATH; header syntax not checked");
        return;
    };
    assert!(status.success());
}
