use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use inf_rcs::synth::{generate_campaign, write_campaign, Scenario, CONFIG_FILE, DATASET_FILE};
use inf_rcs_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rcs_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn sampler_handle_is_deterministic_and_matches_core() {
    let triple = RcsTripleC {
        a_dbsm: -12.81,
        b1_db: 0.0,
        b2_db: 3.74,
        cap_k: 3.0,
    };
    let mut a = [0.0; 32];
    let mut b = [0.0; 32];
    for out in [&mut a, &mut b] {
        let mut s = ptr::null_mut();
        assert_eq!(
            unsafe { rcs_sampler_new(&triple, ptr::null(), 7, &mut s) },
            RcsStatus::Ok
        );
        assert_eq!(
            unsafe { rcs_sampler_fill(s, 0.0, 0.0, out.as_mut_ptr(), ptr::null_mut(), out.len()) },
            RcsStatus::Ok
        );
        unsafe { rcs_sampler_free(s) };
    }
    assert_eq!(a, b);

    let core = inf_rcs::sampler::sample_rcs(
        &inf_rcs::derive::standard("small_uav").unwrap(),
        &inf_rcs::sampler::SampleGeometry::monostatic(0.0),
        &mut inf_rcs::sampler::seeded_rng(7),
        32,
        &Default::default(),
    )
    .unwrap();
    for (x, d) in a.iter().zip(&core) {
        assert_eq!(x.to_bits(), d.rcs_m2.to_bits());
    }
}

#[test]
fn sampler_rejects_invalid_input() {
    let bad = RcsTripleC {
        a_dbsm: -12.81,
        b1_db: 0.0,
        b2_db: 3.74,
        cap_k: -1.0,
    };
    let mut s = ptr::null_mut();
    assert_ne!(
        unsafe { rcs_sampler_new(&bad, ptr::null(), 1, &mut s) },
        RcsStatus::Ok
    );
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { rcs_sampler_new(ptr::null(), ptr::null(), 1, &mut s) },
        RcsStatus::NullPointer
    );
    let name = CString::new("human").unwrap();
    assert_eq!(
        unsafe { rcs_sampler_new_standard(name.as_ptr(), ptr::null(), 1, &mut s) },
        RcsStatus::Ok
    );
    let mut one = [0.0];
    assert_eq!(
        unsafe { rcs_sampler_fill(s, 0.0, 0.0, one.as_mut_ptr(), ptr::null_mut(), 0) },
        RcsStatus::Domain
    );
    assert_eq!(
        unsafe { rcs_sampler_fill(s, 0.0, 0.0, ptr::null_mut(), ptr::null_mut(), 1) },
        RcsStatus::NullPointer
    );
    unsafe { rcs_sampler_free(s) };
    unsafe { rcs_sampler_free(ptr::null_mut()) };
}

#[test]
fn fit_and_derivation_round_trip() {
    let samples = [1.0, 4.0];
    let mut fit = RcsFit {
        mu: 0.0,
        sigma: 0.0,
        n: 0,
        ks: 0.0,
        mse: 0.0,
        degenerate: true,
    };
    assert_eq!(
        unsafe { rcs_fit_lognormal(samples.as_ptr(), 2, &mut fit) },
        RcsStatus::Ok
    );
    assert!((fit.mu - 2f64.ln()).abs() < 1e-12);
    assert!((fit.sigma - 2f64.ln()).abs() < 1e-12);
    assert!(!fit.degenerate);
    assert_eq!(
        unsafe { rcs_fit_lognormal(samples.as_ptr(), 1, &mut fit) },
        RcsStatus::Domain
    );

    let equal = [2.0, 2.0, 2.0];
    assert_eq!(
        unsafe { rcs_fit_lognormal(equal.as_ptr(), 3, &mut fit) },
        RcsStatus::Ok
    );
    assert!(fit.degenerate);

    let mut measured = RcsTripleC {
        a_dbsm: 0.0,
        b1_db: 0.0,
        b2_db: 0.0,
        cap_k: 0.0,
    };
    let mut standard = measured;
    let name = CString::new("small_uav").unwrap();
    assert_eq!(
        unsafe { rcs_standard(name.as_ptr(), &mut standard) },
        RcsStatus::Ok
    );
    measured.a_dbsm = -13.57;
    measured.b2_db = 3.065;
    measured.cap_k = 3.0;
    let (mut da, mut db) = (0.0, 0.0);
    assert_eq!(
        unsafe { rcs_compare(&measured, &standard, &mut da, &mut db) },
        RcsStatus::Ok
    );
    assert!((da - 0.76).abs() < 1e-9);
    assert!((db - 0.675).abs() < 1e-9);

    let freqs = [28.0, 28.0];
    let mu = [-3.0, -3.0];
    let sg = [1.0, 1.0];
    assert_eq!(
        unsafe {
            rcs_consolidate(
                freqs.as_ptr(),
                mu.as_ptr(),
                sg.as_ptr(),
                2,
                3.0,
                &mut measured,
            )
        },
        RcsStatus::Validation
    );
}

#[test]
fn calibration_identity_through_abi() {
    let (mut k, mut sigma) = (0.0, 0.0);
    let p_r = 4.0 * std::f64::consts::PI * 9.0;
    assert_eq!(
        unsafe { rcs_system_factor(28.0, p_r, 3.0, &mut k) },
        RcsStatus::Ok
    );
    assert!((k - 1.0).abs() < 1e-15);
    assert_eq!(
        unsafe { rcs_from_power(28.0, 0.25, k, &mut sigma) },
        RcsStatus::Ok
    );
    assert!((sigma - 0.25).abs() < 1e-15);
    assert_eq!(
        unsafe { rcs_system_factor(28.0, -1.0, 3.0, &mut k) },
        RcsStatus::Domain
    );
}

#[test]
fn pipeline_handle_reports_groups() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = Scenario {
        frequencies_ghz: vec![26.0, 28.0],
        snapshots_per_freq: 200,
        ..Scenario::default()
    };
    write_campaign(&generate_campaign(&scenario, 9).unwrap(), dir.path()).unwrap();
    let ds = CString::new(dir.path().join(DATASET_FILE).to_str().unwrap()).unwrap();
    let cfg = CString::new(dir.path().join(CONFIG_FILE).to_str().unwrap()).unwrap();

    let mut table = ptr::null_mut();
    assert_eq!(
        unsafe { rcs_pipeline_run(ds.as_ptr(), cfg.as_ptr(), &mut table) },
        RcsStatus::Ok
    );
    assert_eq!(unsafe { rcs_fit_table_len(table) }, 2);
    let mut row = RcsGroupFit {
        target: ptr::null(),
        freq_ghz: 0.0,
        fit: RcsFit {
            mu: 0.0,
            sigma: 0.0,
            n: 0,
            ks: 0.0,
            mse: 0.0,
            degenerate: false,
        },
        discarded: 0,
    };
    assert_eq!(
        unsafe { rcs_fit_table_get(table, 1, &mut row) },
        RcsStatus::Ok
    );
    assert_eq!(
        unsafe { CStr::from_ptr(row.target) }.to_str().unwrap(),
        "small_uav"
    );
    assert_eq!(row.freq_ghz, 28.0);
    assert_eq!(row.fit.n, 200);
    assert_eq!(
        unsafe { rcs_fit_table_get(table, 2, &mut row) },
        RcsStatus::Domain
    );
    unsafe { rcs_fit_table_free(table) };

    // Without the config the sidecar is unknown, so calibration is missing.
    let mut table = ptr::null_mut();
    assert_eq!(
        unsafe { rcs_pipeline_run(ds.as_ptr(), ptr::null(), &mut table) },
        RcsStatus::Validation
    );
    assert!(
        last_error().contains("no calibration power"),
        "{}",
        last_error()
    );

    let missing = CString::new("/nonexistent/dataset.jsonl").unwrap();
    assert_eq!(
        unsafe { rcs_pipeline_run(missing.as_ptr(), ptr::null(), &mut table) },
        RcsStatus::Io
    );
}

fn target_dir() -> PathBuf {
    // Integration test binaries live in <target>/<profile>/deps.
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libinf_rcs_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is on PATH");
    assert!(status.success(), "C smoke program failed to build");
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
