//! C ABI over `inf_rcs`.
//!
//! Every function returns an [`RcsStatus`]; results are written through out
//! pointers only on `RCS_STATUS_OK`. After a failure, [`rcs_last_error`]
//! returns a message for the calling thread. Handles are opaque and must be
//! released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use inf_rcs::derive::{self, consolidate};
use inf_rcs::error::Error;
use inf_rcs::ingest::{parse_config, parse_dataset, RunConfig};
use inf_rcs::model::{B1Spec, Frequency, LognormalFit, PowerValue, RcsTriple, SystemFactor};
use inf_rcs::pipeline::{self, GroupFit};
use inf_rcs::sampler::{
    sample_rcs, seeded_rng, B2Interpretation, CapMode, SampleGeometry, SamplerOptions,
};
use inf_rcs::{calibration, statfit};
use rand_chacha::ChaCha8Rng;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcsStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Validation = 3,
    Degenerate = 4,
    Unsupported = 5,
    Io = 6,
    InvalidUtf8 = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcsB2Interpretation {
    CoefficientOfVariation = 0,
    LogStdDevDb = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcsCapMode {
    MeanRelative = 0,
    AboveUnitMean = 1,
    Disabled = 2,
}

/// Angle-invariant model triple; B1 is a constant in dB.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcsTripleC {
    pub a_dbsm: f64,
    pub b1_db: f64,
    pub b2_db: f64,
    pub cap_k: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcsSamplerOptions {
    pub interpretation: RcsB2Interpretation,
    pub cap_mode: RcsCapMode,
    pub bypass_b2: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcsFit {
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
    pub ks: f64,
    pub mse: f64,
    pub degenerate: bool,
}

/// One row of a pipeline result. `target` is owned by the table.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RcsGroupFit {
    pub target: *const c_char,
    pub freq_ghz: f64,
    pub fit: RcsFit,
    pub discarded: usize,
}

/// Seeded sampler bound to one triple.
pub struct RcsSampler {
    triple: RcsTriple,
    opts: SamplerOptions,
    rng: ChaCha8Rng,
}

/// Fitted groups produced by [`rcs_pipeline_run`].
pub struct RcsFitTable {
    rows: Vec<(CString, GroupFit)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RcsStatus {
    match err {
        Error::Domain(_) => RcsStatus::Domain,
        Error::Degenerate(_) => RcsStatus::Degenerate,
        Error::Validation(_) => RcsStatus::Validation,
        Error::Unsupported(_) => RcsStatus::Unsupported,
        Error::Io { .. } => RcsStatus::Io,
    }
}

struct Failure(RcsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(RcsStatus::NullPointer, format!("`{name}` is null"))
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RcsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RcsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            RcsStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RcsStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

fn triple_from_c(t: &RcsTripleC) -> RcsTriple {
    RcsTriple::new(t.a_dbsm, B1Spec::Constant { db: t.b1_db }, t.b2_db, t.cap_k)
}

fn triple_to_c(t: &RcsTriple) -> Result<RcsTripleC, Failure> {
    let b1_db = t.b1.constant_db().ok_or_else(|| {
        Failure(
            RcsStatus::Unsupported,
            "only constant B1 crosses the C ABI".into(),
        )
    })?;
    Ok(RcsTripleC {
        a_dbsm: t.a_dbsm,
        b1_db,
        b2_db: t.b2_db,
        cap_k: t.cap_k,
    })
}

fn fit_to_c(f: &LognormalFit) -> RcsFit {
    RcsFit {
        mu: f.mu,
        sigma: f.sigma,
        n: f.n,
        ks: f.ks,
        mse: f.mse,
        degenerate: f.degenerate,
    }
}

fn options_from_c(o: Option<&RcsSamplerOptions>) -> SamplerOptions {
    let Some(o) = o else {
        return SamplerOptions::default();
    };
    SamplerOptions {
        interpretation: match o.interpretation {
            RcsB2Interpretation::CoefficientOfVariation => B2Interpretation::CoefficientOfVariation,
            RcsB2Interpretation::LogStdDevDb => B2Interpretation::LogStdDevDb,
        },
        cap: match o.cap_mode {
            RcsCapMode::MeanRelative => CapMode::MeanRelative,
            RcsCapMode::AboveUnitMean => CapMode::AboveUnitMean,
            RcsCapMode::Disabled => CapMode::Disabled,
        },
        bypass_b2: o.bypass_b2,
    }
}

/// Message describing the last failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rcs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default sampler options.
#[no_mangle]
pub extern "C" fn rcs_sampler_options_default() -> RcsSamplerOptions {
    RcsSamplerOptions {
        interpretation: RcsB2Interpretation::CoefficientOfVariation,
        cap_mode: RcsCapMode::MeanRelative,
        bypass_b2: false,
    }
}

fn make_sampler(
    triple: RcsTriple,
    opts: SamplerOptions,
    seed: u64,
) -> Result<Box<RcsSampler>, Failure> {
    // Probe once so invalid triples fail at construction.
    sample_rcs(
        &triple,
        &SampleGeometry::monostatic(0.0),
        &mut seeded_rng(seed),
        1,
        &opts,
    )?;
    Ok(Box::new(RcsSampler {
        triple,
        opts,
        rng: seeded_rng(seed),
    }))
}

/// Creates a sampler for `triple`. `opts` may be null for defaults.
///
/// # Safety
/// `triple` and `out` must be valid pointers; `opts` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_sampler_new(
    triple: *const RcsTripleC,
    opts: *const RcsSamplerOptions,
    seed: u64,
    out: *mut *mut RcsSampler,
) -> RcsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let t = triple.as_ref().ok_or_else(|| null("triple"))?;
        let s = make_sampler(triple_from_c(t), options_from_c(opts.as_ref()), seed)?;
        *out = Box::into_raw(s);
        Ok(())
    })
}

/// Creates a sampler for a builtin standard such as `"small_uav"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid; `opts` must
/// be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_sampler_new_standard(
    name: *const c_char,
    opts: *const RcsSamplerOptions,
    seed: u64,
    out: *mut *mut RcsSampler,
) -> RcsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let name = str_arg(name, "name")?;
        let t = derive::standard(name).ok_or_else(|| {
            Failure(
                RcsStatus::Validation,
                format!("no builtin standard named `{name}`"),
            )
        })?;
        *out = Box::into_raw(make_sampler(t, options_from_c(opts.as_ref()), seed)?);
        Ok(())
    })
}

/// Draws `n` realizations at the given azimuths (equal azimuths are treated
/// as monostatic). `rcs_m2` receives the RCS; `b2_linear` may be null.
///
/// # Safety
/// `sampler` must come from `rcs_sampler_new*`; `rcs_m2` must hold `n`
/// doubles; `b2_linear` must be null or hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn rcs_sampler_fill(
    sampler: *mut RcsSampler,
    incident_az_deg: f64,
    scattered_az_deg: f64,
    rcs_m2: *mut f64,
    b2_linear: *mut f64,
    n: usize,
) -> RcsStatus {
    guard(|| {
        let s = out_ref(sampler, "sampler")?;
        if rcs_m2.is_null() {
            return Err(null("rcs_m2"));
        }
        let geom = if incident_az_deg == scattered_az_deg {
            SampleGeometry::monostatic(incident_az_deg)
        } else {
            SampleGeometry::bistatic(incident_az_deg, scattered_az_deg)
        };
        let draws = sample_rcs(&s.triple, &geom, &mut s.rng, n, &s.opts)?;
        let rcs = std::slice::from_raw_parts_mut(rcs_m2, n);
        for (o, d) in rcs.iter_mut().zip(&draws) {
            *o = d.rcs_m2;
        }
        if !b2_linear.is_null() {
            let b2 = std::slice::from_raw_parts_mut(b2_linear, n);
            for (o, d) in b2.iter_mut().zip(&draws) {
                *o = d.b2_linear;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `sampler` must be null or come from `rcs_sampler_new*` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rcs_sampler_free(sampler: *mut RcsSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Maximum-likelihood log-normal fit with KS and CDF-MSE scores.
///
/// # Safety
/// `samples` must hold `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_fit_lognormal(
    samples: *const f64,
    n: usize,
    out: *mut RcsFit,
) -> RcsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let fit = statfit::fit_samples(slice_arg(samples, n, "samples")?)?;
        *out = fit_to_c(&fit);
        Ok(())
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_a_dbsm(mu: f64, sigma: f64, out: *mut f64) -> RcsStatus {
    guard(|| {
        *out_ref(out, "out")? = derive::a_dbsm(mu, sigma)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_b2_db(sigma: f64, out: *mut f64) -> RcsStatus {
    guard(|| {
        *out_ref(out, "out")? = derive::b2_db(sigma)?;
        Ok(())
    })
}

/// Consolidates per-carrier fits `(freq_ghz[i], mu[i], sigma[i])` into one
/// triple with B1 = 0 dB and the given cap.
///
/// # Safety
/// The three arrays must hold `n` doubles each; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_consolidate(
    freq_ghz: *const f64,
    mu: *const f64,
    sigma: *const f64,
    n: usize,
    cap_k: f64,
    out: *mut RcsTripleC,
) -> RcsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let freqs = slice_arg(freq_ghz, n, "freq_ghz")?;
        let mus = slice_arg(mu, n, "mu")?;
        let sigmas = slice_arg(sigma, n, "sigma")?;
        let mut fits = std::collections::BTreeMap::new();
        for i in 0..n {
            let f = Frequency::from_ghz(freqs[i])?;
            if fits
                .insert(f, LognormalFit::from_params(mus[i], sigmas[i]))
                .is_some()
            {
                return Err(Failure(
                    RcsStatus::Validation,
                    format!("{f} appears more than once"),
                ));
            }
        }
        *out = triple_to_c(&consolidate(&fits, B1Spec::default(), cap_k)?)?;
        Ok(())
    })
}

/// Absolute deviations of `triple` from `standard`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_compare(
    triple: *const RcsTripleC,
    standard: *const RcsTripleC,
    delta_a_db: *mut f64,
    delta_b2_db: *mut f64,
) -> RcsStatus {
    guard(|| {
        let t = triple.as_ref().ok_or_else(|| null("triple"))?;
        let s = standard.as_ref().ok_or_else(|| null("standard"))?;
        let da = out_ref(delta_a_db, "delta_a_db")?;
        let db = out_ref(delta_b2_db, "delta_b2_db")?;
        let d = derive::compare_to_standard(
            &triple_from_c(t),
            &triple_from_c(s),
            derive::DEFAULT_TOLERANCE_DB,
        )?;
        *da = d.delta_a_db;
        *db = d.delta_b2_db;
        Ok(())
    })
}

/// Builtin standardized triple by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_standard(name: *const c_char, out: *mut RcsTripleC) -> RcsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let name = str_arg(name, "name")?;
        let t = derive::standard(name).ok_or_else(|| {
            Failure(
                RcsStatus::Validation,
                format!("no builtin standard named `{name}`"),
            )
        })?;
        *out = triple_to_c(&t)?;
        Ok(())
    })
}

/// System factor K = P_r / (4π d²) for calibration power `p_r` at distance `d_m`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_system_factor(
    freq_ghz: f64,
    p_r: f64,
    d_m: f64,
    out: *mut f64,
) -> RcsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let k =
            calibration::system_factor(Frequency::from_ghz(freq_ghz)?, PowerValue::new(p_r)?, d_m)?;
        *out = k.k_cal;
        Ok(())
    })
}

/// RCS in m² from differential target power and system factor.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_from_power(
    freq_ghz: f64,
    p_tar: f64,
    k_cal: f64,
    out: *mut f64,
) -> RcsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let k = SystemFactor {
            freq: Frequency::from_ghz(freq_ghz)?,
            k_cal,
        };
        *out = calibration::rcs_from_power(PowerValue::new(p_tar)?, &k)?;
        Ok(())
    })
}

/// Runs ingest, calibration, and fitting on a dataset file. `config_path`
/// may be null for the default configuration.
///
/// # Safety
/// `dataset_path` must be a NUL-terminated string; `config_path` must be
/// null or one; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_pipeline_run(
    dataset_path: *const c_char,
    config_path: *const c_char,
    out: *mut *mut RcsFitTable,
) -> RcsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = if config_path.is_null() {
            RunConfig::default()
        } else {
            parse_config(Path::new(str_arg(config_path, "config_path")?))?
        };
        let ds = parse_dataset(Path::new(str_arg(dataset_path, "dataset_path")?))?
            .with_geometry(cfg.geometry)?;
        let fits = pipeline::run(&ds, &cfg)?;
        let rows = fits
            .into_iter()
            .map(|g| {
                let name =
                    CString::new(g.target.replace('\0', " ")).expect("interior NULs removed");
                (name, g)
            })
            .collect();
        *out = Box::into_raw(Box::new(RcsFitTable { rows }));
        Ok(())
    })
}

/// Number of rows, or 0 for a null table.
///
/// # Safety
/// `table` must be null or come from `rcs_pipeline_run`.
#[no_mangle]
pub unsafe extern "C" fn rcs_fit_table_len(table: *const RcsFitTable) -> usize {
    table.as_ref().map_or(0, |t| t.rows.len())
}

/// Copies row `index` into `out`; its `target` string lives as long as the table.
///
/// # Safety
/// `table` must come from `rcs_pipeline_run`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcs_fit_table_get(
    table: *const RcsFitTable,
    index: usize,
    out: *mut RcsGroupFit,
) -> RcsStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        let out = out_ref(out, "out")?;
        let (name, g) = t.rows.get(index).ok_or_else(|| {
            Failure(
                RcsStatus::Domain,
                format!("row {index} out of range (len {})", t.rows.len()),
            )
        })?;
        *out = RcsGroupFit {
            target: name.as_ptr(),
            freq_ghz: g.freq.ghz(),
            fit: fit_to_c(&g.fit),
            discarded: g.discarded,
        };
        Ok(())
    })
}

/// # Safety
/// `table` must be null or come from `rcs_pipeline_run` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rcs_fit_table_free(table: *mut RcsFitTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping_covers_every_error() {
        assert_eq!(status_of(&Error::domain("x")), RcsStatus::Domain);
        assert_eq!(status_of(&Error::invalid("x")), RcsStatus::Validation);
        assert_eq!(
            status_of(&Error::Degenerate("x".into())),
            RcsStatus::Degenerate
        );
        assert_eq!(
            status_of(&Error::Unsupported("x".into())),
            RcsStatus::Unsupported
        );
        let io = Error::io("p", std::io::Error::other("x"));
        assert_eq!(status_of(&io), RcsStatus::Io);
    }

    #[test]
    fn panics_become_status() {
        assert_eq!(guard(|| panic!("boom")), RcsStatus::Panic);
        let msg = unsafe { CStr::from_ptr(rcs_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }
}
