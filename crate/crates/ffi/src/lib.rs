//! C ABI for the coded-aperture toolkit.
//!
//! Every function returns a [`CaStatus`]; results go through out-pointers.
//! On failure a message is kept per thread and can be read with
//! [`ca_last_error`]. Priors and designs are opaque handles that the caller
//! frees with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use coded_aperture::flatseq::{flat_design, residue_sequence, ResidueFamily};
use coded_aperture::model::lmmse_from_power;
use coded_aperture::nazarov::{design_aperture, DesignOptions};
use coded_aperture::spectra::{beta, m_bound, power_spectrum};
use coded_aperture::waterfill::{lower_bound, optimal_rho};
use coded_aperture::{Aperture, DesignCertificate, Error, ImagingConfig, ScenePrior};

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NoResidueFamily = 3,
    CertificateFailed = 4,
    Noiseless = 5,
    CapExceeded = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Panic = 9,
}

/// Imaging parameters: scene length, exposure, thermal and shot noise.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CaConfig {
    pub n: usize,
    pub t: f64,
    pub w: f64,
    pub j: f64,
}

/// Opaque scene prior.
pub struct CaPrior {
    inner: ScenePrior,
}

/// Opaque designed mask with its certificate.
pub struct CaDesign {
    aperture: Aperture,
    certificate: DesignCertificate,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CaStatus {
    match e {
        Error::NoResidueFamily(_) => CaStatus::NoResidueFamily,
        Error::CertificateFailed { .. } => CaStatus::CertificateFailed,
        Error::Noiseless => CaStatus::Noiseless,
        Error::CapExceeded { .. } => CaStatus::CapExceeded,
        Error::Io(_) => CaStatus::Internal,
        _ => CaStatus::InvalidParameter,
    }
}

fn guard(f: impl FnOnce() -> Result<(), CaStatus>) -> CaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CaStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            CaStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, CaStatus>;
}

impl<T> OrStatus<T> for coded_aperture::Result<T> {
    fn or_status(self) -> Result<T, CaStatus> {
        self.map_err(|e| {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        })
    }
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), CaStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(CaStatus::NullPointer)
    } else {
        Ok(())
    }
}

fn config(c: &CaConfig) -> Result<ImagingConfig, CaStatus> {
    ImagingConfig::new(c.n, c.t, c.w, c.j).or_status()
}

unsafe fn prior_ref<'a>(p: *const CaPrior) -> Result<&'a ScenePrior, CaStatus> {
    nonnull(p, "prior")?;
    Ok(&(*p).inner)
}

unsafe fn copy_out(values: &[f64], out: *mut f64, len: usize) -> Result<(), CaStatus> {
    nonnull(out, "output buffer")?;
    if len < values.len() {
        set_error(format!("buffer holds {len} values, {} needed", values.len()));
        return Err(CaStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ca_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `β(n)`, the smallest mean absolute value over the basis.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_beta(n: usize, out: *mut f64) -> CaStatus {
    guard(|| {
        nonnull(out, "out")?;
        if n == 0 {
            set_error("n must be positive".into());
            return Err(CaStatus::InvalidParameter);
        }
        *out = beta(n);
        Ok(())
    })
}

/// `M(n) = (3π/2) β(n)^-2`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_m_bound(n: usize, out: *mut f64) -> CaStatus {
    guard(|| {
        nonnull(out, "out")?;
        if n == 0 {
            set_error("n must be positive".into());
            return Err(CaStatus::InvalidParameter);
        }
        *out = m_bound(n);
        Ok(())
    })
}

fn store_prior(p: coded_aperture::Result<ScenePrior>, out: *mut *mut CaPrior) -> Result<(), CaStatus> {
    nonnull(out, "out")?;
    let inner = p.or_status()?;
    unsafe { *out = Box::into_raw(Box::new(CaPrior { inner })) };
    Ok(())
}

/// Constant prior `d(x) = θ`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_prior_iid(theta: f64, out: *mut *mut CaPrior) -> CaStatus {
    guard(|| store_prior(ScenePrior::iid(theta), out))
}

/// `θ` up to `s - r`, zero from `s + r`, linear between.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_prior_bandlimited(
    theta: f64,
    s: f64,
    r: f64,
    out: *mut *mut CaPrior,
) -> CaStatus {
    guard(|| store_prior(ScenePrior::bandlimited(theta, s, r), out))
}

/// `θ (x0 / (x0 + x))^exponent`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_prior_power_law(
    theta: f64,
    exponent: f64,
    x0: f64,
    out: *mut *mut CaPrior,
) -> CaStatus {
    guard(|| store_prior(ScenePrior::power_law(theta, exponent, x0), out))
}

/// Tabulated shape on `[0, 1/2]`, scaled so that `d(0) = θ`.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_prior_table(
    theta: f64,
    values: *const f64,
    len: usize,
    out: *mut *mut CaPrior,
) -> CaStatus {
    guard(|| {
        nonnull(values, "values")?;
        let v = slice::from_raw_parts(values, len).to_vec();
        store_prior(ScenePrior::table(theta, v), out)
    })
}

/// # Safety
/// `prior` must come from a `ca_prior_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ca_prior_free(prior: *mut CaPrior) {
    if !prior.is_null() {
        drop(Box::from_raw(prior));
    }
}

/// Samples `d_i = d(i/n)/n` into `out[0..n]`.
///
/// # Safety
/// `prior` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ca_prior_sample(
    prior: *const CaPrior,
    n: usize,
    out: *mut f64,
    len: usize,
) -> CaStatus {
    guard(|| {
        let d = prior_ref(prior)?.sample(n).or_status()?;
        copy_out(&d, out, len)
    })
}

/// LMMSE of a 1D mask of length `config.n`.
///
/// # Safety
/// `prior` must be a live handle; `mask` must hold `len` doubles; `out` one write.
#[no_mangle]
pub unsafe extern "C" fn ca_lmmse(
    config: CaConfig,
    prior: *const CaPrior,
    mask: *const f64,
    len: usize,
    out: *mut f64,
) -> CaStatus {
    guard(|| {
        nonnull(mask, "mask")?;
        nonnull(out, "out")?;
        let c = self::config(&config)?;
        let d = prior_ref(prior)?.sample(c.n).or_status()?;
        let a = Aperture::mask(slice::from_raw_parts(mask, len).to_vec()).or_status()?;
        *out = coded_aperture::model::lmmse(&c, &d, &a).or_status()?;
        Ok(())
    })
}

/// LMMSE from a power spectrum `|â_i|²` and transmissivity, so that arbitrary
/// nonnegative vectors (the ideal lens included) can be scored.
///
/// # Safety
/// `prior` must be a live handle; `power` must hold `len` doubles; `out` one write.
#[no_mangle]
pub unsafe extern "C" fn ca_lmmse_from_power(
    config: CaConfig,
    prior: *const CaPrior,
    power: *const f64,
    len: usize,
    rho: f64,
    out: *mut f64,
) -> CaStatus {
    guard(|| {
        nonnull(power, "power")?;
        nonnull(out, "out")?;
        let c = self::config(&config)?;
        if len != c.n {
            set_error(format!("power has {len} entries, expected {}", c.n));
            return Err(CaStatus::InvalidParameter);
        }
        let d = prior_ref(prior)?.sample(c.n).or_status()?;
        *out = lmmse_from_power(&c, &d, slice::from_raw_parts(power, len), rho).or_status()?;
        Ok(())
    })
}

/// `|â_i|²` of a real vector.
///
/// # Safety
/// `a` must hold `len` doubles and `out` `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ca_power_spectrum(a: *const f64, len: usize, out: *mut f64) -> CaStatus {
    guard(|| {
        nonnull(a, "a")?;
        let p = power_spectrum(slice::from_raw_parts(a, len)).or_status()?;
        copy_out(&p, out, len)
    })
}

/// Waterfilling lower bound at transmissivity `rho`.
///
/// # Safety
/// `prior` must be a live handle; `out` one write.
#[no_mangle]
pub unsafe extern "C" fn ca_lower_bound(
    config: CaConfig,
    prior: *const CaPrior,
    rho: f64,
    out: *mut f64,
) -> CaStatus {
    guard(|| {
        nonnull(out, "out")?;
        let c = self::config(&config)?;
        let d = prior_ref(prior)?.sample(c.n).or_status()?;
        *out = lower_bound(&c, &d, rho).or_status()?;
        Ok(())
    })
}

/// Transmissivity minimizing the lower bound, and the minimum.
///
/// # Safety
/// `prior` must be a live handle; `rho` and `bound` one write each.
#[no_mangle]
pub unsafe extern "C" fn ca_optimal_rho(
    config: CaConfig,
    prior: *const CaPrior,
    rho: *mut f64,
    bound: *mut f64,
) -> CaStatus {
    guard(|| {
        nonnull(rho, "rho")?;
        nonnull(bound, "bound")?;
        let c = self::config(&config)?;
        let d = prior_ref(prior)?.sample(c.n).or_status()?;
        let o = optimal_rho(&c, &d).or_status()?;
        *rho = o.rho;
        *bound = o.bound;
        Ok(())
    })
}

/// Indicator of the nonzero `e`-th power residues mod `p` (plus 0 if asked).
///
/// # Safety
/// `out` must hold `len ≥ p` doubles.
#[no_mangle]
pub unsafe extern "C" fn ca_residue_sequence(
    p: u64,
    e: u32,
    include_zero: bool,
    out: *mut f64,
    len: usize,
) -> CaStatus {
    guard(|| {
        let f = ResidueFamily::new(p, e, include_zero).or_status()?;
        let a = residue_sequence(&f).or_status()?;
        copy_out(&a.values, out, len)
    })
}

fn store_design(aperture: Aperture, certificate: DesignCertificate, out: *mut *mut CaDesign) {
    let json = CString::new(certificate.to_json()).unwrap_or_default();
    let d = CaDesign { aperture, certificate, json };
    unsafe { *out = Box::into_raw(Box::new(d)) };
}

/// Residue mask of length `config.n` with its certificate.
///
/// # Safety
/// `prior` must be a live handle; `out` one write.
#[no_mangle]
pub unsafe extern "C" fn ca_design_flat(
    config: CaConfig,
    prior: *const CaPrior,
    out: *mut *mut CaDesign,
) -> CaStatus {
    guard(|| {
        nonnull(out, "out")?;
        let c = self::config(&config)?;
        let d = prior_ref(prior)?.sample(c.n).or_status()?;
        let fd = flat_design(&c, &d).or_status()?;
        store_design(fd.aperture, fd.certificate, out);
        Ok(())
    })
}

/// Prior-adapted mask from the coefficient problem, with its certificate.
///
/// # Safety
/// `prior` must be a live handle; `out` one write.
#[no_mangle]
pub unsafe extern "C" fn ca_design_nazarov(
    config: CaConfig,
    prior: *const CaPrior,
    seed: u64,
    out: *mut *mut CaDesign,
) -> CaStatus {
    guard(|| {
        nonnull(out, "out")?;
        let c = self::config(&config)?;
        let d = prior_ref(prior)?.sample(c.n).or_status()?;
        let nd = design_aperture(&c, &d, &DesignOptions::with_seed(seed)).or_status()?;
        store_design(nd.aperture, nd.certificate, out);
        Ok(())
    })
}

unsafe fn design_ref<'a>(d: *const CaDesign) -> Result<&'a CaDesign, CaStatus> {
    nonnull(d, "design")?;
    Ok(&*d)
}

/// Number of mask entries.
///
/// # Safety
/// `design` must be a live handle; `out` one write.
#[no_mangle]
pub unsafe extern "C" fn ca_design_len(design: *const CaDesign, out: *mut usize) -> CaStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = design_ref(design)?.aperture.values.len();
        Ok(())
    })
}

/// Copies the mask into `out`.
///
/// # Safety
/// `design` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ca_design_values(
    design: *const CaDesign,
    out: *mut f64,
    len: usize,
) -> CaStatus {
    guard(|| copy_out(&design_ref(design)?.aperture.values, out, len))
}

/// Whether the certificate passed.
///
/// # Safety
/// `design` must be a live handle; `out` one write.
#[no_mangle]
pub unsafe extern "C" fn ca_design_passed(design: *const CaDesign, out: *mut bool) -> CaStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = design_ref(design)?.certificate.pass;
        Ok(())
    })
}

/// Guaranteed exposure multiplier recorded in the certificate.
///
/// # Safety
/// `design` must be a live handle; `out` one write.
#[no_mangle]
pub unsafe extern "C" fn ca_design_penalty(design: *const CaDesign, out: *mut f64) -> CaStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = design_ref(design)?.certificate.penalty;
        Ok(())
    })
}

/// Transmissivity of the mask.
///
/// # Safety
/// `design` must be a live handle; `out` one write.
#[no_mangle]
pub unsafe extern "C" fn ca_design_rho(design: *const CaDesign, out: *mut f64) -> CaStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = design_ref(design)?.certificate.rho;
        Ok(())
    })
}

/// Certificate as a JSON string owned by the handle.
///
/// # Safety
/// `design` must be a live handle; the pointer dies with it.
#[no_mangle]
pub unsafe extern "C" fn ca_design_certificate_json(design: *const CaDesign) -> *const c_char {
    if design.is_null() {
        return ptr::null();
    }
    (*design).json.as_ptr()
}

/// # Safety
/// `design` must come from a `ca_design_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ca_design_free(design: *mut CaDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}
