//! C ABI over the relaxkin engine.
//!
//! Every entry point returns an [`RkStatus`]; results go through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`rk_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use relaxkin::bloch_redfield::{Beta, SpectralDensity};
use relaxkin::diffusion::{dephasing_radius, xi_from_gap, DiffusionParams};
use relaxkin::liouville::{propagate, DensityMatrix};
use relaxkin::radical_pair::{
    coherence_decay_rate, coherent_st0_state, generator, rate_elements, recombination_yields, rp_basis,
    ReactionModel, RpHamiltonian, Variant, S, T_ZERO,
};
use relaxkin::three_state::{closed_form_rates, ThssParams};
use relaxkin::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

pub const RK_VARIANT_HABERKORN: u32 = 0;
pub const RK_VARIANT_GENERALIZED: u32 = 1;
pub const RK_VARIANT_JONES_HORE: u32 = 2;
pub const RK_VARIANT_DEPHASING_ONLY: u32 = 3;

pub const RK_INITIAL_SINGLET: u32 = 0;
pub const RK_INITIAL_TRIPLET_ZERO: u32 = 1;
pub const RK_INITIAL_SINGLET_TRIPLET_ZERO: u32 = 2;

/// Reaction model plus the pair Hamiltonian (zero until set).
pub struct RkPairModel {
    model: ReactionModel,
    hamiltonian: RpHamiltonian,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RkRateElements {
    pub k_ss: f64,
    pub k_tt: f64,
    pub k_st: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RkYields {
    pub phi_s: f64,
    pub phi_t: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RkThreeStateRates {
    pub w11: f64,
    pub w22: f64,
    pub wn: f64,
    pub w01: f64,
    pub w02: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> RkStatus {
    match e {
        Error::NonFinite(_)
        | Error::StepSizeUnderflow { .. }
        | Error::NonDecaying { .. }
        | Error::Singular(_)
        | Error::NoLinearWindow { .. } => RkStatus::Numerical,
        _ => RkStatus::InvalidArgument,
    }
}

struct Fail(RkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RkStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RkStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RkStatus::Panic
        }
    }
}

fn variant(code: u32) -> Result<Variant, Fail> {
    Ok(match code {
        RK_VARIANT_HABERKORN => Variant::Haberkorn,
        RK_VARIANT_GENERALIZED => Variant::Generalized,
        RK_VARIANT_JONES_HORE => Variant::JonesHore,
        RK_VARIANT_DEPHASING_ONLY => Variant::DephasingOnly,
        _ => return Err(Fail(RkStatus::InvalidArgument, format!("unknown variant code {code}"))),
    })
}

fn initial_state(code: u32) -> Result<DensityMatrix, Fail> {
    Ok(match code {
        RK_INITIAL_SINGLET => DensityMatrix::basis_state(&rp_basis(), S)?,
        RK_INITIAL_TRIPLET_ZERO => DensityMatrix::basis_state(&rp_basis(), T_ZERO)?,
        RK_INITIAL_SINGLET_TRIPLET_ZERO => coherent_st0_state(),
        _ => return Err(Fail(RkStatus::InvalidArgument, format!("unknown initial state code {code}"))),
    })
}

unsafe fn model_ref<'a>(m: *const RkPairModel) -> Result<&'a RkPairModel, Fail> {
    m.as_ref().ok_or_else(|| null("model"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies the calling thread's last error message into `buf` as a
/// nul-terminated string and returns its length without the nul. Returns 0
/// when there is no message. A short buffer gets a truncated message.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates a reaction model. `kappa_st` is used by the generalized variant
/// only; the dephasing-only variant takes its rate from `kappa_s`.
///
/// # Safety
/// `out` must be a valid pointer. The handle must be released with
/// [`rk_pair_model_free`].
#[no_mangle]
pub unsafe extern "C" fn rk_pair_model_new(
    variant_code: u32,
    kappa_s: f64,
    kappa_t: f64,
    kappa_st: f64,
    out: *mut *mut RkPairModel,
) -> RkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let v = variant(variant_code)?;
        let model = match v {
            Variant::DephasingOnly => ReactionModel::dephasing_only(kappa_s)?,
            _ => ReactionModel::from_variant(v, kappa_s, kappa_t, kappa_st)?,
        };
        let hamiltonian = RpHamiltonian { omega_mean: 0.0, delta_omega: 0.0, j_exchange: 0.0 };
        *out = Box::into_raw(Box::new(RkPairModel { model, hamiltonian }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`rk_pair_model_new`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn rk_pair_model_free(model: *mut RkPairModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Sets the mean Zeeman frequency, the Zeeman difference and the exchange
/// coupling, all in rad/s.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rk_pair_model_set_hamiltonian(
    model: *mut RkPairModel,
    omega_mean: f64,
    delta_omega: f64,
    j_exchange: f64,
) -> RkStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        let h = RpHamiltonian { omega_mean, delta_omega, j_exchange };
        h.matrix()?;
        m.hamiltonian = h;
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_pair_rate_elements(model: *const RkPairModel, out: *mut RkRateElements) -> RkStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out_ref(out, "out")?;
        let k = rate_elements(&m.model)?;
        *out = RkRateElements { k_ss: k.k_ss, k_tt: k.k_tt, k_st: k.k_st };
        Ok(())
    })
}

/// Singlet and triplet recombination yields from the given initial state.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_pair_yields(model: *const RkPairModel, initial: u32, out: *mut RkYields) -> RkStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out_ref(out, "out")?;
        let y = recombination_yields(&m.model, &m.hamiltonian, &initial_state(initial)?)?;
        *out = RkYields { phi_s: y.phi_s, phi_t: y.phi_t };
        Ok(())
    })
}

/// Fitted decay rate of the S-T0 coherence, and the relative fit residual.
///
/// # Safety
/// `model` must be a live handle; `rate` and `residual` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rk_pair_coherence_rate(
    model: *const RkPairModel,
    rate: *mut f64,
    residual: *mut f64,
) -> RkStatus {
    guard(|| {
        let m = model_ref(model)?;
        let rate = out_ref(rate, "rate")?;
        let residual = out_ref(residual, "residual")?;
        let fit = coherence_decay_rate(&m.model, &m.hamiltonian)?;
        *rate = fit.rate;
        *residual = fit.residual;
        Ok(())
    })
}

/// Propagates from `initial` and writes the four populations (S, T+, T0,
/// T-) at each of the `n_times` times, row by row, into `populations`.
/// `capacity` is the length of `populations` in doubles.
///
/// # Safety
/// `times` must point to `n_times` readable doubles and `populations` to
/// `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rk_pair_propagate(
    model: *const RkPairModel,
    initial: u32,
    times: *const f64,
    n_times: usize,
    populations: *mut f64,
    capacity: usize,
) -> RkStatus {
    guard(|| {
        let m = model_ref(model)?;
        if times.is_null() {
            return Err(null("times"));
        }
        if populations.is_null() {
            return Err(null("populations"));
        }
        let need = n_times.checked_mul(4).ok_or_else(|| Fail(RkStatus::InvalidArgument, "too many times".into()))?;
        if capacity < need {
            return Err(Fail(RkStatus::BufferTooSmall, format!("need {need} doubles, got {capacity}")));
        }
        let times = std::slice::from_raw_parts(times, n_times);
        let out = std::slice::from_raw_parts_mut(populations, need);
        let prop = propagate(&generator(&m.model, &m.hamiltonian)?, &initial_state(initial)?, times)?;
        for (row, state) in out.chunks_exact_mut(4).zip(prop.states()) {
            for (i, slot) in row.iter_mut().enumerate() {
                *slot = state.as_operator().get(i, i).re;
            }
        }
        Ok(())
    })
}

/// Closed-form three-state rates for a Lorentzian transverse bath.
/// Pass `INFINITY` as `beta_s` for the zero-temperature limit.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_three_state_rates(
    omega0: f64,
    omega_s: f64,
    beta_s: f64,
    amplitude: f64,
    tau_c: f64,
    out: *mut RkThreeStateRates,
) -> RkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let beta = if beta_s == f64::INFINITY { Beta::Infinite } else { Beta::Finite(beta_s) };
        let p = ThssParams::new(omega0, omega_s, beta, SpectralDensity::lorentzian(amplitude, tau_c)?)?;
        let r = closed_form_rates(&p)?;
        *out = RkThreeStateRates { w11: r.w11, w22: r.w22, wn: r.wn, w01: r.w01, w02: r.w02 };
        Ok(())
    })
}

/// Dephasing radius in cm for contact distance `d_cm`, diffusion
/// coefficient `diffusion_cm2_per_s`, exchange decay `alpha_per_cm` and
/// exchange amplitude `j0_per_s`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_dephasing_radius(
    d_cm: f64,
    diffusion_cm2_per_s: f64,
    alpha_per_cm: f64,
    j0_per_s: f64,
    out: *mut f64,
) -> RkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = DiffusionParams { d: d_cm, diffusion: diffusion_cm2_per_s, alpha: alpha_per_cm, j0: j0_per_s, ..Default::default() };
        *out = dephasing_radius(&p)?;
        Ok(())
    })
}

/// Yield sensitivity to the radius gap `delta_l_cm`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_yield_sensitivity(
    q_per_s: f64,
    delta_l_cm: f64,
    diffusion_cm2_per_s: f64,
    out: *mut f64,
) -> RkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = xi_from_gap(q_per_s, delta_l_cm, diffusion_cm2_per_s)?.xi;
        Ok(())
    })
}
