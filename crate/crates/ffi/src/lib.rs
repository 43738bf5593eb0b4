//! C ABI over the simulator.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns a [`GgStatus`]; on failure the message is
//! available from [`gg_last_error_message`] on the same thread until the
//! next failing call.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use geogate::experiments::{
    run_gate_suite, run_interferometer, run_prep_check, ExperimentConfig, GateKind, SweepRecord, SweepVariant,
};
use geogate::phase::fit_unconventional;
use geogate::sequence::{compile_sequence, parse_sequence, CompiledProgram};
use geogate::spin::{FrameSpec, NoiseConfig, SpinSystem};
use geogate::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    NonUnitary = 4,
    CheckFailed = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GgFrame {
    OnResonance = 0,
    ConditionalB = 1,
    SingleQubitA = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GgVariant {
    Up = 0,
    Mirror = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GgGate {
    U1 = 0,
    U2 = 1,
    Uc = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GgSweepRecord {
    pub theta: f64,
    pub phase_measured: f64,
    pub gamma_dynamic: f64,
    pub gamma_geometric: f64,
    pub variant: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GgFit {
    pub alpha_g: f64,
    pub eta: f64,
    pub max_residual: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GgGateResult {
    /// A `GgGate` value.
    pub gate: u32,
    pub duration: f64,
    pub unitary_distance: f64,
    pub six_state: f64,
    pub haar: f64,
    pub process: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GgPrepReport {
    pub lambda: f64,
    pub mu: f64,
    pub residual: f64,
}

/// Spin-system constants.
pub struct GgSystem(SpinSystem);

/// A compiled pulse program.
pub struct GgProgram(CompiledProgram);

/// Experiment configuration.
pub struct GgConfig(ExperimentConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GgStatus {
    match e {
        Error::Parse(_) => GgStatus::Parse,
        Error::NonUnitaryEvent => GgStatus::NonUnitary,
        Error::Io(_) => GgStatus::Io,
        e if e.is_check_failure() => GgStatus::CheckFailed,
        _ => GgStatus::InvalidArgument,
    }
}

struct Failure(GgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GgStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            GgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(GgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failure on this thread, or null. Owned by the
/// library.
#[no_mangle]
pub extern "C" fn gg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default constants of the two-spin sample. Never null.
#[no_mangle]
pub extern "C" fn gg_system_default() -> *mut GgSystem {
    Box::into_raw(Box::new(GgSystem(SpinSystem::default())))
}

/// Larmor frequencies in rad/s, `j_hz` in Hz, T2 times in seconds.
///
/// # Safety
/// `out` must be a valid pointer to a `GgSystem*`.
#[no_mangle]
pub unsafe extern "C" fn gg_system_new(
    omega_a: f64,
    omega_b: f64,
    j_hz: f64,
    t2_a: f64,
    t2_b: f64,
    out: *mut *mut GgSystem,
) -> GgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let sys = SpinSystem::new(omega_a, omega_b, j_hz, t2_a, t2_b)?;
        *out = Box::into_raw(Box::new(GgSystem(sys)));
        Ok(())
    })
}

/// # Safety
/// `sys` must come from this library and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn gg_system_free(sys: *mut GgSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Parses and compiles `text`. `names`/`values` bind `n_bindings` free
/// symbols such as `theta`.
///
/// # Safety
/// Strings must be NUL-terminated; arrays must hold `n_bindings` entries.
#[no_mangle]
pub unsafe extern "C" fn gg_program_compile(
    sys: *const GgSystem,
    text: *const c_char,
    frame: GgFrame,
    names: *const *const c_char,
    values: *const f64,
    n_bindings: usize,
    out: *mut *mut GgProgram,
) -> GgStatus {
    guard(|| {
        let sys = &ref_arg(sys, "sys")?.0;
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        let mut bindings = HashMap::new();
        if n_bindings > 0 {
            if names.is_null() || values.is_null() {
                return Err(null("bindings"));
            }
            for k in 0..n_bindings {
                bindings.insert(str_arg(*names.add(k), "binding name")?.to_string(), *values.add(k));
            }
        }
        let frame = match frame {
            GgFrame::OnResonance => FrameSpec::on_resonance(),
            GgFrame::ConditionalB => FrameSpec::conditional_b(sys),
            GgFrame::SingleQubitA => FrameSpec::single_qubit_a(sys),
        };
        let ast = parse_sequence(text).map_err(Error::from)?;
        let prog = compile_sequence(&ast, sys, &frame, &bindings)?;
        *out = Box::into_raw(Box::new(GgProgram(prog)));
        Ok(())
    })
}

/// # Safety
/// `prog` must come from this library and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn gg_program_free(prog: *mut GgProgram) {
    if !prog.is_null() {
        drop(Box::from_raw(prog));
    }
}

/// Total delay time in seconds.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_program_duration(prog: *const GgProgram, out: *mut f64) -> GgStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(prog, "prog")?.0.total_duration();
        Ok(())
    })
}

/// Noiseless 4×4 propagator, row-major, split into real and imaginary
/// parts. Fails with `NON_UNITARY` if the program contains a crusher.
///
/// # Safety
/// `re` and `im` must each point to 16 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gg_program_net_unitary(
    prog: *const GgProgram,
    sys: *const GgSystem,
    re: *mut f64,
    im: *mut f64,
) -> GgStatus {
    guard(|| {
        let prog = &ref_arg(prog, "prog")?.0;
        let sys = &ref_arg(sys, "sys")?.0;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let u = prog.net_unitary(sys, &NoiseConfig::none())?;
        for r in 0..4 {
            for c in 0..4 {
                *re.add(4 * r + c) = u.matrix()[(r, c)].re;
                *im.add(4 * r + c) = u.matrix()[(r, c)].im;
            }
        }
        Ok(())
    })
}

/// Default experiment configuration. Never null.
#[no_mangle]
pub extern "C" fn gg_config_default() -> *mut GgConfig {
    Box::into_raw(Box::new(GgConfig(ExperimentConfig::default())))
}

/// Configuration from TOML text.
///
/// # Safety
/// `toml` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_config_from_toml(toml: *const c_char, out: *mut *mut GgConfig) -> GgStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(GgConfig(ExperimentConfig::from_toml_str(text)?)));
        Ok(())
    })
}

/// Switches T2 dephasing on or off.
///
/// # Safety
/// `cfg` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_config_set_noise(cfg: *mut GgConfig, enabled: bool) -> GgStatus {
    guard(|| {
        let cfg = &mut out_arg(cfg, "cfg")?.0;
        cfg.noise.enabled = enabled;
        if enabled {
            cfg.noise.dephasing_enabled = true;
        }
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn gg_config_free(cfg: *mut GgConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

fn record_out(r: &SweepRecord) -> GgSweepRecord {
    GgSweepRecord {
        theta: r.theta,
        phase_measured: r.phase_measured,
        gamma_dynamic: r.gamma_dynamic,
        gamma_geometric: r.gamma_geometric,
        variant: match r.loop_variant {
            SweepVariant::Up => GgVariant::Up as u32,
            SweepVariant::Mirror => GgVariant::Mirror as u32,
        },
    }
}

/// One interferometer run at polar angle `theta`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_interferometer(
    cfg: *const GgConfig,
    theta: f64,
    variant: GgVariant,
    out: *mut GgSweepRecord,
) -> GgStatus {
    guard(|| {
        let cfg = &ref_arg(cfg, "cfg")?.0;
        let out = out_arg(out, "out")?;
        let v = match variant {
            GgVariant::Up => SweepVariant::Up,
            GgVariant::Mirror => SweepVariant::Mirror,
        };
        *out = record_out(&run_interferometer(theta, v, cfg)?);
        Ok(())
    })
}

/// Least-squares `γd = αg + η·γg` over `n` points.
///
/// # Safety
/// `gamma_d` and `gamma_g` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn gg_fit_unconventional(
    gamma_d: *const f64,
    gamma_g: *const f64,
    n: usize,
    out: *mut GgFit,
) -> GgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if n > 0 && (gamma_d.is_null() || gamma_g.is_null()) {
            return Err(null("phase arrays"));
        }
        let pts: Vec<(f64, f64)> = (0..n).map(|k| (*gamma_d.add(k), *gamma_g.add(k))).collect();
        let fit = fit_unconventional(&pts)?;
        *out = GgFit { alpha_g: fit.alpha_g, eta: fit.eta, max_residual: fit.max_residual };
        Ok(())
    })
}

/// Fidelities of U1, U2 and Uc, in that order.
///
/// # Safety
/// `out` must point to 3 writable `GgGateResult`s.
#[no_mangle]
pub unsafe extern "C" fn gg_gate_suite(cfg: *const GgConfig, out: *mut GgGateResult) -> GgStatus {
    guard(|| {
        let cfg = &ref_arg(cfg, "cfg")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        for (k, e) in run_gate_suite(cfg)?.iter().enumerate() {
            *out.add(k) = GgGateResult {
                gate: match e.gate {
                    GateKind::U1 => GgGate::U1,
                    GateKind::U2 => GgGate::U2,
                    GateKind::Uc => GgGate::Uc,
                } as u32,
                duration: e.duration,
                unitary_distance: e.unitary_distance,
                six_state: e.fidelity.six_state,
                haar: e.fidelity.haar,
                process: e.fidelity.process,
            };
        }
        Ok(())
    })
}

/// Pseudo-pure preparation check.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_prep_check(cfg: *const GgConfig, out: *mut GgPrepReport) -> GgStatus {
    guard(|| {
        let cfg = &ref_arg(cfg, "cfg")?.0;
        let out = out_arg(out, "out")?;
        let r = run_prep_check(cfg)?;
        *out = GgPrepReport { lambda: r.lambda, mu: r.mu, residual: r.residual };
        Ok(())
    })
}
