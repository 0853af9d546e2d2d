//! C ABI over `divfx`.
//!
//! Every function returns a [`DivfxStatus`] and writes results through out
//! pointers. Solutions live behind the opaque [`DivfxSolution`] handle, which
//! the caller releases with [`divfx_solution_free`]. After a failing call,
//! [`divfx_last_error`] describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use divfx::control::{PayoutMode, ProblemSpec, Solution};
use divfx::levy::{self, Atom, BetaValue, JumpComponent, LevyTriplet, NigParams};
use divfx::montecarlo::{self, SimConfig, StrategySpec};
use divfx::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivfxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    IllPosed = 3,
    NegativeSurplus = 4,
    Unsupported = 5,
    NoConvergence = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivfxMode {
    Restricted = 0,
    Unrestricted = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivfxStrategyKind {
    /// The optimal strategy of the problem's payout mode.
    Optimal = 0,
    ThresholdRate = 1,
    ReflectionBarrier = 2,
    ConstantRate = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DivfxAtom {
    pub height: f64,
    pub intensity: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DivfxNig {
    pub s2: f64,
    pub vartheta: f64,
    pub kappa: f64,
}

/// Exchange-rate triplet. `atoms` may be null when `n_atoms` is 0; `nig` may
/// be null. With `driftless != 0`, `gamma` is ignored and set to the
/// small-jump compensator.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DivfxTriplet {
    pub gaussian_variance: f64,
    pub atoms: *const DivfxAtom,
    pub n_atoms: usize,
    pub nig: *const DivfxNig,
    pub gamma: f64,
    pub driftless: i32,
}

/// Control problem before the exchange rate is folded in; `xi` is ignored in
/// unrestricted mode.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DivfxProblem {
    pub mu: f64,
    pub sigma: f64,
    pub delta: f64,
    pub xi: f64,
    pub mode: DivfxMode,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DivfxStrategy {
    pub kind: DivfxStrategyKind,
    pub barrier: f64,
    pub rate: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DivfxSimConfig {
    pub dt: f64,
    pub tail_tol: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub antithetic: i32,
    pub bridge_correction: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DivfxEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub truncation_bound: f64,
    pub horizon: f64,
}

/// Opaque closed-form solution.
pub struct DivfxSolution {
    inner: Solution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DivfxStatus {
    match e {
        Error::InvalidParameter { .. } | Error::ModeMismatch { .. } => DivfxStatus::InvalidArgument,
        Error::IllPosed(_) => DivfxStatus::IllPosed,
        Error::NegativeSurplus(_) => DivfxStatus::NegativeSurplus,
        Error::UnsupportedComponent(_) => DivfxStatus::Unsupported,
        Error::NoConvergence(_) => DivfxStatus::NoConvergence,
    }
}

struct Failure(DivfxStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DivfxStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DivfxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DivfxStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DivfxStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for reads of `T`.
unsafe fn read<T: Copy>(ptr: *const T, what: &str) -> Result<T, Failure> {
    ptr.as_ref().copied().ok_or_else(|| null(what))
}

/// # Safety
/// `ptr` must be null or valid for writes of `T`.
unsafe fn write<T>(ptr: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    ptr.write(value);
    Ok(())
}

/// # Safety
/// Pointers inside `t` must satisfy the [`DivfxTriplet`] contract.
unsafe fn triplet(t: &DivfxTriplet) -> Result<LevyTriplet, Failure> {
    let mut jumps = Vec::new();
    if t.n_atoms > 0 {
        if t.atoms.is_null() {
            return Err(null("fx.atoms"));
        }
        let raw = std::slice::from_raw_parts(t.atoms, t.n_atoms);
        let atoms = raw
            .iter()
            .map(|a| Atom::new(a.height, a.intensity))
            .collect::<Result<Vec<_>, _>>()?;
        jumps.push(JumpComponent::DiscreteAtoms(atoms));
    }
    if let Some(n) = t.nig.as_ref() {
        jumps.push(JumpComponent::NormalInverseGaussian(NigParams::new(
            n.s2, n.vartheta, n.kappa,
        )?));
    }
    let fx = if t.driftless != 0 {
        LevyTriplet::driftless(t.gaussian_variance, jumps)?
    } else {
        LevyTriplet::new(t.gaussian_variance, jumps, t.gamma)?
    };
    Ok(fx)
}

fn payout_mode(mode: DivfxMode, xi: f64) -> PayoutMode {
    match mode {
        DivfxMode::Restricted => PayoutMode::Restricted { xi },
        DivfxMode::Unrestricted => PayoutMode::Unrestricted,
    }
}

/// Message for a status code; static storage.
#[no_mangle]
pub extern "C" fn divfx_status_message(status: DivfxStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        DivfxStatus::Ok => b"ok\0",
        DivfxStatus::NullPointer => b"null pointer argument\0",
        DivfxStatus::InvalidArgument => b"invalid argument\0",
        DivfxStatus::IllPosed => b"ill-posed problem: effective rate is not positive\0",
        DivfxStatus::NegativeSurplus => b"negative surplus\0",
        DivfxStatus::Unsupported => b"unsupported jump component\0",
        DivfxStatus::NoConvergence => b"no convergence\0",
        DivfxStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Detail of the last failure on this thread, empty after a success. Valid
/// until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn divfx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Effective rate `β` for preference rate `delta`. `beta_out` receives
/// `-INFINITY` when the exponential moment diverges; `integrable_out` may be
/// null.
///
/// # Safety
/// `fx` must point to a valid [`DivfxTriplet`]; out pointers must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn divfx_beta(
    fx: *const DivfxTriplet,
    delta: f64,
    beta_out: *mut f64,
    integrable_out: *mut i32,
) -> DivfxStatus {
    guard(|| {
        let t = triplet(&read(fx, "fx")?)?;
        let b = levy::beta(&t, delta)?;
        let v = match b.value {
            BetaValue::Finite(v) => v,
            BetaValue::MinusInfinity => f64::NEG_INFINITY,
        };
        write(beta_out, v, "beta_out")?;
        if !integrable_out.is_null() {
            integrable_out.write(i32::from(b.integrable));
        }
        Ok(())
    })
}

/// Closed-form solution for effective rate `beta` (`δ = β`).
///
/// # Safety
/// `out` must be valid for writes. On success `*out` owns a handle that must
/// be released with [`divfx_solution_free`].
#[no_mangle]
pub unsafe extern "C" fn divfx_solution_new(
    mu: f64,
    sigma: f64,
    beta: f64,
    xi: f64,
    mode: DivfxMode,
    out: *mut *mut DivfxSolution,
) -> DivfxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = ProblemSpec::new(mu, sigma, beta, beta, payout_mode(mode, xi))?;
        let inner = Solution::solve(&spec)?;
        out.write(Box::into_raw(Box::new(DivfxSolution { inner })));
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a handle from [`divfx_solution_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn divfx_solution_free(sol: *mut DivfxSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Optimal barrier (`x_r` or `x_u`; 0 when paying the maximum rate everywhere).
///
/// # Safety
/// `sol` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn divfx_solution_barrier(
    sol: *const DivfxSolution,
    out: *mut f64,
) -> DivfxStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("sol"))?;
        write(out, s.inner.as_value_function().barrier(), "out")
    })
}

/// Value `F(x)` or `G(x)` and, if `derivative_out` is non-null, its slope.
///
/// # Safety
/// `sol` must be a live handle; out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn divfx_solution_eval(
    sol: *const DivfxSolution,
    x: f64,
    value_out: *mut f64,
    derivative_out: *mut f64,
) -> DivfxStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("sol"))?;
        let vf = s.inner.as_value_function();
        let v = vf.value(x)?;
        write(value_out, v, "value_out")?;
        if !derivative_out.is_null() {
            derivative_out.write(vf.first_derivative(x)?);
        }
        Ok(())
    })
}

/// Monte Carlo value of `strategy` (null for the optimal one) from surplus
/// `x0` and log exchange rate `l0`.
///
/// # Safety
/// `problem`, `fx` and `cfg` must point to valid structs, `strategy` must be
/// null or valid, and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn divfx_simulate_value(
    problem: *const DivfxProblem,
    fx: *const DivfxTriplet,
    strategy: *const DivfxStrategy,
    cfg: *const DivfxSimConfig,
    x0: f64,
    l0: f64,
    out: *mut DivfxEstimate,
) -> DivfxStatus {
    guard(|| {
        let p = read(problem, "problem")?;
        let t = triplet(&read(fx, "fx")?)?;
        let c = read(cfg, "cfg")?;
        let spec =
            ProblemSpec::from_triplet(p.mu, p.sigma, p.delta, payout_mode(p.mode, p.xi), &t)?;
        let optimal = || -> Result<StrategySpec, Failure> {
            Ok(match Solution::solve(&spec)? {
                Solution::Restricted(s) => StrategySpec::ThresholdRate {
                    barrier: s.x_r,
                    rate: s.xi(),
                },
                Solution::Unrestricted(s) => StrategySpec::ReflectionBarrier { barrier: s.x_u },
            })
        };
        let s = match strategy.as_ref() {
            None => optimal()?,
            Some(s) => match s.kind {
                DivfxStrategyKind::Optimal => optimal()?,
                DivfxStrategyKind::ThresholdRate => StrategySpec::ThresholdRate {
                    barrier: s.barrier,
                    rate: s.rate,
                },
                DivfxStrategyKind::ReflectionBarrier => {
                    StrategySpec::ReflectionBarrier { barrier: s.barrier }
                }
                DivfxStrategyKind::ConstantRate => StrategySpec::ConstantRate { rate: s.rate },
            },
        };
        let sim = SimConfig {
            dt: c.dt,
            tail_tol: c.tail_tol,
            n_paths: c.n_paths,
            seed: c.seed,
            antithetic: c.antithetic != 0,
            bridge_correction: c.bridge_correction != 0,
        };
        let e = montecarlo::simulate_value(&spec, &t, &s, &sim, x0, l0)?;
        write(
            out,
            DivfxEstimate {
                mean: e.mean,
                std_error: e.stderr,
                n: e.n,
                truncation_bound: e.truncation_bound,
                horizon: e.horizon,
            },
            "out",
        )
    })
}

/// Default simulation settings.
#[no_mangle]
pub extern "C" fn divfx_sim_config_default() -> DivfxSimConfig {
    let d = SimConfig::default();
    DivfxSimConfig {
        dt: d.dt,
        tail_tol: d.tail_tol,
        n_paths: d.n_paths,
        seed: d.seed,
        antithetic: i32::from(d.antithetic),
        bridge_correction: i32::from(d.bridge_correction),
    }
}
