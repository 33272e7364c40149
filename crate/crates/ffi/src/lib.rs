//! C ABI for the aquannr estimators, channel model and network simulator.
//!
//! Every function returns an [`AqStatus`]. On failure, [`aq_last_error`]
//! describes the most recent error on the calling thread. Handles are
//! opaque, created by `*_new` and released by the matching `*_free`; a
//! handle must not be used from two threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use aquannr::channel::{self, ChannelParams};
use aquannr::estimators::{CompressionPolicy, EmaState, NnrConfig, NnrPredictor, RunningStats, SnrSample};
use aquannr::netsim::{run_sim, SimConfig};
use aquannr::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AqStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed input: non-finite values, bad ordering, bad text.
    InvalidArgument = 2,
    /// Input outside the mathematical domain of the operation.
    Domain = 3,
    /// Not enough history for the requested estimate.
    InsufficientData = 4,
    /// Invalid configuration value or key.
    Config = 5,
    /// The operation failed for another reason.
    Failed = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> AqStatus {
    match err {
        Error::RejectedInput(_) | Error::Dimension { .. } | Error::Ordering { .. } | Error::Usage(_) => {
            AqStatus::InvalidArgument
        }
        Error::Domain(_) => AqStatus::Domain,
        Error::Prediction(_) | Error::EmptySeries | Error::UndefinedVariance { .. } => AqStatus::InsufficientData,
        Error::Config(_) | Error::Parse { .. } => AqStatus::Config,
        _ => AqStatus::Failed,
    }
}

/// Runs `body`, recording any error or panic for [`aq_last_error`].
fn guard(body: impl FnOnce() -> Result<(), (AqStatus, String)>) -> AqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            AqStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            AqStatus::Panic
        }
    }
}

fn fail(err: Error) -> (AqStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (AqStatus, String) {
    (AqStatus::NullPointer, format!("{name} is null"))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (AqStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    // SAFETY: caller guarantees `out` points to writable storage for T.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn handle<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, (AqStatus, String)> {
    // SAFETY: caller passes a pointer obtained from the matching `*_new`.
    unsafe { ptr.as_mut() }.ok_or_else(|| null(name))
}

/// Description of the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn aq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Online nearest-neighbor-regression predictor over one SNR series.
pub struct AqNnrPredictor(NnrPredictor);

/// Creates a predictor with window length `window` and `k` neighbors.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_nnr_new(window: usize, k: usize, out: *mut *mut AqNnrPredictor) -> AqStatus {
    guard(|| {
        let cfg = NnrConfig {
            window_m: window,
            k,
            ..NnrConfig::default()
        };
        let p = NnrPredictor::new(cfg).map_err(fail)?;
        let boxed = Box::into_raw(Box::new(AqNnrPredictor(p)));
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, boxed, "out") }.inspect_err(|_| {
            // SAFETY: `boxed` was just created and never shared.
            drop(unsafe { Box::from_raw(boxed) });
        })
    })
}

/// Enables history compression: once `storage_limit` samples are stored,
/// the oldest `fraction` of them is folded into one summary sample.
///
/// # Safety
/// `p` must come from [`aq_nnr_new`].
#[no_mangle]
pub unsafe extern "C" fn aq_nnr_set_compression(p: *mut AqNnrPredictor, storage_limit: usize, fraction: f64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(p, "predictor") }?;
        let policy = CompressionPolicy {
            storage_limit,
            fraction,
            ..CompressionPolicy::default()
        };
        h.0 = h.0.clone().with_compression(policy).map_err(fail)?;
        Ok(())
    })
}

/// Appends a sample; `time` must exceed the previous sample's time.
///
/// # Safety
/// `p` must come from [`aq_nnr_new`].
#[no_mangle]
pub unsafe extern "C" fn aq_nnr_push(p: *mut AqNnrPredictor, time: f64, snr_db: f64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(p, "predictor") }?;
        h.0.push(SnrSample::new(time, snr_db)).map_err(fail)
    })
}

/// Predicts the next sample.
///
/// # Safety
/// `p` must come from [`aq_nnr_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_nnr_predict(p: *mut AqNnrPredictor, out: *mut f64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(p, "predictor") }?;
        let v = h.0.predict().map_err(fail)?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, v, "out") }
    })
}

/// Number of stored samples.
///
/// # Safety
/// `p` must come from [`aq_nnr_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_nnr_len(p: *mut AqNnrPredictor, out: *mut usize) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(p, "predictor") }?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, h.0.len(), "out") }
    })
}

/// Releases a predictor; null is ignored.
///
/// # Safety
/// `p` must come from [`aq_nnr_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aq_nnr_free(p: *mut AqNnrPredictor) {
    if !p.is_null() {
        // SAFETY: forwarded caller contract.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Streaming mean and variance.
pub struct AqRunningStats(RunningStats);

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_stats_new(out: *mut *mut AqRunningStats) -> AqStatus {
    guard(|| {
        let boxed = Box::into_raw(Box::new(AqRunningStats(RunningStats::new())));
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, boxed, "out") }.inspect_err(|_| {
            // SAFETY: `boxed` was just created and never shared.
            drop(unsafe { Box::from_raw(boxed) });
        })
    })
}

/// # Safety
/// `s` must come from [`aq_stats_new`].
#[no_mangle]
pub unsafe extern "C" fn aq_stats_update(s: *mut AqRunningStats, x: f64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(s, "stats") }?;
        h.0.update(x).map_err(fail)
    })
}

/// # Safety
/// `s` must come from [`aq_stats_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_stats_count(s: *mut AqRunningStats, out: *mut u64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(s, "stats") }?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, h.0.count(), "out") }
    })
}

/// Fails with `InsufficientData` before the first sample.
///
/// # Safety
/// `s` must come from [`aq_stats_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_stats_mean(s: *mut AqRunningStats, out: *mut f64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(s, "stats") }?;
        let m = h.0.mean().ok_or_else(|| fail(Error::EmptySeries))?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, m, "out") }
    })
}

/// Sample variance; fails with `InsufficientData` below two samples.
///
/// # Safety
/// `s` must come from [`aq_stats_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_stats_variance(s: *mut AqRunningStats, out: *mut f64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(s, "stats") }?;
        let v = h.0.variance().map_err(fail)?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, v, "out") }
    })
}

/// # Safety
/// `s` must come from [`aq_stats_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aq_stats_free(s: *mut AqRunningStats) {
    if !s.is_null() {
        // SAFETY: forwarded caller contract.
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Exponential moving average.
pub struct AqEma(EmaState);

/// `alpha` must lie in (0, 1].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_ema_new(alpha: f64, out: *mut *mut AqEma) -> AqStatus {
    guard(|| {
        let ema = EmaState::new(alpha).map_err(fail)?;
        let boxed = Box::into_raw(Box::new(AqEma(ema)));
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, boxed, "out") }.inspect_err(|_| {
            // SAFETY: `boxed` was just created and never shared.
            drop(unsafe { Box::from_raw(boxed) });
        })
    })
}

/// # Safety
/// `e` must come from [`aq_ema_new`].
#[no_mangle]
pub unsafe extern "C" fn aq_ema_update(e: *mut AqEma, y: f64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(e, "ema") }?;
        h.0.update(y).map(drop).map_err(fail)
    })
}

/// Fails with `InsufficientData` before the first sample.
///
/// # Safety
/// `e` must come from [`aq_ema_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_ema_predict(e: *mut AqEma, out: *mut f64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let h = unsafe { handle(e, "ema") }?;
        let v = h
            .0
            .prediction()
            .ok_or_else(|| fail(Error::Prediction("no samples yet".into())))?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, v, "out") }
    })
}

/// # Safety
/// `e` must come from [`aq_ema_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aq_ema_free(e: *mut AqEma) {
    if !e.is_null() {
        // SAFETY: forwarded caller contract.
        drop(unsafe { Box::from_raw(e) });
    }
}

/// Acoustic link parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AqChannelParams {
    pub tx_power_w: f64,
    pub carrier_khz: f64,
    pub spreading_exponent: f64,
    pub noise_psd_w_per_hz: f64,
    pub bandwidth_hz: f64,
}

impl From<ChannelParams> for AqChannelParams {
    fn from(p: ChannelParams) -> Self {
        AqChannelParams {
            tx_power_w: p.tx_power_w,
            carrier_khz: p.carrier_khz,
            spreading_exponent: p.spreading_exponent,
            noise_psd_w_per_hz: p.noise_psd_w_per_hz,
            bandwidth_hz: p.bandwidth_hz,
        }
    }
}

impl From<AqChannelParams> for ChannelParams {
    fn from(p: AqChannelParams) -> Self {
        ChannelParams {
            tx_power_w: p.tx_power_w,
            carrier_khz: p.carrier_khz,
            spreading_exponent: p.spreading_exponent,
            noise_psd_w_per_hz: p.noise_psd_w_per_hz,
            bandwidth_hz: p.bandwidth_hz,
        }
    }
}

/// Fills `out` with the default channel parameters.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_channel_default(out: *mut AqChannelParams) -> AqStatus {
    // SAFETY: forwarded caller contract.
    guard(|| unsafe { write_out(out, ChannelParams::default().into(), "out") })
}

/// Absorption in dB/km at `f_khz`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_absorption_db_per_km(f_khz: f64, out: *mut f64) -> AqStatus {
    guard(|| {
        let v = channel::absorption_db_per_km(f_khz).map_err(fail)?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, v, "out") }
    })
}

/// Mean SNR in dB at `distance_m` meters.
///
/// # Safety
/// `params` must point to readable parameters; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_snr_db(params: *const AqChannelParams, distance_m: f64, out: *mut f64) -> AqStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let p = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        let v = channel::snr_db(distance_m, &(*p).into()).map_err(fail)?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, v, "out") }
    })
}

/// Probability that a packet of `bits` bits arrives intact at linear SNR
/// `snr_linear`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_packet_success_prob(snr_linear: f64, bits: u32, out: *mut f64) -> AqStatus {
    guard(|| {
        let v = channel::packet_success_prob(snr_linear, bits).map_err(fail)?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, v, "out") }
    })
}

/// Outcome of one simulation run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AqSimMetrics {
    pub packet_delivery_ratio: f64,
    /// NaN when nothing was delivered.
    pub avg_end_to_end_delay: f64,
    /// Infinite when nothing was delivered.
    pub avg_energy_per_delivered_packet: f64,
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub total_energy: f64,
}

/// Runs one simulation configured by `key = value` lines applied over the
/// defaults. Lines starting with `#` and blank lines are ignored.
///
/// # Safety
/// `config` must be a NUL-terminated string or null (defaults only); `out`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aq_sim_run(config: *const c_char, out: *mut AqSimMetrics) -> AqStatus {
    guard(|| {
        let mut cfg = SimConfig::default();
        if !config.is_null() {
            // SAFETY: forwarded caller contract.
            let text = unsafe { CStr::from_ptr(config) }
                .to_str()
                .map_err(|e| (AqStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
            let pairs = aquannr::cli::parse_kv(text, std::path::Path::new("<config>")).map_err(fail)?;
            for (k, v) in pairs {
                cfg.set(&k, &v).map_err(fail)?;
            }
        }
        let m = run_sim(&cfg).map_err(fail)?;
        let metrics = AqSimMetrics {
            packet_delivery_ratio: m.packet_delivery_ratio,
            avg_end_to_end_delay: m.avg_end_to_end_delay,
            avg_energy_per_delivered_packet: m.avg_energy_per_delivered_packet,
            packets_sent: m.packets_sent,
            packets_delivered: m.packets_delivered,
            total_energy: m.total_energy,
        };
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, metrics, "out") }
    })
}
