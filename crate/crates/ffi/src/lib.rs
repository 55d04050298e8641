//! C interface to `ordersynth`.
//!
//! Every function returns an [`OsStatus`]; on failure a message is stored per
//! thread and can be fetched with [`os_last_error_message`]. Tables and
//! synthesis parameters are opaque heap handles released with their `_free`
//! function. Output arrays are always caller-allocated.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ordersynth::analysis::{analyze_frame, AnalysisConfig};
use ordersynth::codec::{self, RPM_BOUND, TORQUE_BOUND};
use ordersynth::signal::{resampled_len, AudioBuffer, ControlTrace};
use ordersynth::synth::{synthesize, SynthesisParams};
use ordersynth::table::TimbreTable;
use ordersynth::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsStatus {
    Ok = 0,
    /// Inconsistent lengths, rates or empty data.
    Input = 1,
    /// Unparseable file or JSON.
    Format = 2,
    /// Configuration value out of range.
    Parameter = 3,
    Io = 4,
    /// Numeric argument outside a function's domain.
    Domain = 5,
    /// Control value outside the annotation bounds.
    Range = 6,
    NullPointer = 7,
    /// A panic was caught at the boundary.
    Panic = 8,
    /// Output buffer too small; the required size has been written.
    BufferTooSmall = 9,
}

/// Opaque timbre table.
pub struct OsTable(TimbreTable);

/// Opaque synthesis parameter set.
pub struct OsParams(SynthesisParams);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(OsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Input(_) => OsStatus::Input,
            Error::Format(_) => OsStatus::Format,
            Error::Parameter(_) => OsStatus::Parameter,
            Error::Domain(_) => OsStatus::Domain,
            Error::Range(_) => OsStatus::Range,
            Error::Io(_) => OsStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> OsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            OsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            OsStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(OsStatus::NullPointer, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(OsStatus::Input, format!("{name} is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut_arg<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write_out<T>(p: *mut T, value: T, name: &str) -> FfiResult {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

fn trace_arg(sample_rate: u32, rpm: &[f64], torque: &[f64]) -> Result<ControlTrace, Failure> {
    Ok(ControlTrace::new(sample_rate, rpm.to_vec(), torque.to_vec())?)
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
/// Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn os_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Loads a table from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn os_table_load(path: *const c_char, out: *mut *mut OsTable) -> OsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let table = TimbreTable::load(path)?;
        write_out(out, Box::into_raw(Box::new(OsTable(table))), "out")
    })
}

/// Parses a table from a JSON string.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn os_table_from_json(json: *const c_char, out: *mut *mut OsTable) -> OsStatus {
    guard(|| {
        let table = TimbreTable::from_json(str_arg(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(OsTable(table))), "out")
    })
}

/// # Safety
/// `table` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn os_table_free(table: *mut OsTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of orders per cell, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn os_table_num_orders(table: *const OsTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.num_orders())
}

/// Bilinear lookup at (rpm, torque). Both outputs hold `len` values, which
/// must equal the table's order count.
///
/// # Safety
/// `deviation` and `magnitude` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn os_table_lookup(
    table: *const OsTable,
    rpm: f64,
    torque: f64,
    deviation: *mut f64,
    magnitude: *mut f64,
    len: usize,
) -> OsStatus {
    guard(|| {
        let table = &ref_arg(table, "table")?.0;
        if len != table.num_orders() {
            return Err(Failure(OsStatus::Input, format!("buffer length {len} != {} orders", table.num_orders())));
        }
        if !(rpm.is_finite() && torque.is_finite()) {
            return Err(Failure(OsStatus::Domain, "rpm and torque must be finite".into()));
        }
        let dev = slice_mut_arg(deviation, len, "deviation")?;
        let mag = slice_mut_arg(magnitude, len, "magnitude")?;
        table.lookup_into(rpm, torque, dev, mag);
        Ok(())
    })
}

/// Default synthesis parameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn os_params_default(out: *mut *mut OsParams) -> OsStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(OsParams(SynthesisParams::default()))), "out"))
}

/// Parses and validates parameters from JSON; missing fields take defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn os_params_from_json(json: *const c_char, out: *mut *mut OsParams) -> OsStatus {
    guard(|| {
        let params = SynthesisParams::from_json(str_arg(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(OsParams(params))), "out")
    })
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn os_params_set_seed(params: *mut OsParams, seed: u64) -> OsStatus {
    guard(|| {
        params.as_mut().ok_or_else(|| null("params"))?.0.seed = seed;
        Ok(())
    })
}

/// Output sample rate, or 0 for a null handle.
///
/// # Safety
/// `params` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn os_params_sample_rate(params: *const OsParams) -> u32 {
    params.as_ref().map_or(0, |p| p.0.sample_rate)
}

/// # Safety
/// `params` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn os_params_free(params: *mut OsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Number of stereo frames [`os_synthesize`] produces for a trace of
/// `trace_len` samples at `trace_rate`.
///
/// # Safety
/// `params` must be a live handle; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn os_synth_output_len(
    params: *const OsParams,
    trace_rate: u32,
    trace_len: usize,
    out_len: *mut usize,
) -> OsStatus {
    guard(|| {
        let params = &ref_arg(params, "params")?.0;
        if trace_rate == 0 {
            return Err(Failure(OsStatus::Input, "trace rate must be positive".into()));
        }
        write_out(out_len, resampled_len(trace_len, trace_rate, params.sample_rate), "out_len")
    })
}

/// Renders stereo audio for a control trace. `left` and `right` must each
/// hold `capacity` samples; the rendered length is written to `out_len`.
/// If `capacity` is too small, nothing is rendered, `out_len` receives the
/// required length and the call returns `BufferTooSmall`.
///
/// # Safety
/// `rpm` and `torque` must be valid for `trace_len` doubles, `left` and
/// `right` for `capacity` doubles, and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn os_synthesize(
    table: *const OsTable,
    params: *const OsParams,
    trace_rate: u32,
    rpm: *const f64,
    torque: *const f64,
    trace_len: usize,
    left: *mut f64,
    right: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> OsStatus {
    guard(|| {
        let table = &ref_arg(table, "table")?.0;
        let params = &ref_arg(params, "params")?.0;
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        let trace = trace_arg(trace_rate, slice_arg(rpm, trace_len, "rpm")?, slice_arg(torque, trace_len, "torque")?)?;
        let needed = resampled_len(trace_len, trace_rate, params.sample_rate);
        if capacity < needed {
            out_len.write(needed);
            return Err(Failure(OsStatus::BufferTooSmall, format!("need {needed} samples, have {capacity}")));
        }
        let render = synthesize(&trace, table, params)?;
        let n = render.audio.len();
        slice_mut_arg(left, n, "left")?.copy_from_slice(render.audio.channel(0));
        slice_mut_arg(right, n, "right")?.copy_from_slice(render.audio.channel(1));
        out_len.write(n);
        Ok(())
    })
}

/// Quantizes RPM and torque into annotation codes.
///
/// # Safety
/// All four arrays must be valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn os_encode_controls(
    rpm: *const f64,
    torque: *const f64,
    len: usize,
    rpm_codes: *mut i16,
    torque_codes: *mut i16,
) -> OsStatus {
    guard(|| {
        let rpm = slice_arg(rpm, len, "rpm")?;
        let torque = slice_arg(torque, len, "torque")?;
        let rc = slice_mut_arg(rpm_codes, len, "rpm_codes")?;
        let tc = slice_mut_arg(torque_codes, len, "torque_codes")?;
        // encode everything before writing so a range error leaves outputs untouched
        let mut codes = Vec::with_capacity(2 * len);
        for (&r, &t) in rpm.iter().zip(torque) {
            codes.push((codec::encode_value(r, 0.0, RPM_BOUND)?, codec::encode_value(t, -TORQUE_BOUND, TORQUE_BOUND)?));
        }
        for (i, (r, t)) in codes.into_iter().enumerate() {
            rc[i] = r;
            tc[i] = t;
        }
        Ok(())
    })
}

/// Inverse of [`os_encode_controls`].
///
/// # Safety
/// All four arrays must be valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn os_decode_controls(
    rpm_codes: *const i16,
    torque_codes: *const i16,
    len: usize,
    rpm: *mut f64,
    torque: *mut f64,
) -> OsStatus {
    guard(|| {
        let rc = slice_arg(rpm_codes, len, "rpm_codes")?;
        let tc = slice_arg(torque_codes, len, "torque_codes")?;
        let rpm = slice_mut_arg(rpm, len, "rpm")?;
        let torque = slice_mut_arg(torque, len, "torque")?;
        for i in 0..len {
            rpm[i] = codec::decode_value(rc[i], RPM_BOUND);
            torque[i] = codec::decode_value(tc[i], TORQUE_BOUND);
        }
        Ok(())
    })
}

/// Number of orders reported by [`os_analyze_frame`].
#[no_mangle]
pub extern "C" fn os_default_num_orders() -> usize {
    AnalysisConfig::default().orders.len()
}

/// Analyzes one mono frame with the default configuration at `sample_rate`.
/// `f0` is the mean engine rotation frequency in Hz (RPM / 60). Each output
/// array holds `num_orders` values, which must equal
/// [`os_default_num_orders`]; `in_band` receives 1 or 0.
///
/// # Safety
/// `samples` must be valid for `len` doubles and the outputs for
/// `num_orders` elements.
#[no_mangle]
pub unsafe extern "C" fn os_analyze_frame(
    samples: *const f64,
    len: usize,
    sample_rate: u32,
    f0: f64,
    deviation: *mut f64,
    magnitude: *mut f64,
    in_band: *mut u8,
    num_orders: usize,
) -> OsStatus {
    guard(|| {
        let cfg = AnalysisConfig::default().with_sample_rate(f64::from(sample_rate));
        if num_orders != cfg.orders.len() {
            return Err(Failure(OsStatus::Input, format!("buffer length {num_orders} != {} orders", cfg.orders.len())));
        }
        let frame = AudioBuffer::mono(sample_rate, slice_arg(samples, len, "samples")?.to_vec())?;
        let dev = slice_mut_arg(deviation, num_orders, "deviation")?;
        let mag = slice_mut_arg(magnitude, num_orders, "magnitude")?;
        let band = slice_mut_arg(in_band, num_orders, "in_band")?;
        let result = analyze_frame(&frame, f0, 0.0, &cfg)?;
        for (i, o) in result.orders.iter().enumerate() {
            dev[i] = o.deviation;
            mag[i] = o.magnitude;
            band[i] = u8::from(o.in_band);
        }
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn os_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
