//! C ABI over the `qbs` crate.
//!
//! Circuits are opaque `QbsCircuit` handles created by the `qbs_*_new` /
//! `qbs_build_*` functions and released with `qbs_circuit_free`. Every
//! fallible call returns a `QbsStatus`; on failure `qbs_last_error` returns
//! a message for the calling thread. Strings returned through `char **`
//! outputs are owned by the caller and freed with `qbs_string_free`.
//!
//! The header `include/qbs.h` is regenerated by cbindgen on every build.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use qbs::aqp::{assess, load_table, AssessParams, QuerySpec, TableFormat};
use qbs::qbs::{replicate, Mode, SampleResults};
use qbs::qcore::{simulate, Circuit, GateKind, GateOp, ShotSampler};
use qbs::qcounter::{build_counter, build_inverse_counter, build_ripple_adder, decode_counter, CounterSpec};
use qbs::qram::{build_bit_qram, build_qsa, BitDataArray};
use qbs::stats::sample_std_dev;
use qbs::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    InvalidData = 4,
    BufferTooSmall = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbsGateKind {
    H = 0,
    X = 1,
    Cx = 2,
    Ccx = 3,
    Mcx = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbsMode {
    QuantumSequential = 0,
    QuantumParallel = 1,
    ClassicalOracle = 2,
}

impl From<QbsMode> for Mode {
    fn from(m: QbsMode) -> Self {
        match m {
            QbsMode::QuantumSequential => Mode::QuantumSequential,
            QbsMode::QuantumParallel => Mode::QuantumParallel,
            QbsMode::ClassicalOracle => Mode::ClassicalOracle,
        }
    }
}

/// Opaque circuit handle.
pub struct QbsCircuit {
    inner: Circuit,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(err: &Error) -> QbsStatus {
    match err {
        Error::CapacityExceeded { .. } | Error::ParallelTooLarge { .. } => QbsStatus::Capacity,
        Error::Io(_) => QbsStatus::Io,
        Error::NotPowerOfTwo(_)
        | Error::ValueTooWide { .. }
        | Error::NotABit { .. }
        | Error::MalformedRow { .. }
        | Error::EmptyTable
        | Error::Json(_)
        | Error::Csv(_)
        | Error::InvalidBitstring(_)
        | Error::BitstringLength { .. }
        | Error::NoMatchingRows => QbsStatus::InvalidData,
        _ => QbsStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and containing panics.
fn guard(f: impl FnOnce() -> Result<(), (QbsStatus, String)>) -> QbsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QbsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QbsStatus::Panic
        }
    }
}

fn lift<T>(r: qbs::Result<T>) -> Result<T, (QbsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (QbsStatus, String) {
    (QbsStatus::NullPointer, format!("{name} is null"))
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], (QbsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, need: usize, name: &str) -> Result<&'a mut [T], (QbsStatus, String)> {
    if ptr.is_null() {
        return Err(null(name));
    }
    if len < need {
        return Err((QbsStatus::BufferTooSmall, format!("{name} holds {len} entries, {need} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn c_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, (QbsStatus, String)> {
    if ptr.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| (QbsStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn circuit<'a>(ptr: *const QbsCircuit) -> Result<&'a Circuit, (QbsStatus, String)> {
    ptr.as_ref().map(|c| &c.inner).ok_or_else(|| null("circuit"))
}

unsafe fn put_circuit(out: *mut *mut QbsCircuit, c: Circuit) -> Result<(), (QbsStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(QbsCircuit { inner: c }));
    Ok(())
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qbs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qbs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qbs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Empty circuit on `num_qubits` qubits.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qbs_circuit_new(num_qubits: usize, out: *mut *mut QbsCircuit) -> QbsStatus {
    guard(|| put_circuit(out, lift(Circuit::new(num_qubits))?))
}

/// # Safety
/// `c` must be a handle from this library (or null) and not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qbs_circuit_free(c: *mut QbsCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Qubit count, or 0 for a null handle.
///
/// # Safety
/// `c` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qbs_circuit_num_qubits(c: *const QbsCircuit) -> usize {
    c.as_ref().map_or(0, |c| c.inner.num_qubits())
}

/// Gate count, or 0 for a null handle.
///
/// # Safety
/// `c` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qbs_circuit_num_gates(c: *const QbsCircuit) -> usize {
    c.as_ref().map_or(0, |c| c.inner.len())
}

/// Append one gate. `controls` may be null when `num_controls` is 0.
///
/// # Safety
/// `c` must be a live handle; `controls` must point to `num_controls` entries.
#[no_mangle]
pub unsafe extern "C" fn qbs_circuit_append(
    c: *mut QbsCircuit,
    kind: QbsGateKind,
    controls: *const usize,
    num_controls: usize,
    target: usize,
) -> QbsStatus {
    guard(|| {
        let c = c.as_mut().ok_or_else(|| null("circuit"))?;
        let controls = slice(controls, num_controls, "controls")?.to_vec();
        let kind = match kind {
            QbsGateKind::H => GateKind::H,
            QbsGateKind::X => GateKind::X,
            QbsGateKind::Cx => GateKind::CX,
            QbsGateKind::Ccx => GateKind::CCX,
            QbsGateKind::Mcx => GateKind::MCX,
        };
        lift(c.inner.push(GateOp { kind, controls, target }).map(|_| ()))
    })
}

/// Final amplitudes from |0...0>, written to `re`/`im` (each `len >= 2^n`).
///
/// # Safety
/// `re` and `im` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qbs_circuit_simulate(c: *const QbsCircuit, re: *mut f64, im: *mut f64, len: usize) -> QbsStatus {
    guard(|| {
        let c = circuit(c)?;
        let dim = 1usize << c.num_qubits();
        let re = slice_mut(re, len, dim, "re")?;
        let im = slice_mut(im, len, dim, "im")?;
        let state = lift(simulate(c))?;
        for (i, a) in state.amplitudes().iter().enumerate() {
            re[i] = a.re;
            im[i] = a.im;
        }
        Ok(())
    })
}

/// Draw `shots` measurements; `counts[i]` receives the hits on basis state
/// `i` (qubit 0 least significant). `len >= 2^n`.
///
/// # Safety
/// `counts` must be writable for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn qbs_circuit_sample(
    c: *const QbsCircuit,
    shots: u64,
    seed: u64,
    counts: *mut u64,
    len: usize,
) -> QbsStatus {
    guard(|| {
        let c = circuit(c)?;
        let out = slice_mut(counts, len, 1usize << c.num_qubits(), "counts")?;
        let table = lift(qbs::qcore::sample(c, shots, seed))?;
        out.iter_mut().for_each(|v| *v = 0);
        for (b, n) in table.iter() {
            out[b.value() as usize] = n;
        }
        Ok(())
    })
}

/// One shot; the measured basis index goes to `out`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qbs_circuit_measure_once(c: *const QbsCircuit, seed: u64, out: *mut u64) -> QbsStatus {
    guard(|| {
        let c = circuit(c)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lift(ShotSampler::for_circuit(c))?.measure_once(seed).value();
        Ok(())
    })
}

unsafe fn bit_array(bits: *const u8, len: usize) -> Result<BitDataArray, (QbsStatus, String)> {
    let raw: Vec<u64> = slice(bits, len, "bits")?.iter().map(|&b| u64::from(b)).collect();
    lift(BitDataArray::from_ints(&raw))
}

/// Lookup fragment: address qubits `0..a`, data qubit `a`.
///
/// # Safety
/// `bits` must point to `len` bytes, each 0 or 1; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qbs_build_bit_qram(bits: *const u8, len: usize, out: *mut *mut QbsCircuit) -> QbsStatus {
    guard(|| put_circuit(out, lift(build_bit_qram(&bit_array(bits, len)?))?))
}

/// Resampler: Hadamards on the address register followed by the lookup.
///
/// # Safety
/// As `qbs_build_bit_qram`.
#[no_mangle]
pub unsafe extern "C" fn qbs_build_qsa(bits: *const u8, len: usize, out: *mut *mut QbsCircuit) -> QbsStatus {
    guard(|| put_circuit(out, lift(build_qsa(&bit_array(bits, len)?))?))
}

/// Popcount counter: `p` controls at `0..p`, `q` counter qubits after them.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qbs_build_counter(p: usize, q: usize, out: *mut *mut QbsCircuit) -> QbsStatus {
    guard(|| put_circuit(out, lift(CounterSpec::new(p, q).and_then(build_counter))?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qbs_build_inverse_counter(p: usize, q: usize, out: *mut *mut QbsCircuit) -> QbsStatus {
    guard(|| put_circuit(out, lift(CounterSpec::new(p, q).and_then(build_inverse_counter))?))
}

/// Adder over A `0..w`, B `w..2w`, carry-in `2w`, carry-out `2w+1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qbs_build_ripple_adder(width: usize, out: *mut *mut QbsCircuit) -> QbsStatus {
    guard(|| put_circuit(out, lift(build_ripple_adder(width))?))
}

/// Decode a counter register printed highest bit first.
///
/// # Safety
/// `bits` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qbs_decode_counter(bits: *const c_char, q: usize, out: *mut u64) -> QbsStatus {
    guard(|| {
        let s = c_str(bits, "bits")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lift(decode_counter(s, q))?;
        Ok(())
    })
}

/// `b` COUNT replications of the 0/1 sample `y` (length `n`) drawn from
/// `population` rows. Raw totals go to `raw`, scaled estimates to
/// `estimates`; either output may be null.
///
/// # Safety
/// `y` must hold `n` entries; non-null outputs must hold `b` entries.
#[no_mangle]
pub unsafe extern "C" fn qbs_replicate_count(
    y: *const u8,
    n: usize,
    population: usize,
    b: usize,
    mode: QbsMode,
    seed: u64,
    raw: *mut u64,
    estimates: *mut f64,
) -> QbsStatus {
    guard(|| {
        let y: Vec<u64> = slice(y, n, "y")?.iter().map(|&v| u64::from(v)).collect();
        let sample = lift(SampleResults::count(y, population))?;
        let set = lift(replicate(&sample, b, mode.into(), seed))?;
        if !raw.is_null() {
            let out = slice_mut(raw, b, b, "raw")?;
            for (o, r) in out.iter_mut().zip(&set.replications) {
                *o = r.raw;
            }
        }
        if !estimates.is_null() {
            let out = slice_mut(estimates, b, b, "estimates")?;
            for (o, r) in out.iter_mut().zip(&set.replications) {
                *o = r.estimate;
            }
        }
        Ok(())
    })
}

/// Sample standard deviation (`len - 1` denominator) of `len >= 2` values.
///
/// # Safety
/// `values` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qbs_bootstrap_se(values: *const f64, len: usize, out: *mut f64) -> QbsStatus {
    guard(|| {
        let v = slice(values, len, "values")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lift(sample_std_dev(v))?;
        Ok(())
    })
}

/// `estimate -/+ z^(1-alpha) * se`.
///
/// # Safety
/// `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qbs_confidence_interval(
    estimate: f64,
    se: f64,
    alpha: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> QbsStatus {
    guard(|| {
        let lower = lower.as_mut().ok_or_else(|| null("lower"))?;
        let upper = upper.as_mut().ok_or_else(|| null("upper"))?;
        let ci = lift(qbs::aqp::confidence_interval(estimate, se, alpha))?;
        *lower = ci.lower;
        *upper = ci.upper;
        Ok(())
    })
}

/// Full pipeline on a table file (CSV, or JSON by `.json` extension) and a
/// JSON query file. The report JSON is written to `*out_json`.
///
/// # Safety
/// Paths must be NUL-terminated strings; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qbs_assess_json(
    table_path: *const c_char,
    query_path: *const c_char,
    n: usize,
    b: usize,
    alpha: f64,
    mode: QbsMode,
    seed: u64,
    out_json: *mut *mut c_char,
) -> QbsStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let table_path = Path::new(c_str(table_path, "table_path")?);
        let table = lift(load_table(table_path, TableFormat::from_path(table_path)))?;
        let query = lift(QuerySpec::load(c_str(query_path, "query_path")?))?;
        let report = assess(&table, &query, &AssessParams { n, b, alpha, mode: mode.into(), seed })
            .map_err(|e| (status_of(&e.source), e.to_string()))?;
        let js = serde_json::to_string(&report).map_err(|e| (QbsStatus::InvalidData, e.to_string()))?;
        *out_json = CString::new(js).map_err(|e| (QbsStatus::InvalidData, e.to_string()))?.into_raw();
        Ok(())
    })
}
