//! C ABI over the `qcapim` crate.
//!
//! Layouts and traces are opaque handles created and released by this
//! library. Every fallible call returns a [`QcapimStatus`]; the message of
//! the most recent failure on the calling thread is available through
//! [`qcapim_last_error`]. Strings passed in must be NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qcapim::akers;
use qcapim::engine::{InputSchedule, Simulator, TraceSet};
use qcapim::layout::{parse_layout, serialize, Geometry, QcaLayout};
use qcapim::metrics::{dissipation_reports, layout_metrics, MetricsError};
use qcapim::verification::{verify_layout, Oracle, VerifyError};
use qcapim::SimParams;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcapimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Simulation = 5,
    VerificationFailed = 6,
    Indeterminate = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque layout handle.
pub struct QcapimLayout(QcaLayout);

/// Opaque simulation result handle.
pub struct QcapimTraces(TraceSet);

/// Simulation parameters, field for field.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QcapimParams {
    pub temperature_k: f64,
    pub relaxation_time_s: f64,
    pub time_step_s: f64,
    pub clock_high_j: f64,
    pub clock_low_j: f64,
    pub clock_shift: f64,
    pub clock_amplitude_factor: f64,
    pub radius_of_effect_nm: f64,
    pub relative_permittivity: f64,
    pub layer_separation_nm: f64,
    pub convergence_tolerance: f64,
    pub num_samples: usize,
    pub max_iterations_per_sample: usize,
}

impl From<&SimParams> for QcapimParams {
    fn from(p: &SimParams) -> Self {
        QcapimParams {
            temperature_k: p.temperature_k,
            relaxation_time_s: p.relaxation_time_s,
            time_step_s: p.time_step_s,
            clock_high_j: p.clock_high_j,
            clock_low_j: p.clock_low_j,
            clock_shift: p.clock_shift,
            clock_amplitude_factor: p.clock_amplitude_factor,
            radius_of_effect_nm: p.radius_of_effect_nm,
            relative_permittivity: p.relative_permittivity,
            layer_separation_nm: p.layer_separation_nm,
            convergence_tolerance: p.convergence_tolerance,
            num_samples: p.num_samples,
            max_iterations_per_sample: p.max_iterations_per_sample,
        }
    }
}

impl From<&QcapimParams> for SimParams {
    fn from(p: &QcapimParams) -> Self {
        SimParams {
            temperature_k: p.temperature_k,
            relaxation_time_s: p.relaxation_time_s,
            time_step_s: p.time_step_s,
            clock_high_j: p.clock_high_j,
            clock_low_j: p.clock_low_j,
            clock_shift: p.clock_shift,
            clock_amplitude_factor: p.clock_amplitude_factor,
            radius_of_effect_nm: p.radius_of_effect_nm,
            relative_permittivity: p.relative_permittivity,
            layer_separation_nm: p.layer_separation_nm,
            convergence_tolerance: p.convergence_tolerance,
            num_samples: p.num_samples,
            max_iterations_per_sample: p.max_iterations_per_sample,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QcapimLayoutMetrics {
    pub cell_count: usize,
    pub area_um2: f64,
    pub clock_zone_regions: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QcapimVerifyResult {
    pub pass: bool,
    pub rows: usize,
    pub mismatches: usize,
    pub latency_cycles: usize,
    pub min_margin: f64,
}

/// One dissipation column; energies in meV per clock cycle. Switching is
/// negative when the layout has no inputs.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QcapimDissipation {
    pub gamma_ratio: f64,
    pub kink_energy_mev: f64,
    pub max_circuit_mev: f64,
    pub avg_circuit_mev: f64,
    pub min_circuit_mev: f64,
    pub max_cell_mev: f64,
    pub avg_leakage_mev: f64,
    pub avg_switching_mev: f64,
    pub argmax_pair: usize,
    pub argmin_pair: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

type Outcome = Result<(), (QcapimStatus, String)>;

fn guard(f: impl FnOnce() -> Outcome) -> QcapimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QcapimStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QcapimStatus::Panic
        }
    }
}

fn err<E: std::fmt::Display>(status: QcapimStatus) -> impl Fn(E) -> (QcapimStatus, String) {
    move |e| (status, e.to_string())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, (QcapimStatus, String)> {
    if s.is_null() {
        return Err((QcapimStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(err(QcapimStatus::InvalidUtf8))
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, (QcapimStatus, String)> {
    p.as_ref()
        .ok_or_else(|| (QcapimStatus::NullPointer, "null handle".into()))
}

unsafe fn store<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err((QcapimStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

/// Copies `s` with a trailing NUL into `buf` of `len` bytes. `needed`, if
/// non-null, receives the required size including the NUL.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Outcome {
    let size = s.len() + 1;
    if !needed.is_null() {
        needed.write(size);
    }
    if buf.is_null() || len < size {
        return Err((
            QcapimStatus::BufferTooSmall,
            format!("buffer of {len} bytes, need {size}"),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    buf.add(s.len()).write(0);
    Ok(())
}

fn verify_status(e: &VerifyError) -> QcapimStatus {
    match e {
        VerifyError::Indeterminate { .. } => QcapimStatus::Indeterminate,
        VerifyError::Engine(_) => QcapimStatus::Simulation,
        VerifyError::Oracle(_) => QcapimStatus::Parse,
        _ => QcapimStatus::InvalidArgument,
    }
}

/// Copies the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes; `needed` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qcapim_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> QcapimStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match copy_out(&msg, buf, len, needed) {
        Ok(()) => QcapimStatus::Ok,
        Err((s, _)) => s,
    }
}

/// Akers cell function `X·!Z + Y·Z`.
#[no_mangle]
pub extern "C" fn qcapim_eval_cell(x: bool, y: bool, z: bool) -> bool {
    akers::eval_cell(x, y, z)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcapim_params_default(out: *mut QcapimParams) -> QcapimStatus {
    guard(|| store(out, QcapimParams::from(&SimParams::default())))
}

/// Parses a layout file.
///
/// # Safety
/// `text` must be a valid C string; `out` must be writable. The handle
/// written to `out` must be released with [`qcapim_layout_free`].
#[no_mangle]
pub unsafe extern "C" fn qcapim_layout_parse(text_ptr: *const c_char, out: *mut *mut QcapimLayout) -> QcapimStatus {
    guard(|| {
        let layout = parse_layout(text(text_ptr)?).map_err(err(QcapimStatus::Parse))?;
        store(out, Box::into_raw(Box::new(QcapimLayout(layout))))
    })
}

/// Builds a layout: `primitive`, `xor`, `wire`, `inverter`, `majority`.
///
/// # Safety
/// As for [`qcapim_layout_parse`].
#[no_mangle]
pub unsafe extern "C" fn qcapim_layout_synthesize(target: *const c_char, out: *mut *mut QcapimLayout) -> QcapimStatus {
    guard(|| {
        let g = Geometry::default();
        let layout = match text(target)? {
            "primitive" => akers::synthesize_primitive_layout(g),
            "xor" => akers::synthesize_network_layout(&akers::build_xor_network(), g)
                .map_err(err(QcapimStatus::InvalidArgument))?,
            "wire" => akers::wire_layout(g),
            "inverter" => akers::inverter_layout(g),
            "majority" => akers::majority_layout(g),
            other => {
                return Err((QcapimStatus::InvalidArgument, format!("unknown target {other:?}")));
            }
        };
        store(out, Box::into_raw(Box::new(QcapimLayout(layout))))
    })
}

/// Synthesizes a layout from a network description.
///
/// # Safety
/// As for [`qcapim_layout_parse`].
#[no_mangle]
pub unsafe extern "C" fn qcapim_layout_from_network(
    network: *const c_char,
    out: *mut *mut QcapimLayout,
) -> QcapimStatus {
    guard(|| {
        let net = akers::parse_network(text(network)?).map_err(err(QcapimStatus::Parse))?;
        let layout = akers::synthesize_network_layout(&net, Geometry::default())
            .map_err(err(QcapimStatus::InvalidArgument))?;
        store(out, Box::into_raw(Box::new(QcapimLayout(layout))))
    })
}

/// # Safety
/// `layout` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcapim_layout_free(layout: *mut QcapimLayout) {
    if !layout.is_null() {
        drop(Box::from_raw(layout));
    }
}

/// Writes the layout file text into `buf`.
///
/// # Safety
/// `layout` must be a live handle; `buf` null or `len` writable bytes;
/// `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qcapim_layout_serialize(
    layout: *const QcapimLayout,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> QcapimStatus {
    guard(|| copy_out(&serialize(&deref(layout)?.0), buf, len, needed))
}

/// # Safety
/// `layout` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcapim_layout_metrics(
    layout: *const QcapimLayout,
    radius_nm: f64,
    out: *mut QcapimLayoutMetrics,
) -> QcapimStatus {
    guard(|| {
        let m = layout_metrics(&deref(layout)?.0, radius_nm).map_err(err(QcapimStatus::InvalidArgument))?;
        store(
            out,
            QcapimLayoutMetrics {
                cell_count: m.cell_count,
                area_um2: m.area_um2,
                clock_zone_regions: m.clock_zone_regions,
            },
        )
    })
}

/// Simulates every input vector in binary order over `params.num_samples`
/// samples. `clock_period` of 0 means one clock period per vector.
///
/// # Safety
/// `layout` and `params` must be valid; `out` writable. Release the result
/// with [`qcapim_traces_free`].
#[no_mangle]
pub unsafe extern "C" fn qcapim_simulate(
    layout: *const QcapimLayout,
    params: *const QcapimParams,
    clock_period: usize,
    threads: usize,
    out: *mut *mut QcapimTraces,
) -> QcapimStatus {
    guard(|| {
        let layout = &deref(layout)?.0;
        let p = SimParams::from(deref(params)?);
        let mut schedule = InputSchedule::exhaustive(&layout.input_labels(), p.num_samples)
            .map_err(err(QcapimStatus::InvalidArgument))?;
        if clock_period > 0 {
            schedule = schedule
                .with_clock_period(clock_period)
                .map_err(err(QcapimStatus::InvalidArgument))?;
        }
        let traces = Simulator::new(layout, &p)
            .and_then(|s| s.threads(threads).run(&schedule))
            .map_err(err(QcapimStatus::Simulation))?;
        store(out, Box::into_raw(Box::new(QcapimTraces(traces))))
    })
}

/// # Safety
/// `traces` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcapim_traces_free(traces: *mut QcapimTraces) {
    if !traces.is_null() {
        drop(Box::from_raw(traces));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `traces` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcapim_traces_samples(traces: *const QcapimTraces) -> usize {
    traces.as_ref().map_or(0, |t| t.0.samples)
}

/// Polarization of the cell labelled `label` at `sample`.
///
/// # Safety
/// `traces` must be a live handle, `label` a C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcapim_traces_polarization(
    traces: *const QcapimTraces,
    label: *const c_char,
    sample: usize,
    out: *mut f64,
) -> QcapimStatus {
    guard(|| {
        let t = &deref(traces)?.0;
        let label = text(label)?;
        let cell = t
            .label_cell(label)
            .ok_or_else(|| (QcapimStatus::InvalidArgument, format!("no cell labelled {label:?}")))?;
        let p = t
            .polarization(cell, sample)
            .ok_or_else(|| (QcapimStatus::InvalidArgument, format!("sample {sample} out of range")))?;
        store(out, p)
    })
}

/// Writes the trace CSV into `buf`.
///
/// # Safety
/// As for [`qcapim_layout_serialize`].
#[no_mangle]
pub unsafe extern "C" fn qcapim_traces_csv(
    traces: *const QcapimTraces,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> QcapimStatus {
    guard(|| copy_out(&deref(traces)?.0.to_csv(1), buf, len, needed))
}

/// Simulates and checks the layout against `oracle`, or against its stored
/// oracle when `oracle` is null. A completed check that finds mismatches
/// fills `out` and returns `VerificationFailed`.
///
/// # Safety
/// `layout`, `params` must be valid; `oracle` null or a C string; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qcapim_verify(
    layout: *const QcapimLayout,
    params: *const QcapimParams,
    oracle: *const c_char,
    margin: f64,
    out: *mut QcapimVerifyResult,
) -> QcapimStatus {
    guard(|| {
        let layout = &deref(layout)?.0;
        let p = SimParams::from(deref(params)?);
        let oracle = if oracle.is_null() {
            None
        } else {
            Some(Oracle::parse(text(oracle)?).map_err(err(QcapimStatus::Parse))?)
        };
        let check = verify_layout(layout, &p, oracle.as_ref(), margin, 1)
            .map_err(|e| (verify_status(&e), e.to_string()))?;
        let r = &check.report;
        store(
            out,
            QcapimVerifyResult {
                pass: r.pass,
                rows: r.rows,
                mismatches: r.mismatches.len(),
                latency_cycles: r.latency_cycles,
                min_margin: r.min_margin,
            },
        )?;
        if r.pass {
            Ok(())
        } else {
            Err((QcapimStatus::VerificationFailed, r.to_string()))
        }
    })
}

/// Dissipation report for one tunneling-energy ratio. The layout must
/// verify against its stored oracle.
///
/// # Safety
/// `layout`, `params` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcapim_dissipation(
    layout: *const QcapimLayout,
    params: *const QcapimParams,
    gamma_ratio: f64,
    out: *mut QcapimDissipation,
) -> QcapimStatus {
    guard(|| {
        let layout = &deref(layout)?.0;
        let p = SimParams::from(deref(params)?);
        let r = dissipation_reports(layout, &p, &[gamma_ratio], 1)
            .map_err(|e| match &e {
                MetricsError::Unverified(_) => (QcapimStatus::VerificationFailed, e.to_string()),
                MetricsError::Verify(v) => (verify_status(v), e.to_string()),
                MetricsError::Engine(_) => (QcapimStatus::Simulation, e.to_string()),
                _ => (QcapimStatus::InvalidArgument, e.to_string()),
            })?
            .remove(0);
        store(
            out,
            QcapimDissipation {
                gamma_ratio: r.gamma_ratio,
                kink_energy_mev: r.kink_energy_mev,
                max_circuit_mev: r.max_circuit_mev,
                avg_circuit_mev: r.avg_circuit_mev,
                min_circuit_mev: r.min_circuit_mev,
                max_cell_mev: r.max_cell_mev,
                avg_leakage_mev: r.avg_leakage_mev,
                avg_switching_mev: r.avg_switching_mev.unwrap_or(-1.0),
                argmax_pair: r.argmax_pair,
                argmin_pair: r.argmin_pair,
            },
        )
    })
}
