//! C ABI over the linkseg library.
//!
//! The unit of work is an opaque scenario handle carrying a message-size
//! distribution, a payload size, link parameters, an arrival rate, and a
//! series tolerance. Every function returns a [`LinksegStatus`]; results
//! travel through out-pointers. Handles come from the `linkseg_scenario_*`
//! constructors and must be released with [`linkseg_scenario_free`].
//!
//! The generated header lands in `include/linkseg.h` at build time.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use linkseg::queue::{metrics_from_stats, LinkParams, Scenario};
use linkseg::segment::{segmentation_stats, Tolerance};
use linkseg::sweep::{minimize_payload, SweepSpec};
use linkseg::{Error, MessageSizeDistribution, SimConfig};

/// Outcome of a call. Zero is success; everything else identifies the
/// failure class.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinksegStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was outside its domain.
    InvalidArgument = 2,
    /// Offered load at or beyond saturation; no steady state exists.
    Unstable = 3,
    /// The segmentation series did not converge within its term budget.
    Truncation = 4,
    /// Every point of the optimization grid was unstable.
    NoStablePoint = 5,
    /// File input or output failed.
    Io = 6,
    /// Internal failure inside the library.
    Internal = 7,
}

/// Closed-form segmentation and queueing metrics for one scenario.
///
/// Sizes are in bytes, times in seconds; `load` and `edge_probability`
/// are dimensionless.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinksegMetrics {
    /// Probability that a packet is a message's final (edge) packet.
    pub edge_probability: f64,
    /// Mean packet payload, bytes.
    pub mean_packet: f64,
    /// Packet payload variance, bytes squared.
    pub packet_variance: f64,
    /// Mean packets per message.
    pub mean_batch: f64,
    /// Second moment of packets per message.
    pub mean_batch_sq: f64,
    /// Mean packet service time, seconds.
    pub es: f64,
    /// Second moment of packet service time, seconds squared.
    pub es2: f64,
    /// Offered load; must stay below 1 for stability.
    pub load: f64,
    /// Mean queueing delay, seconds.
    pub ew1: f64,
    /// Mean segmentation delay, seconds.
    pub ew2: f64,
    /// Mean waiting time, seconds.
    pub ew: f64,
    /// Mean response time, seconds.
    pub er: f64,
}

/// Simulation estimates with half-widths of the configured two-sided
/// confidence intervals.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinksegSimResult {
    pub mean_w1: f64,
    pub hw_w1: f64,
    pub mean_w2: f64,
    pub hw_w2: f64,
    pub mean_r_composed: f64,
    pub hw_r_composed: f64,
    pub mean_r_packet: f64,
    pub hw_r_packet: f64,
    pub utilization: f64,
    /// Total measured messages across replications.
    pub messages: u64,
}

/// Opaque scenario handle. The C side only ever sees pointers to it.
pub struct LinksegScenario {
    inner: Scenario,
    tol: Tolerance,
}

fn status_of(e: &Error) -> LinksegStatus {
    match e {
        Error::InvalidParameter(_) | Error::Parse { .. } | Error::TooFewPoints(_) => {
            LinksegStatus::InvalidArgument
        }
        Error::Unstable { .. } => LinksegStatus::Unstable,
        Error::Truncation { .. } => LinksegStatus::Truncation,
        Error::NoStablePoint => LinksegStatus::NoStablePoint,
        Error::Io(_) => LinksegStatus::Io,
    }
}

fn guarded(f: impl FnOnce() -> LinksegStatus) -> LinksegStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(LinksegStatus::Internal)
}

fn new_scenario(
    dist: Result<MessageSizeDistribution, Error>,
    payload: f64,
    capacity: f64,
    header: f64,
    lambda: f64,
    out: *mut *mut LinksegScenario,
) -> LinksegStatus {
    guarded(|| {
        if out.is_null() {
            return LinksegStatus::NullPointer;
        }
        let build = || -> Result<Scenario, Error> {
            let link = LinkParams::new(capacity, header)?;
            Scenario::new(dist?, payload, link, lambda)
        };
        match build() {
            Ok(inner) => {
                let handle = Box::new(LinksegScenario {
                    inner,
                    tol: Tolerance::default(),
                });
                unsafe { *out = Box::into_raw(handle) };
                LinksegStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Creates a scenario with a fixed message size (bytes).
#[no_mangle]
pub extern "C" fn linkseg_scenario_deterministic(
    message_size: f64,
    payload: f64,
    capacity_bytes_per_sec: f64,
    header_bytes: f64,
    lambda: f64,
    out: *mut *mut LinksegScenario,
) -> LinksegStatus {
    new_scenario(
        MessageSizeDistribution::deterministic(message_size),
        payload,
        capacity_bytes_per_sec,
        header_bytes,
        lambda,
        out,
    )
}

/// Creates a scenario with exponentially distributed message sizes.
#[no_mangle]
pub extern "C" fn linkseg_scenario_exponential(
    mean_size: f64,
    payload: f64,
    capacity_bytes_per_sec: f64,
    header_bytes: f64,
    lambda: f64,
    out: *mut *mut LinksegScenario,
) -> LinksegStatus {
    new_scenario(
        MessageSizeDistribution::exponential(mean_size),
        payload,
        capacity_bytes_per_sec,
        header_bytes,
        lambda,
        out,
    )
}

/// Creates a scenario with lognormal message sizes given log-space
/// parameters.
#[no_mangle]
pub extern "C" fn linkseg_scenario_lognormal(
    mu: f64,
    sigma: f64,
    payload: f64,
    capacity_bytes_per_sec: f64,
    header_bytes: f64,
    lambda: f64,
    out: *mut *mut LinksegScenario,
) -> LinksegStatus {
    new_scenario(
        MessageSizeDistribution::lognormal(mu, sigma),
        payload,
        capacity_bytes_per_sec,
        header_bytes,
        lambda,
        out,
    )
}

/// Creates a scenario with lognormal message sizes given the target mean
/// and standard deviation (bytes).
#[no_mangle]
pub extern "C" fn linkseg_scenario_lognormal_from_moments(
    mean_size: f64,
    std_size: f64,
    payload: f64,
    capacity_bytes_per_sec: f64,
    header_bytes: f64,
    lambda: f64,
    out: *mut *mut LinksegScenario,
) -> LinksegStatus {
    new_scenario(
        MessageSizeDistribution::lognormal_from_moments(mean_size, std_size),
        payload,
        capacity_bytes_per_sec,
        header_bytes,
        lambda,
        out,
    )
}

/// Creates a scenario whose message sizes are drawn uniformly from the
/// given sample (treated as the exact population). The sample is copied.
#[no_mangle]
pub extern "C" fn linkseg_scenario_empirical(
    sizes: *const f64,
    len: usize,
    payload: f64,
    capacity_bytes_per_sec: f64,
    header_bytes: f64,
    lambda: f64,
    out: *mut *mut LinksegScenario,
) -> LinksegStatus {
    if sizes.is_null() {
        return LinksegStatus::NullPointer;
    }
    let samples = unsafe { std::slice::from_raw_parts(sizes, len) }.to_vec();
    new_scenario(
        MessageSizeDistribution::empirical(samples),
        payload,
        capacity_bytes_per_sec,
        header_bytes,
        lambda,
        out,
    )
}

/// Replaces the series tolerance (relative tolerance and term budget).
#[no_mangle]
pub extern "C" fn linkseg_scenario_set_tolerance(
    scenario: *mut LinksegScenario,
    eps_rel: f64,
    n_max: u64,
) -> LinksegStatus {
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_mut() }) else {
            return LinksegStatus::NullPointer;
        };
        match Tolerance::new(eps_rel, n_max) {
            Ok(tol) => {
                handle.tol = tol;
                LinksegStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Replaces the payload size (bytes).
#[no_mangle]
pub extern "C" fn linkseg_scenario_set_payload(
    scenario: *mut LinksegScenario,
    payload: f64,
) -> LinksegStatus {
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_mut() }) else {
            return LinksegStatus::NullPointer;
        };
        let updated = Scenario::new(
            handle.inner.dist.clone(),
            payload,
            handle.inner.link,
            handle.inner.lambda,
        );
        match updated {
            Ok(inner) => {
                handle.inner = inner;
                LinksegStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Computes the closed-form metrics. Unstable scenarios still fill the
/// segmentation and service fields; the waiting-time fields are NaN and
/// the status is `UNSTABLE`.
#[no_mangle]
pub extern "C" fn linkseg_analyze(
    scenario: *const LinksegScenario,
    out: *mut LinksegMetrics,
) -> LinksegStatus {
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_ref() }) else {
            return LinksegStatus::NullPointer;
        };
        if out.is_null() {
            return LinksegStatus::NullPointer;
        }
        let stats = match segmentation_stats(&handle.inner.dist, handle.inner.payload, handle.tol)
        {
            Ok(stats) => stats,
            Err(e) => return status_of(&e),
        };
        let result = metrics_from_stats(
            handle.inner.lambda,
            &stats,
            handle.inner.payload,
            &handle.inner.link,
        );
        let mut metrics = LinksegMetrics {
            edge_probability: stats.edge_probability,
            mean_packet: stats.mean_packet,
            packet_variance: stats.packet_variance,
            mean_batch: stats.mean_batch,
            mean_batch_sq: stats.mean_batch_sq,
            es: f64::NAN,
            es2: f64::NAN,
            load: f64::NAN,
            ew1: f64::NAN,
            ew2: f64::NAN,
            ew: f64::NAN,
            er: f64::NAN,
        };
        let status = match result {
            Ok(m) => {
                metrics.es = m.es;
                metrics.es2 = m.es2;
                metrics.load = m.load;
                metrics.ew1 = m.ew1;
                metrics.ew2 = m.ew2;
                metrics.ew = m.ew;
                metrics.er = m.er;
                LinksegStatus::Ok
            }
            Err(e) => {
                if let Error::Unstable { load } = e {
                    metrics.load = load;
                }
                status_of(&e)
            }
        };
        unsafe { *out = metrics };
        status
    })
}

/// Runs the discrete-event simulation oracle for the scenario.
#[no_mangle]
pub extern "C" fn linkseg_simulate(
    scenario: *const LinksegScenario,
    warmup_messages: u64,
    measured_messages: u64,
    replications: u32,
    base_seed: u64,
    confidence_level: f64,
    out: *mut LinksegSimResult,
) -> LinksegStatus {
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_ref() }) else {
            return LinksegStatus::NullPointer;
        };
        if out.is_null() {
            return LinksegStatus::NullPointer;
        }
        let cfg = SimConfig {
            warmup_messages,
            measured_messages,
            replications,
            base_seed,
            confidence_level,
        };
        match linkseg::sim::run(&handle.inner, &cfg, handle.tol) {
            Ok(r) => {
                unsafe {
                    *out = LinksegSimResult {
                        mean_w1: r.mean_w1.value,
                        hw_w1: r.mean_w1.half_width,
                        mean_w2: r.mean_w2.value,
                        hw_w2: r.mean_w2.half_width,
                        mean_r_composed: r.mean_r_composed.value,
                        hw_r_composed: r.mean_r_composed.half_width,
                        mean_r_packet: r.mean_r_packet.value,
                        hw_r_packet: r.mean_r_packet.half_width,
                        utilization: r.utilization,
                        messages: r.messages_simulated,
                    }
                };
                LinksegStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Finds the payload size minimizing the mean response time over a
/// strictly increasing grid, then `refine_iters` local refinement rounds.
#[no_mangle]
pub extern "C" fn linkseg_optimize(
    scenario: *const LinksegScenario,
    grid: *const f64,
    grid_len: usize,
    refine_iters: u32,
    best_payload: *mut f64,
    best_er: *mut f64,
) -> LinksegStatus {
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_ref() }) else {
            return LinksegStatus::NullPointer;
        };
        if grid.is_null() || best_payload.is_null() || best_er.is_null() {
            return LinksegStatus::NullPointer;
        }
        let grid = unsafe { std::slice::from_raw_parts(grid, grid_len) }.to_vec();
        let spec = SweepSpec {
            dist: handle.inner.dist.clone(),
            link: handle.inner.link,
            lambda: handle.inner.lambda,
            grid,
            tol: handle.tol,
        };
        match minimize_payload(&spec, refine_iters) {
            Ok((payload, er)) => {
                unsafe {
                    *best_payload = payload;
                    *best_er = er;
                }
                LinksegStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a scenario handle. Null is acceptable and ignored.
#[no_mangle]
pub extern "C" fn linkseg_scenario_free(scenario: *mut LinksegScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Returns a static, nul-terminated description of a status code.
#[no_mangle]
pub extern "C" fn linkseg_status_describe(status: LinksegStatus) -> *const c_char {
    let text: &'static std::ffi::CStr = match status {
        LinksegStatus::Ok => c"ok",
        LinksegStatus::NullPointer => c"a required pointer argument was null",
        LinksegStatus::InvalidArgument => c"an argument was outside its domain",
        LinksegStatus::Unstable => c"offered load at or beyond saturation",
        LinksegStatus::Truncation => c"series did not converge within its term budget",
        LinksegStatus::NoStablePoint => c"no stable payload size in the grid",
        LinksegStatus::Io => c"file input or output failed",
        LinksegStatus::Internal => c"internal failure",
    };
    text.as_ptr()
}
