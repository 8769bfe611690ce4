//! Response time across payload sizes: sweeps, minimization, and a
//! convexity measure.
//!
//! Small payloads shred messages into many packets and pay the per-packet
//! header many times over; large payloads inflate the unit of service and
//! the wait behind it. In between, the mean response time is typically
//! convex with an interior minimum that sharpens as the arrival rate grows.

use crate::dist::MessageSizeDistribution;
use crate::error::Error;
use crate::queue::{
    metrics_from_stats, offered_load, service_moments, LinkParams, QueueingMetrics,
};
use crate::segment::{segmentation_stats, SegmentationStats, Tolerance};

/// A scenario with the payload size left open, plus the payload grid to
/// evaluate.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub dist: MessageSizeDistribution,
    pub link: LinkParams,
    pub lambda: f64,
    /// Payload sizes in bytes, strictly increasing.
    pub grid: Vec<f64>,
    pub tol: Tolerance,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), Error> {
        self.link.validate()?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "arrival rate must be positive and finite, got {}",
                self.lambda
            )));
        }
        self.tol.validate()?;
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter(
                "payload grid must not be empty".into(),
            ));
        }
        for pair in self.grid.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidParameter(format!(
                    "payload grid must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if !(self.grid[0].is_finite() && self.grid[0] > 0.0)
            || !self.grid[self.grid.len() - 1].is_finite()
        {
            return Err(Error::InvalidParameter(
                "payload grid values must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    fn with_grid(&self, grid: Vec<f64>) -> Self {
        Self {
            grid,
            ..self.clone()
        }
    }
}

/// Result of one grid point. Instability and series-truncation failure are
/// data, not errors: the sweep records them and moves on.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Stable {
        stats: SegmentationStats,
        metrics: QueueingMetrics,
    },
    /// Offered load at or above 1: no stationary regime.
    Unstable {
        stats: SegmentationStats,
        es: f64,
        es2: f64,
        load: f64,
    },
    /// The segmentation series did not converge within the term budget.
    TruncationFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub payload: f64,
    pub outcome: SweepOutcome,
}

impl SweepRow {
    /// Mean response time if this row is stable.
    pub fn er(&self) -> Option<f64> {
        match &self.outcome {
            SweepOutcome::Stable { metrics, .. } => Some(metrics.er),
            _ => None,
        }
    }
}

fn evaluate_point(spec: &SweepSpec, payload: f64) -> Result<SweepRow, Error> {
    let outcome = match segmentation_stats(&spec.dist, payload, spec.tol) {
        Err(Error::Truncation { .. }) => SweepOutcome::TruncationFailed,
        Err(other) => return Err(other),
        Ok(stats) => {
            let (es, es2) = service_moments(&stats, &spec.link);
            let load = offered_load(spec.lambda, &stats, es);
            if load >= 1.0 {
                SweepOutcome::Unstable {
                    stats,
                    es,
                    es2,
                    load,
                }
            } else {
                let metrics = metrics_from_stats(spec.lambda, &stats, payload, &spec.link)?;
                SweepOutcome::Stable { stats, metrics }
            }
        }
    };
    Ok(SweepRow { payload, outcome })
}

/// Evaluates every grid point, in grid order. Per-point failures are
/// recorded in the row; only an invalid spec aborts.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, Error> {
    spec.validate()?;
    spec.grid
        .iter()
        .map(|&payload| evaluate_point(spec, payload))
        .collect()
}

/// One refinement round of [`minimize_payload`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineStep {
    pub round: u32,
    /// Bracket searched this round.
    pub low: f64,
    pub high: f64,
    /// Best point after the round.
    pub best_payload: f64,
    pub best_er: f64,
}

fn best_stable(rows: &[SweepRow]) -> Option<(usize, f64, f64)> {
    rows.iter()
        .enumerate()
        .filter_map(|(index, row)| row.er().map(|er| (index, row.payload, er)))
        .min_by(|a, b| a.2.total_cmp(&b.2))
}

/// Log-spaced points from `low` through `mid` to `high`, ten subdivisions
/// per side, `mid` kept exactly so the incumbent stays evaluated.
fn refined_grid(low: f64, mid: f64, high: f64) -> Vec<f64> {
    let mut points = Vec::with_capacity(21);
    if low < mid {
        let ratio = mid / low;
        for k in 0..10 {
            points.push(low * ratio.powf(k as f64 / 10.0));
        }
    }
    points.push(mid);
    if high > mid {
        let ratio = high / mid;
        for k in 1..=10 {
            points.push(mid * ratio.powf(k as f64 / 10.0));
        }
    }
    let mut grid: Vec<f64> = Vec::with_capacity(points.len());
    for p in points {
        if grid.last().is_none_or(|&last| p > last * (1.0 + 1e-12)) {
            grid.push(p);
        }
    }
    grid
}

/// Minimizes the mean response time over payload size: a scan of the
/// spec's grid followed by `refine_iters` rounds of local log-grid
/// refinement around the incumbent, bracketed by its grid neighbors.
/// Returns the best evaluated (payload, mean response time).
pub fn minimize_payload(spec: &SweepSpec, refine_iters: u32) -> Result<(f64, f64), Error> {
    let (payload, er, _) = minimize_payload_traced(spec, refine_iters)?;
    Ok((payload, er))
}

/// [`minimize_payload`] plus the per-round refinement trace.
pub fn minimize_payload_traced(
    spec: &SweepSpec,
    refine_iters: u32,
) -> Result<(f64, f64, Vec<RefineStep>), Error> {
    let rows = sweep(spec)?;
    let Some((mut best_index, mut best_payload, mut best_er)) = best_stable(&rows) else {
        return Err(Error::NoStablePoint);
    };
    let mut grid = spec.grid.clone();
    let mut steps = Vec::new();

    for round in 0..refine_iters {
        let low = grid[best_index.saturating_sub(1)];
        let high = grid[(best_index + 1).min(grid.len() - 1)];
        let refined = refined_grid(low, best_payload, high);
        if refined.len() < 2 {
            break;
        }
        let sub_rows = sweep(&spec.with_grid(refined.clone()))?;
        // The refined grid contains the incumbent, so a stable best always
        // exists and can only improve on it.
        let Some((index, payload, er)) = best_stable(&sub_rows) else {
            break;
        };
        grid = refined;
        best_index = index;
        if er <= best_er {
            best_payload = payload;
            best_er = er;
        }
        steps.push(RefineStep {
            round,
            low,
            high,
            best_payload,
            best_er,
        });
    }
    Ok((best_payload, best_er, steps))
}

/// Ratio of the worse endpoint response time to the minimum, over the
/// stable rows: 1 for a flat curve, growing as the valley deepens.
pub fn convexity_index(rows: &[SweepRow]) -> Result<f64, Error> {
    let stable: Vec<f64> = rows.iter().filter_map(SweepRow::er).collect();
    if stable.len() < 3 {
        return Err(Error::TooFewPoints(stable.len()));
    }
    let first = stable[0];
    let last = stable[stable.len() - 1];
    let min = stable.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(first.max(last) / min)
}

/// Default payload grid: 40 log-spaced points per decade from 64 bytes to
/// twice the message distribution's 99.99th percentile, with the unstable
/// low end clipped off. Points whose series fail to converge at `tol` are
/// treated as unusable and clipped with the unstable ones.
pub fn default_grid(
    dist: &MessageSizeDistribution,
    lambda: f64,
    link: &LinkParams,
    tol: Tolerance,
) -> Result<Vec<f64>, Error> {
    link.validate()?;
    tol.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "arrival rate must be positive and finite, got {lambda}"
        )));
    }

    let low = 64.0_f64;
    let high = 2.0 * dist.quantile(0.9999);
    let grid = if high <= low {
        vec![low]
    } else {
        let steps = ((high / low).log10() * 40.0).ceil() as usize;
        let mut grid: Vec<f64> = (0..steps)
            .map(|k| low * 10f64.powf(k as f64 / 40.0))
            .take_while(|&p| p < high)
            .collect();
        grid.push(high);
        grid
    };

    // The offered load is non-increasing in the payload size (fewer packets
    // means less header overhead), so the stable region is a suffix of the
    // grid; binary-search its first point.
    let stable_at = |payload: f64| -> bool {
        match segmentation_stats(dist, payload, tol) {
            Ok(stats) => {
                let (es, _) = service_moments(&stats, link);
                offered_load(lambda, &stats, es) < 1.0
            }
            Err(_) => false,
        }
    };
    let mut lo = 0usize;
    let mut hi = grid.len();
    while lo < hi {
        let mid = (lo + hi) / 2;
        if stable_at(grid[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if lo == grid.len() {
        return Err(Error::NoStablePoint);
    }
    Ok(grid[lo..].to_vec())
}
