//! Message segmentation: packet-level quantities induced by slicing
//! messages into payload-sized packets.
//!
//! A message of size `m` becomes `ceil(m / ell_d)` packets: body packets
//! carrying exactly `ell_d` payload bytes, then one edge packet carrying the
//! remainder in `(0, ell_d]`. A message of exactly `k * ell_d` bytes yields
//! `k` packets whose last is a full-size edge packet.
//!
//! The derived statistics (edge-packet probability, packet-size moments,
//! batch-size moments) are infinite series in the message-size tail. Series
//! are summed term by term with compensated accumulation and stopped once
//! certified integral tail brackets are tight enough; the midpoint of the
//! final bracket is added to the sum and its half-width reported as the
//! remaining uncertainty. Series over distributions with bounded support
//! terminate exactly at the first zero term.

use crate::dist::MessageSizeDistribution;
use crate::error::Error;

/// Convergence control for the series this module truncates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative tolerance: iteration stops once every certified tail bound
    /// drops below this fraction of its partial sum.
    pub eps_rel: f64,
    /// Hard cap on the number of series terms before giving up with
    /// [`Error::Truncation`].
    pub n_max: u64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps_rel: 1e-9,
            n_max: 1 << 22,
        }
    }
}

impl Tolerance {
    pub fn new(eps_rel: f64, n_max: u64) -> Result<Self, Error> {
        let tol = Self { eps_rel, n_max };
        tol.validate()?;
        Ok(tol)
    }

    pub(crate) fn validate(&self) -> Result<(), Error> {
        if !(self.eps_rel.is_finite() && self.eps_rel > 0.0 && self.eps_rel < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "relative tolerance must lie in (0, 1), got {}",
                self.eps_rel
            )));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidParameter(
                "term budget must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Partial sums of the three segmentation series with certified bounds on
/// the discarded tails.
///
/// `sum_u` includes the n = 0 term (always 1); `sum_v` includes the n = 0
/// term (the message mean). `sum_nu` starts at n = 1 where the series does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesAccumulation {
    /// Number of terms beyond n = 0 included in the sums.
    pub terms_used: u64,
    /// sum over n of P(message > n * ell_d).
    pub sum_u: f64,
    /// sum over n of n * P(message > n * ell_d).
    pub sum_nu: f64,
    /// sum over n of E[message; message > n * ell_d].
    pub sum_v: f64,
    pub tail_bound_u: f64,
    pub tail_bound_nu: f64,
    pub tail_bound_v: f64,
}

/// Packet- and batch-level moments of the segmented message stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationStats {
    /// Probability that a randomly chosen packet is an edge packet.
    pub edge_probability: f64,
    /// Mean packet payload size in bytes.
    pub mean_packet: f64,
    /// Variance of packet payload sizes in bytes^2.
    pub packet_variance: f64,
    /// Mean packet count per message.
    pub mean_batch: f64,
    /// Mean squared packet count per message.
    pub mean_batch_sq: f64,
    /// The series sums the moments were computed from.
    pub series: SeriesAccumulation,
}

/// Neumaier-compensated summation; keeps millions of small terms from
/// drowning in rounding error.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, term: f64) {
        let total = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - total) + term;
        } else {
            self.compensation += (term - total) + self.sum;
        }
        self.sum = total;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn validate_payload(ell_d: f64) -> Result<(), Error> {
    if ell_d.is_finite() && ell_d > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "payload size must be positive and finite, got {ell_d}"
        )))
    }
}

/// nth series term: 1 for n = 0, else P(message > n * ell_d).
pub fn u_term(dist: &MessageSizeDistribution, ell_d: f64, n: u64) -> f64 {
    if n == 0 {
        1.0
    } else {
        dist.survival(n as f64 * ell_d)
    }
}

/// Integral of P(M > y) over [t, inf); equals E[(M - t)+].
fn survival_integral(dist: &MessageSizeDistribution, t: f64) -> f64 {
    (dist.tail_mean(t) - t * dist.survival(t)).max(0.0)
}

/// Integral of y * P(M > y) over [t, inf); equals E[(M^2 - t^2)+] / 2.
fn weighted_survival_integral(dist: &MessageSizeDistribution, t: f64) -> f64 {
    ((dist.tail_second_moment(t) - t * t * dist.survival(t)) / 2.0).max(0.0)
}

/// Integral of E[M; M > y] over [t, inf); equals E[M * (M - t)+].
fn tail_mean_integral(dist: &MessageSizeDistribution, t: f64) -> f64 {
    (dist.tail_second_moment(t) - t * dist.tail_mean(t)).max(0.0)
}

#[derive(Debug, Clone, Copy)]
struct TailBracket {
    low: f64,
    high: f64,
}

impl TailBracket {
    fn new(low: f64, high: f64) -> Self {
        Self {
            low: low.min(high),
            high,
        }
    }

    fn half_width(&self) -> f64 {
        (self.high - self.low) / 2.0
    }

    fn midpoint(&self) -> f64 {
        (self.high + self.low) / 2.0
    }
}

/// Brackets for the three series tails past index `n`. All three summands
/// are non-increasing against their integral comparisons, so sandwiching
/// the sum over n+1, n+2, ... between shifted integrals is rigorous.
fn tail_brackets(
    dist: &MessageSizeDistribution,
    ell_d: f64,
    n: u64,
) -> (TailBracket, TailBracket, TailBracket) {
    let t0 = n as f64 * ell_d;
    let t1 = (n + 1) as f64 * ell_d;

    let u0 = survival_integral(dist, t0) / ell_d;
    let u1 = survival_integral(dist, t1) / ell_d;
    let bracket_u = TailBracket::new(u1, u0);

    // sum of k * u_k over k > n compares against the integral of
    // (y/ell_d +- 1) * P(M > y) / ell_d.
    let y0 = weighted_survival_integral(dist, t0) / (ell_d * ell_d);
    let y1 = weighted_survival_integral(dist, t1) / (ell_d * ell_d);
    let bracket_nu = TailBracket::new((y1 - u1).max(0.0), y0 + u0);

    let v0 = tail_mean_integral(dist, t0) / ell_d;
    let v1 = tail_mean_integral(dist, t1) / ell_d;
    let bracket_v = TailBracket::new(v1, v0);

    (bracket_u, bracket_nu, bracket_v)
}

/// Sums the three segmentation series until every certified tail bound
/// drops below `tol.eps_rel` of its partial sum, or the series terminates
/// exactly at its first zero term.
///
/// Tail brackets are only evaluated at geometrically spaced checkpoints
/// (step n/8), keeping the bracket overhead negligible on series needing
/// millions of terms.
pub fn accumulate_series(
    dist: &MessageSizeDistribution,
    ell_d: f64,
    tol: Tolerance,
) -> Result<SeriesAccumulation, Error> {
    validate_payload(ell_d)?;
    tol.validate()?;

    let mean = dist.mean();
    let mut acc_u = CompensatedSum::default();
    let mut acc_nu = CompensatedSum::default();
    let mut acc_v = CompensatedSum::default();
    let mut n: u64 = 0;
    let mut checkpoint: u64 = 1;

    loop {
        while n < checkpoint {
            let i = n + 1;
            let t = i as f64 * ell_d;
            let u = dist.survival(t);
            if u == 0.0 {
                // The remaining terms are all zero: the tails vanish.
                return Ok(SeriesAccumulation {
                    terms_used: n,
                    sum_u: 1.0 + acc_u.value(),
                    sum_nu: acc_nu.value(),
                    sum_v: mean + acc_v.value(),
                    tail_bound_u: 0.0,
                    tail_bound_nu: 0.0,
                    tail_bound_v: 0.0,
                });
            }
            acc_u.add(u);
            acc_nu.add(i as f64 * u);
            acc_v.add(dist.tail_mean(t));
            n = i;
        }

        let (bracket_u, bracket_nu, bracket_v) = tail_brackets(dist, ell_d, n);
        let sum_u = 1.0 + acc_u.value();
        let sum_nu = acc_nu.value();
        let sum_v = mean + acc_v.value();
        if bracket_u.half_width() <= tol.eps_rel * sum_u
            && bracket_nu.half_width() <= tol.eps_rel * sum_nu
            && bracket_v.half_width() <= tol.eps_rel * sum_v
        {
            return Ok(SeriesAccumulation {
                terms_used: n,
                sum_u: sum_u + bracket_u.midpoint(),
                sum_nu: sum_nu + bracket_nu.midpoint(),
                sum_v: sum_v + bracket_v.midpoint(),
                tail_bound_u: bracket_u.half_width(),
                tail_bound_nu: bracket_nu.half_width(),
                tail_bound_v: bracket_v.half_width(),
            });
        }
        if n >= tol.n_max {
            return Err(Error::Truncation {
                payload: ell_d,
                n_max: tol.n_max,
            });
        }
        checkpoint = (n + (n / 8).max(1)).min(tol.n_max);
    }
}

/// Packet- and batch-level moments for `dist` segmented at payload `ell_d`.
pub fn segmentation_stats(
    dist: &MessageSizeDistribution,
    ell_d: f64,
    tol: Tolerance,
) -> Result<SegmentationStats, Error> {
    let series = accumulate_series(dist, ell_d, tol)?;
    let mean = dist.mean();
    let variance = dist.variance();

    let mean_batch = series.sum_u;
    let mean_batch_sq = 2.0 * series.sum_nu + series.sum_u;
    let edge_probability = 1.0 / mean_batch;
    let mean_packet = edge_probability * mean;

    // Second moment of the packet payload: the body packets contribute
    // ell_d^2 each, the edge packet the squared remainder; expanding the
    // remainder reduces everything to the three series sums.
    let second_moment = edge_probability * (mean * mean + variance)
        + 2.0 * edge_probability * ell_d * mean
        - 2.0 * edge_probability * ell_d * (series.sum_v - ell_d * series.sum_nu);
    let packet_variance = (second_moment - mean_packet * mean_packet).max(0.0);

    Ok(SegmentationStats {
        edge_probability,
        mean_packet,
        packet_variance,
        mean_batch,
        mean_batch_sq,
        series,
    })
}

/// Number of packets a message of `message` bytes produces at payload size
/// `ell_d`. Exact multiples of `ell_d` yield exactly `message / ell_d`
/// packets; the guards repair the one-ulp slips `ceil` can introduce so the
/// edge payload always lands in `(0, ell_d]`.
pub fn packet_count(message: f64, ell_d: f64) -> u64 {
    debug_assert!(message > 0.0 && ell_d > 0.0);
    let mut k = (message / ell_d).ceil().max(1.0);
    let edge = message - ell_d * (k - 1.0);
    if edge <= 0.0 {
        k -= 1.0;
    } else if edge > ell_d {
        k += 1.0;
    }
    k as u64
}

/// Payload of the final packet of a message: the remainder in `(0, ell_d]`.
pub(crate) fn edge_payload(message: f64, ell_d: f64) -> f64 {
    message - ell_d * (packet_count(message, ell_d) - 1) as f64
}

/// Splits a message into its packet payloads: body payloads of exactly
/// `ell_d` first, the edge payload last. Payloads sum to `message`.
pub fn segment_message(message: f64, ell_d: f64) -> Result<Vec<f64>, Error> {
    if !(message.is_finite() && message > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "message size must be positive and finite, got {message}"
        )));
    }
    validate_payload(ell_d)?;
    let count = packet_count(message, ell_d);
    let mut payloads = vec![ell_d; (count - 1) as usize];
    payloads.push(message - ell_d * (count - 1) as f64);
    Ok(payloads)
}

/// CDF of the edge-packet payload size, as the series of message-mass slices
/// P(n * ell_d < M <= n * ell_d + x). The discarded tail lies inside
/// disjoint slices of ((N+1) * ell_d, inf), so it is bounded by the message
/// survival there; the bound is midpoint-corrected like the moment series.
/// An absolute floor of 1e-15 keeps far-tail evaluations (where the partial
/// sum itself is negligible) from spinning without progress.
pub fn edge_cdf(
    dist: &MessageSizeDistribution,
    ell_d: f64,
    x: f64,
    tol: Tolerance,
) -> Result<f64, Error> {
    validate_payload(ell_d)?;
    tol.validate()?;
    if x.is_nan() {
        return Err(Error::InvalidParameter(
            "edge CDF argument must not be NaN".into(),
        ));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= ell_d {
        return Ok(1.0);
    }

    const ABS_FLOOR: f64 = 1e-15;
    let mut acc = CompensatedSum::default();
    let mut survival_lo = dist.survival(0.0);
    let mut n: u64 = 0;
    loop {
        if survival_lo == 0.0 {
            // No message mass beyond n * ell_d: the series has ended.
            return Ok(acc.value().clamp(0.0, 1.0));
        }
        let t = n as f64 * ell_d;
        acc.add((survival_lo - dist.survival(t + x)).max(0.0));
        let survival_hi = dist.survival(t + ell_d);
        let half = survival_hi / 2.0;
        if half <= tol.eps_rel * acc.value() + ABS_FLOOR {
            return Ok((acc.value() + half).clamp(0.0, 1.0));
        }
        if n + 1 >= tol.n_max {
            return Err(Error::Truncation {
                payload: ell_d,
                n_max: tol.n_max,
            });
        }
        survival_lo = survival_hi;
        n += 1;
    }
}

/// CDF of the stationary packet payload size: a body-packet atom of mass
/// 1 - edge_probability at `ell_d` (included at x = ell_d) mixed with the
/// edge-packet CDF.
pub fn packet_cdf(
    dist: &MessageSizeDistribution,
    ell_d: f64,
    x: f64,
    tol: Tolerance,
) -> Result<f64, Error> {
    validate_payload(ell_d)?;
    tol.validate()?;
    if x.is_nan() {
        return Err(Error::InvalidParameter(
            "packet CDF argument must not be NaN".into(),
        ));
    }
    if x >= ell_d {
        return Ok(1.0);
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let series = accumulate_series(dist, ell_d, tol)?;
    let edge_probability = 1.0 / series.sum_u;
    Ok((edge_probability * edge_cdf(dist, ell_d, x, tol)?).clamp(0.0, 1.0))
}
