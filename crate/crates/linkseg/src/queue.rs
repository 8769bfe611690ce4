//! Closed-form metrics of the batch-arrival single-server queue.
//!
//! Messages arrive in a Poisson stream of rate lambda; each message turns
//! into a batch of packets that join an infinite FIFO queue served by one
//! constant-rate link. Packet service times are treated as independent
//! draws from the stationary packet-size law. The mean waiting time splits
//! into two parts: `EW1`, the batch's wait behind work already queued, and
//! `EW2`, the wait behind the body packets ahead of a message's edge
//! packet; the mean response time adds one mean packet service.

use crate::dist::MessageSizeDistribution;
use crate::error::Error;
use crate::segment::{segmentation_stats, SegmentationStats, Tolerance};

/// The link the packets are serialized onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Capacity in bytes per second.
    pub capacity: f64,
    /// Per-packet control overhead in bytes.
    pub header: f64,
}

impl LinkParams {
    pub fn new(capacity: f64, header: f64) -> Result<Self, Error> {
        let link = Self { capacity, header };
        link.validate()?;
        Ok(link)
    }

    pub(crate) fn validate(&self) -> Result<(), Error> {
        if !(self.capacity.is_finite() && self.capacity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "link capacity must be positive and finite, got {}",
                self.capacity
            )));
        }
        if !(self.header.is_finite() && self.header >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "header size must be non-negative and finite, got {}",
                self.header
            )));
        }
        Ok(())
    }
}

/// A complete system description: traffic, segmentation, and link.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub dist: MessageSizeDistribution,
    /// Payload size in bytes.
    pub payload: f64,
    pub link: LinkParams,
    /// Message (batch) arrival rate per second.
    pub lambda: f64,
}

impl Scenario {
    pub fn new(
        dist: MessageSizeDistribution,
        payload: f64,
        link: LinkParams,
        lambda: f64,
    ) -> Result<Self, Error> {
        let scenario = Self {
            dist,
            payload,
            link,
            lambda,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.payload.is_finite() && self.payload > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "payload size must be positive and finite, got {}",
                self.payload
            )));
        }
        self.link.validate()?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "arrival rate must be positive and finite, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Closed-form performance metrics; all times in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueingMetrics {
    /// Mean packet service time.
    pub es: f64,
    /// Second moment of the packet service time.
    pub es2: f64,
    /// Offered load; stability requires < 1.
    pub load: f64,
    /// Mean wait behind work queued ahead of the batch.
    pub ew1: f64,
    /// Mean wait behind body packets of the same message.
    pub ew2: f64,
    /// Mean total waiting time.
    pub ew: f64,
    /// Mean response time.
    pub er: f64,
    /// Set when the load exceeds 0.95, where both series truncation and
    /// simulation convergence deserve extra suspicion.
    pub high_load: bool,
}

/// Mean and second moment of the packet service time: a packet of payload
/// P needs (P + header) / capacity seconds on the link.
pub fn service_moments(stats: &SegmentationStats, link: &LinkParams) -> (f64, f64) {
    let on_link = stats.mean_packet + link.header;
    let es = on_link / link.capacity;
    let es2 = (stats.packet_variance + on_link * on_link) / (link.capacity * link.capacity);
    (es, es2)
}

/// Offered load: lambda * E[batch size] * E[service].
pub fn offered_load(lambda: f64, stats: &SegmentationStats, es: f64) -> f64 {
    lambda * stats.mean_batch * es
}

/// The two waiting-time components and their sum, in seconds.
///
/// `EW1` is the mean unfinished work an arriving batch finds: with
/// independent packet services the batch workload J has
/// E[J^2] = E[X] E[S^2] + (E[X^2] - E[X]) E[S]^2, and the stationary
/// workload mean is lambda E[J^2] / (2 (1 - a)).
///
/// `EW2` charges each message the body packets ahead of its edge packet,
/// averaged over messages: (ell_d + header) / capacity * (E[X] - 1).
pub fn waiting_time(
    lambda: f64,
    stats: &SegmentationStats,
    es: f64,
    es2: f64,
    payload: f64,
    link: &LinkParams,
) -> Result<(f64, f64, f64), Error> {
    let load = offered_load(lambda, stats, es);
    if load >= 1.0 {
        return Err(Error::Unstable { load });
    }
    let ex = stats.mean_batch;
    let ex2 = stats.mean_batch_sq;
    let ew1 = lambda * (ex * es2 + (ex2 - ex) * es * es) / (2.0 * (1.0 - load));
    let ew2 = (payload + link.header) / link.capacity * (ex - 1.0);
    Ok((ew1, ew2, ew1 + ew2))
}

/// Assembles the full metric set from precomputed segmentation statistics.
pub fn metrics_from_stats(
    lambda: f64,
    stats: &SegmentationStats,
    payload: f64,
    link: &LinkParams,
) -> Result<QueueingMetrics, Error> {
    let (es, es2) = service_moments(stats, link);
    let load = offered_load(lambda, stats, es);
    let (ew1, ew2, ew) = waiting_time(lambda, stats, es, es2, payload, link)?;
    Ok(QueueingMetrics {
        es,
        es2,
        load,
        ew1,
        ew2,
        ew,
        er: es + ew,
        high_load: load > 0.95,
    })
}

/// Closed-form mean response time and its components for a scenario.
pub fn response_time(scenario: &Scenario, tol: Tolerance) -> Result<QueueingMetrics, Error> {
    scenario.validate()?;
    let stats = segmentation_stats(&scenario.dist, scenario.payload, tol)?;
    metrics_from_stats(scenario.lambda, &stats, scenario.payload, &scenario.link)
}

/// Mean waiting time of the plain single-arrival queue with the same
/// service moments: lambda * E[S^2] / (2 (1 - lambda * E[S])). For large
/// payloads (one packet per message) this coincides with `waiting_time`.
pub fn mg1_waiting_approx(lambda: f64, es: f64, es2: f64) -> Result<f64, Error> {
    let rho = lambda * es;
    if rho >= 1.0 {
        return Err(Error::Unstable { load: rho });
    }
    Ok(lambda * es2 / (2.0 * (1.0 - rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::MessageSizeDistribution;

    fn det_stats(size: f64, payload: f64) -> SegmentationStats {
        let dist = MessageSizeDistribution::deterministic(size).unwrap();
        segmentation_stats(&dist, payload, Tolerance::default()).unwrap()
    }

    #[test]
    fn batch_waiting_decomposition() {
        let stats = det_stats(100.0, 40.0);
        let link = LinkParams::new(1.0, 0.0).unwrap();
        let (es, es2) = service_moments(&stats, &link);
        assert!((es - 100.0 / 3.0).abs() < 1e-12);
        assert!((es2 - 1200.0).abs() < 1e-9);
        let (ew1, ew2, ew) = waiting_time(0.005, &stats, es, es2, 40.0, &link).unwrap();
        assert!((ew1 - 154.0 / 3.0).abs() < 1e-9);
        assert!((ew2 - 80.0).abs() < 1e-12);
        assert!((ew - 394.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn saturated_link_is_refused() {
        let stats = det_stats(100.0, 100.0);
        let link = LinkParams::new(1.0, 0.0).unwrap();
        let (es, es2) = service_moments(&stats, &link);
        match waiting_time(0.01, &stats, es, es2, 100.0, &link) {
            Err(Error::Unstable { load }) => assert!((load - 1.0).abs() < 1e-12),
            other => panic!("expected instability, got {other:?}"),
        }
    }
}
