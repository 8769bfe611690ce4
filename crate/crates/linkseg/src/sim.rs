//! Discrete-event simulation of the batch-arrival single-server queue.
//!
//! The simulator realizes exactly the stochastic model the closed forms in
//! [`crate::queue`] evaluate: batches arrive in a Poisson stream; each batch
//! carries the packet count of one sampled message; every packet's service
//! time is an independent draw from the stationary packet-payload law (a
//! body payload with probability 1 - edge_probability, otherwise the edge
//! payload of an independently sampled message). Measured and predicted
//! quantities are therefore estimates of the same system, and disagreement
//! beyond confidence intervals indicts the closed forms, not the pairing.
//!
//! Measured per message: the `W1` sample is the real queueing delay from
//! batch arrival until its first packet starts service; the `W2` sample is
//! the body-packets-ahead charge (X - 1) * (payload + header) / capacity,
//! the exact quantity the closed-form `EW2` averages. Per packet, the
//! response sample is departure minus batch arrival.
//!
//! Single-server FIFO dynamics reduce to a workload recursion: the backlog
//! drains at unit rate between arrivals and jumps by the batch workload at
//! each arrival, so event times can be replayed from arrivals and service
//! durations alone.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution as _;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::Error;
use crate::queue::{offered_load, service_moments, Scenario};
use crate::segment::{edge_payload, packet_count, segmentation_stats, CompensatedSum, Tolerance};

/// Run lengths, replication count, and seeding for one simulation study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Messages discarded at the start of every replication.
    pub warmup_messages: u64,
    /// Messages measured per replication; at least 1000.
    pub measured_messages: u64,
    /// Independent replications; at least 2.
    pub replications: u32,
    /// Seed shared by all replications; each replication uses its own
    /// stream of the generator.
    pub base_seed: u64,
    /// Two-sided confidence level for the reported half-widths.
    pub confidence_level: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            warmup_messages: 10_000,
            measured_messages: 100_000,
            replications: 10,
            base_seed: 1,
            confidence_level: 0.95,
        }
    }
}

impl SimConfig {
    pub(crate) fn validate(&self) -> Result<(), Error> {
        if self.measured_messages < 1000 {
            return Err(Error::InvalidParameter(format!(
                "need at least 1000 measured messages per replication, got {}",
                self.measured_messages
            )));
        }
        if self.replications < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 replications, got {}",
                self.replications
            )));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "confidence level must lie in (0, 1), got {}",
                self.confidence_level
            )));
        }
        Ok(())
    }
}

/// A point estimate with its confidence-interval half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
}

/// Simulation estimates across replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    /// Mean delay from batch arrival to first service start.
    pub mean_w1: Estimate,
    /// Mean body-packets-ahead charge per message.
    pub mean_w2: Estimate,
    /// Mean per-message W1 + W2 plus the mean packet service time: the
    /// composition the closed-form mean response time prices.
    pub mean_r_composed: Estimate,
    /// Mean per-packet response (departure minus batch arrival).
    pub mean_r_packet: Estimate,
    /// Fraction of offered work per unit time over the measurement window.
    pub utilization: f64,
    /// Total measured messages across replications.
    pub messages_simulated: u64,
}

/// What happened to one packet, in one chronological trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival,
    ServiceStart,
    Departure,
}

impl EventKind {
    fn rank(self) -> u8 {
        match self {
            EventKind::Arrival => 0,
            EventKind::ServiceStart => 1,
            EventKind::Departure => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::ServiceStart => "service_start",
            EventKind::Departure => "departure",
        }
    }
}

/// One packet event. `size_bytes` is the packet's payload size; its time
/// on the link is (size_bytes + header) / capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub time: f64,
    pub kind: EventKind,
    pub message_id: u64,
    pub packet_index: u32,
    pub size_bytes: f64,
}

struct TraceRecorder {
    events: Vec<SimEvent>,
    limit: usize,
}

impl TraceRecorder {
    fn push(&mut self, event: SimEvent) {
        if self.events.len() < self.limit {
            self.events.push(event);
        }
    }
}

struct RepStats {
    w1: f64,
    w2: f64,
    r_composed: f64,
    r_packet: f64,
    utilization: f64,
}

fn simulate_replication(
    scenario: &Scenario,
    cfg: &SimConfig,
    edge_probability: f64,
    stream: u64,
    mut trace: Option<&mut TraceRecorder>,
) -> RepStats {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.base_seed);
    rng.set_stream(stream);
    let inter_arrival =
        rand_distr::Exp::new(scenario.lambda).expect("scenario validated before simulation");

    let payload = scenario.payload;
    let header = scenario.link.header;
    let capacity = scenario.link.capacity;
    let body_service = (payload + header) / capacity;

    let total_messages = cfg.warmup_messages + cfg.measured_messages;
    let mut clock = 0.0_f64;
    let mut backlog = 0.0_f64;
    let mut previous_arrival = 0.0_f64;

    let mut w1_sum = CompensatedSum::default();
    let mut w2_sum = CompensatedSum::default();
    let mut service_sum = CompensatedSum::default();
    let mut response_sum = CompensatedSum::default();
    let mut work_sum = CompensatedSum::default();
    let mut last_batch_work = 0.0_f64;
    let mut first_measured_arrival = 0.0_f64;
    let mut packets_measured: u64 = 0;

    for message_id in 0..total_messages {
        clock += inter_arrival.sample(&mut rng);
        backlog = (backlog - (clock - previous_arrival)).max(0.0);
        previous_arrival = clock;

        let measured = message_id >= cfg.warmup_messages;
        if message_id == cfg.warmup_messages {
            first_measured_arrival = clock;
        }

        let message = scenario.dist.sample(&mut rng);
        let batch_size = packet_count(message, payload);
        let w1 = backlog;

        let mut batch_work = 0.0_f64;
        for packet_index in 0..batch_size {
            let packet_payload = if rng.random::<f64>() < edge_probability {
                edge_payload(scenario.dist.sample(&mut rng), payload)
            } else {
                payload
            };
            let service = (packet_payload + header) / capacity;
            if let Some(recorder) = trace.as_deref_mut() {
                let start = clock + w1 + batch_work;
                for (kind, time) in [
                    (EventKind::Arrival, clock),
                    (EventKind::ServiceStart, start),
                    (EventKind::Departure, start + service),
                ] {
                    recorder.push(SimEvent {
                        time,
                        kind,
                        message_id,
                        packet_index: packet_index as u32,
                        size_bytes: packet_payload,
                    });
                }
            }
            batch_work += service;
            if measured {
                service_sum.add(service);
                response_sum.add(w1 + batch_work);
            }
        }
        backlog += batch_work;

        if measured {
            w1_sum.add(w1);
            w2_sum.add((batch_size - 1) as f64 * body_service);
            work_sum.add(batch_work);
            last_batch_work = batch_work;
            packets_measured += batch_size;
        }
    }

    let messages = cfg.measured_messages as f64;
    let packets = packets_measured as f64;
    let span = previous_arrival - first_measured_arrival;
    let utilization = if span > 0.0 {
        ((work_sum.value() - last_batch_work) / span).clamp(0.0, 1.0)
    } else {
        0.0
    };

    RepStats {
        w1: w1_sum.value() / messages,
        w2: w2_sum.value() / messages,
        r_composed: (w1_sum.value() + w2_sum.value()) / messages + service_sum.value() / packets,
        r_packet: response_sum.value() / packets,
        utilization,
    }
}

fn t_interval(values: &[f64], confidence_level: f64) -> Estimate {
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0);
    let critical = StudentsT::new(0.0, 1.0, count - 1.0)
        .expect("at least 2 replications")
        .inverse_cdf(1.0 - (1.0 - confidence_level) / 2.0);
    Estimate {
        value: mean,
        half_width: critical * variance.sqrt() / count.sqrt(),
    }
}

fn checked_stability(scenario: &Scenario, tol: Tolerance) -> Result<f64, Error> {
    scenario.validate()?;
    let stats = segmentation_stats(&scenario.dist, scenario.payload, tol)?;
    let (es, _) = service_moments(&stats, &scenario.link);
    let load = offered_load(scenario.lambda, &stats, es);
    if load >= 1.0 {
        return Err(Error::Unstable { load });
    }
    Ok(stats.edge_probability)
}

/// Runs the study: `cfg.replications` independent replications, each
/// simulating warmup plus measured messages, aggregated into t-distribution
/// confidence intervals across replication means. Identical inputs produce
/// bit-identical results.
pub fn run(scenario: &Scenario, cfg: &SimConfig, tol: Tolerance) -> Result<SimResult, Error> {
    cfg.validate()?;
    let edge_probability = checked_stability(scenario, tol)?;

    let reps: Vec<RepStats> = (0..cfg.replications)
        .map(|rep| simulate_replication(scenario, cfg, edge_probability, rep as u64, None))
        .collect();

    let collect = |f: fn(&RepStats) -> f64| -> Vec<f64> { reps.iter().map(f).collect() };
    let confidence = cfg.confidence_level;
    let utilization =
        reps.iter().map(|r| r.utilization).sum::<f64>() / cfg.replications as f64;

    Ok(SimResult {
        mean_w1: t_interval(&collect(|r| r.w1), confidence),
        mean_w2: t_interval(&collect(|r| r.w2), confidence),
        mean_r_composed: t_interval(&collect(|r| r.r_composed), confidence),
        mean_r_packet: t_interval(&collect(|r| r.r_packet), confidence),
        utilization,
        messages_simulated: cfg.replications as u64 * cfg.measured_messages,
    })
}

/// Chronological event list of the first replication stream (the same
/// dynamics as replication 0 of [`run`]), capped at `limit` events. Ties in
/// time keep each packet's arrival, service start, and departure in order.
pub fn event_trace(
    scenario: &Scenario,
    cfg: &SimConfig,
    limit: usize,
    tol: Tolerance,
) -> Result<Vec<SimEvent>, Error> {
    cfg.validate()?;
    if limit > 100_000 {
        return Err(Error::InvalidParameter(format!(
            "event trace limit must be at most 100000, got {limit}"
        )));
    }
    let edge_probability = checked_stability(scenario, tol)?;
    let mut recorder = TraceRecorder {
        events: Vec::new(),
        limit,
    };
    simulate_replication(scenario, cfg, edge_probability, 0, Some(&mut recorder));
    let mut events = recorder.events;
    events.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then(a.message_id.cmp(&b.message_id))
            .then(a.packet_index.cmp(&b.packet_index))
            .then(a.kind.rank().cmp(&b.kind.rank()))
    });
    Ok(events)
}

/// Writes a trace as CSV: `time,event,message_id,packet_index,size_bytes`,
/// times with 13 significant digits.
pub fn write_trace_csv<W: std::io::Write>(
    events: &[SimEvent],
    writer: &mut W,
) -> std::io::Result<()> {
    writeln!(writer, "time,event,message_id,packet_index,size_bytes")?;
    for event in events {
        writeln!(
            writer,
            "{:.12e},{},{},{},{}",
            event.time,
            event.kind.label(),
            event.message_id,
            event.packet_index,
            event.size_bytes
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::MessageSizeDistribution;
    use crate::queue::LinkParams;

    #[test]
    fn config_invariants_are_enforced() {
        let mut cfg = SimConfig::default();
        cfg.measured_messages = 999;
        assert!(cfg.validate().is_err());
        cfg = SimConfig::default();
        cfg.replications = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn confidence_interval_uses_the_t_quantile() {
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let est = t_interval(&values, 0.95);
        assert!((est.value - 5.5).abs() < 1e-12);
        // Sample variance of 1..10 is 82.5/9; the two-sided 95% critical
        // value of Student's t with 9 degrees of freedom is 2.2621571628.
        let reference = 2.262157162740992 * (82.5f64 / 9.0).sqrt() / 10f64.sqrt();
        assert!((est.half_width - reference).abs() < 1e-9 * reference);
    }

    #[test]
    fn unstable_scenario_is_refused() {
        let scenario = Scenario::new(
            MessageSizeDistribution::deterministic(100.0).unwrap(),
            100.0,
            LinkParams::new(1.0, 0.0).unwrap(),
            0.02,
        )
        .unwrap();
        match run(&scenario, &SimConfig::default(), Tolerance::default()) {
            Err(Error::Unstable { load }) => assert!(load >= 1.0),
            other => panic!("expected instability, got {other:?}"),
        }
    }
}
