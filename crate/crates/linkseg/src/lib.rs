//! Mean response time of segmented message traffic over a single link.
//!
//! Messages drawn from a configurable size distribution are cut into
//! packets with a fixed payload size `ell_d`: every packet carries exactly
//! `ell_d` payload bytes except the last, which carries the remainder.
//! Each packet also pays a fixed header. Messages arrive in a Poisson
//! stream and their packets share one transmission link, served in order.
//!
//! The crate computes the long-run mean packet response time of that
//! system in closed form, treating packet bursts as batch arrivals to a
//! single-server queue:
//!
//! * [`dist`] describes message-size distributions and their tails.
//! * [`segment`] turns a distribution plus a payload size into packet
//!   statistics (edge-packet probability, packet moments, packets per
//!   message), summing the underlying series with certified error bounds.
//! * [`queue`] prices the service and waiting times and assembles the
//!   mean response time, refusing unstable loads.
//! * [`sim`] is an independent discrete-event simulation of the same
//!   queueing model, used to validate the closed forms.
//! * [`sweep`] evaluates the response time across payload grids, locates
//!   the best payload size, and quantifies how strongly the response-time
//!   curve bends.
//! * [`config`] parses the plain-text configuration files consumed by the
//!   `linkseg` command-line tool.
//!
//! ```
//! use linkseg::{MessageSizeDistribution, LinkParams, Scenario};
//! use linkseg::segment::Tolerance;
//!
//! let scenario = Scenario::new(
//!     MessageSizeDistribution::deterministic(100.0)?,
//!     40.0,              // payload bytes per packet
//!     LinkParams::new(1.0, 0.0)?,
//!     0.005,             // messages per second
//! )?;
//! let metrics = linkseg::queue::response_time(&scenario, Tolerance::default())?;
//! assert!((metrics.er - 494.0 / 3.0).abs() < 1e-9);
//! # Ok::<(), linkseg::Error>(())
//! ```

pub mod config;
pub mod dist;
pub mod error;
pub mod queue;
pub mod segment;
pub mod sim;
pub mod sweep;

pub use config::ConfigFile;
pub use dist::MessageSizeDistribution;
pub use error::Error;
pub use queue::{LinkParams, QueueingMetrics, Scenario};
pub use segment::{SegmentationStats, SeriesAccumulation, Tolerance};
pub use sim::{Estimate, SimConfig, SimResult};
