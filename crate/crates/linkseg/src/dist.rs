//! Message size distributions.
//!
//! Every downstream computation (segmentation series, queueing formulas,
//! the simulator) sees message sizes only through this module: a CDF, the
//! first two moments, partial expectations, and sampling.
//!
//! Conventions, applied uniformly:
//! - sizes are strictly positive reals measured in bytes; integrality is
//!   not assumed;
//! - CDFs are right-continuous, `cdf(x)` = P(M <= x), so an atom at `x`
//!   counts;
//! - `partial_expectation(t)` integrates over `[t, inf)`, so an atom at
//!   `t` counts there as well.

use rand::{Rng, RngExt};
use rand_distr::Distribution as _;

use crate::error::Error;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF, computed from the complementary error function.
pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Standard normal survival function; keeps relative accuracy deep in the
/// upper tail where `1 - normal_cdf(z)` would cancel.
pub(crate) fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Standard normal quantile. Used for grid construction, never in
/// tail-critical arithmetic.
pub(crate) fn normal_quantile(p: f64) -> f64 {
    SQRT_2 * statrs::function::erf::erf_inv(2.0 * p - 1.0)
}

/// Lognormal parameters `(mu, sigma)` of ln-space from the distribution's
/// real-space mean and standard deviation:
/// `sigma^2 = ln(1 + std^2/mean^2)`, `mu = ln(mean) - sigma^2/2`.
pub fn lognormal_params_from_moments(mean: f64, std: f64) -> Result<(f64, f64), Error> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lognormal moment mean must be positive and finite, got {mean}"
        )));
    }
    if !(std.is_finite() && std > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lognormal moment std must be positive and finite, got {std}"
        )));
    }
    let ratio = std / mean;
    let sigma_sq = ratio.mul_add(ratio, 1.0).ln();
    Ok((mean.ln() - sigma_sq / 2.0, sigma_sq.sqrt()))
}

/// Size distribution of application messages.
#[derive(Debug, Clone)]
pub enum MessageSizeDistribution {
    /// Every message has exactly this size.
    Deterministic { size: f64 },
    /// Exponential with the given mean.
    Exponential { mean: f64 },
    /// ln M is normal with mean `mu` and standard deviation `sigma`.
    Lognormal { mu: f64, sigma: f64 },
    /// A finite sample treated as the exact population, uniform weights.
    Empirical(Empirical),
}

impl MessageSizeDistribution {
    pub fn deterministic(size: f64) -> Result<Self, Error> {
        if size.is_finite() && size > 0.0 {
            Ok(Self::Deterministic { size })
        } else {
            Err(Error::InvalidParameter(format!(
                "deterministic size must be positive and finite, got {size}"
            )))
        }
    }

    pub fn exponential(mean: f64) -> Result<Self, Error> {
        if mean.is_finite() && mean > 0.0 {
            Ok(Self::Exponential { mean })
        } else {
            Err(Error::InvalidParameter(format!(
                "exponential mean must be positive and finite, got {mean}"
            )))
        }
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self, Error> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lognormal mu must be finite, got {mu}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lognormal sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self::Lognormal { mu, sigma })
    }

    /// Lognormal constructed from its real-space mean and standard deviation.
    pub fn lognormal_from_moments(mean: f64, std: f64) -> Result<Self, Error> {
        let (mu, sigma) = lognormal_params_from_moments(mean, std)?;
        Self::lognormal(mu, sigma)
    }

    /// Treats `samples` as the exact message-size population.
    pub fn empirical(samples: Vec<f64>) -> Result<Self, Error> {
        Ok(Self::Empirical(Empirical::new(samples)?))
    }

    /// Loads an empirical population from a text file: one positive decimal
    /// size per line; blank lines and lines starting with `#` are ignored.
    pub fn empirical_from_file(path: impl AsRef<std::path::Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let label = path.display().to_string();
        let text = std::fs::read_to_string(path)?;
        let mut samples = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let value: f64 = line.parse().map_err(|_| Error::Parse {
                path: label.clone(),
                line: idx + 1,
                msg: format!("not a decimal number: {line:?}"),
            })?;
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Parse {
                    path: label.clone(),
                    line: idx + 1,
                    msg: format!("message size must be positive and finite, got {value}"),
                });
            }
            samples.push(value);
        }
        if samples.is_empty() {
            return Err(Error::Parse {
                path: label,
                line: text.lines().count().max(1),
                msg: "no samples in file".into(),
            });
        }
        Self::empirical(samples)
    }

    /// P(M <= x), right-continuous.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Deterministic { size } => {
                if x >= *size {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            Self::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - mu) / sigma)
                }
            }
            Self::Empirical(emp) => emp.cdf(x),
        }
    }

    /// E[M].
    pub fn mean(&self) -> f64 {
        match self {
            Self::Deterministic { size } => *size,
            Self::Exponential { mean } => *mean,
            Self::Lognormal { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
            Self::Empirical(emp) => emp.mean(),
        }
    }

    /// Var[M] (population variance for the empirical variant).
    pub fn variance(&self) -> f64 {
        match self {
            Self::Deterministic { .. } => 0.0,
            Self::Exponential { mean } => mean * mean,
            Self::Lognormal { mu, sigma } => {
                let s2 = sigma * sigma;
                s2.exp_m1() * (2.0 * mu + s2).exp()
            }
            Self::Empirical(emp) => emp.variance(),
        }
    }

    /// Partial expectation over the closed upper range:
    /// `integral of x dF(x) over [t, inf)`. An atom exactly at `t` counts.
    /// `partial_expectation(0) = mean()`.
    pub fn partial_expectation(&self, t: f64) -> Result<f64, Error> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "partial expectation threshold must be >= 0 and finite, got {t}"
            )));
        }
        Ok(match self {
            Self::Deterministic { size } => {
                if t <= *size {
                    *size
                } else {
                    0.0
                }
            }
            Self::Exponential { mean } => (t + mean) * (-t / mean).exp(),
            Self::Lognormal { .. } => self.tail_mean(t),
            Self::Empirical(emp) => emp.partial_expectation(t),
        })
    }

    /// Draws one message size.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Deterministic { size } => *size,
            Self::Exponential { mean } => rand_distr::Exp::new(1.0 / mean)
                .expect("validated at construction")
                .sample(rng),
            Self::Lognormal { mu, sigma } => rand_distr::LogNormal::new(*mu, *sigma)
                .expect("validated at construction")
                .sample(rng),
            Self::Empirical(emp) => emp.sample(rng),
        }
    }

    /// P(M > t): strict exceedance, the complement of the right-continuous
    /// CDF. An atom exactly at `t` does not count. Computed directly, so it
    /// stays accurate deep in the tail where `1 - cdf(t)` would cancel.
    pub fn survival(&self, t: f64) -> f64 {
        match self {
            Self::Deterministic { size } => {
                if t < *size {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Exponential { mean } => {
                if t <= 0.0 {
                    1.0
                } else {
                    (-t / mean).exp()
                }
            }
            Self::Lognormal { mu, sigma } => {
                if t <= 0.0 {
                    1.0
                } else {
                    normal_sf((t.ln() - mu) / sigma)
                }
            }
            Self::Empirical(emp) => emp.survival(t),
        }
    }

    /// E[M; M > t]: first partial moment over the open upper range.
    /// For continuous variants this equals `partial_expectation(t)`; it can
    /// differ only at an atom.
    pub(crate) fn tail_mean(&self, t: f64) -> f64 {
        match self {
            Self::Deterministic { size } => {
                if t < *size {
                    *size
                } else {
                    0.0
                }
            }
            Self::Exponential { mean } => {
                if t <= 0.0 {
                    *mean
                } else {
                    (t + mean) * (-t / mean).exp()
                }
            }
            Self::Lognormal { mu, sigma } => {
                if t <= 0.0 {
                    self.mean()
                } else {
                    self.mean() * normal_cdf(sigma + (mu - t.ln()) / sigma)
                }
            }
            Self::Empirical(emp) => emp.tail_mean(t),
        }
    }

    /// E[M^2; M > t]: second partial moment over the open upper range.
    pub(crate) fn tail_second_moment(&self, t: f64) -> f64 {
        match self {
            Self::Deterministic { size } => {
                if t < *size {
                    size * size
                } else {
                    0.0
                }
            }
            Self::Exponential { mean } => {
                if t <= 0.0 {
                    2.0 * mean * mean
                } else {
                    (t * t + 2.0 * t * mean + 2.0 * mean * mean) * (-t / mean).exp()
                }
            }
            Self::Lognormal { mu, sigma } => {
                let m2 = (2.0 * mu + 2.0 * sigma * sigma).exp();
                if t <= 0.0 {
                    m2
                } else {
                    m2 * normal_cdf(2.0 * sigma + (mu - t.ln()) / sigma)
                }
            }
            Self::Empirical(emp) => emp.tail_second_moment(t),
        }
    }

    /// p-quantile of the message size, for p strictly between 0 and 1.
    /// Sizes the default sweep grid; for empirical populations this is the
    /// smallest sample with at least a fraction p of the mass at or below.
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!(p > 0.0 && p < 1.0);
        match self {
            Self::Deterministic { size } => *size,
            Self::Exponential { mean } => -mean * (1.0 - p).ln(),
            Self::Lognormal { mu, sigma } => (mu + sigma * normal_quantile(p)).exp(),
            Self::Empirical(emp) => emp.quantile(p),
        }
    }
}

/// A sorted sample with precomputed suffix sums, treated as the exact
/// message-size population.
#[derive(Debug, Clone)]
pub struct Empirical {
    sorted: Vec<f64>,
    /// suffix_sum[i] = sum of sorted[i..]; length n+1, last entry 0.
    suffix_sum: Vec<f64>,
    /// suffix_sq[i] = sum of squares of sorted[i..]; length n+1.
    suffix_sq: Vec<f64>,
}

impl Empirical {
    fn new(mut samples: Vec<f64>) -> Result<Self, Error> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter(
                "empirical population must not be empty".into(),
            ));
        }
        if let Some(bad) = samples.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "empirical sizes must be positive and finite, got {bad}"
            )));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let mut suffix_sum = vec![0.0; n + 1];
        let mut suffix_sq = vec![0.0; n + 1];
        for i in (0..n).rev() {
            suffix_sum[i] = suffix_sum[i + 1] + samples[i];
            suffix_sq[i] = suffix_sq[i + 1] + samples[i] * samples[i];
        }
        Ok(Self {
            sorted: samples,
            suffix_sum,
            suffix_sq,
        })
    }

    fn count(&self) -> f64 {
        self.sorted.len() as f64
    }

    fn cdf(&self, x: f64) -> f64 {
        let below_or_at = self.sorted.partition_point(|&s| s <= x);
        below_or_at as f64 / self.count()
    }

    fn survival(&self, t: f64) -> f64 {
        let above = self.sorted.len() - self.sorted.partition_point(|&s| s <= t);
        above as f64 / self.count()
    }

    fn mean(&self) -> f64 {
        self.suffix_sum[0] / self.count()
    }

    fn variance(&self) -> f64 {
        let m = self.mean();
        (self.suffix_sq[0] / self.count() - m * m).max(0.0)
    }

    fn partial_expectation(&self, t: f64) -> f64 {
        let first_at_or_above = self.sorted.partition_point(|&s| s < t);
        self.suffix_sum[first_at_or_above] / self.count()
    }

    fn tail_mean(&self, t: f64) -> f64 {
        let first_above = self.sorted.partition_point(|&s| s <= t);
        self.suffix_sum[first_above] / self.count()
    }

    fn tail_second_moment(&self, t: f64) -> f64 {
        let first_above = self.sorted.partition_point(|&s| s <= t);
        self.suffix_sq[first_above] / self.count()
    }

    fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let rank = (p * n as f64).ceil() as usize;
        self.sorted[rank.clamp(1, n) - 1]
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sorted[rng.random_range(0..self.sorted.len())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        // Abscissae with known CDF values to 1e-13 and beyond.
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-13);
        assert!((normal_cdf(-1.96) - 0.024_997_895_148_220_43).abs() < 1e-13);
        assert!((normal_sf(6.0) - 9.865_876_450_376_946e-10).abs() < 1e-19);
    }

    #[test]
    fn deterministic_cdf_is_right_continuous() {
        let d = MessageSizeDistribution::deterministic(100.0).unwrap();
        assert_eq!(d.cdf(100.0), 1.0);
        assert_eq!(d.cdf(99.999_999), 0.0);
        assert_eq!(d.survival(100.0), 0.0);
        assert_eq!(d.partial_expectation(100.0).unwrap(), 100.0);
        assert_eq!(d.tail_mean(100.0), 0.0);
    }

    #[test]
    fn moment_inversion_round_trips() {
        let d = MessageSizeDistribution::lognormal_from_moments(4827.0, 41008.0).unwrap();
        assert!((d.mean() - 4827.0).abs() / 4827.0 < 1e-12);
        assert!((d.variance().sqrt() - 41008.0).abs() / 41008.0 < 1e-12);
    }

    #[test]
    fn empirical_counts_atoms_on_both_sides() {
        let d = MessageSizeDistribution::empirical(vec![100.0, 200.0]).unwrap();
        assert_eq!(d.cdf(100.0), 0.5);
        assert_eq!(d.survival(100.0), 0.5);
        assert_eq!(d.partial_expectation(100.0).unwrap(), 150.0);
        assert_eq!(d.tail_mean(100.0), 100.0);
        assert_eq!(d.tail_second_moment(100.0), 20000.0);
    }

    #[test]
    fn negative_threshold_rejected() {
        let d = MessageSizeDistribution::exponential(10.0).unwrap();
        assert!(matches!(
            d.partial_expectation(-1.0),
            Err(Error::InvalidParameter(_))
        ));
    }
}
