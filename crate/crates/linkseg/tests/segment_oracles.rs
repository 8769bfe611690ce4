//! Segmentation statistics frozen against independent oracles: explicit
//! enumeration, geometric series identities, and density quadrature.

mod common;

use common::{assert_abs, assert_rel, lognormal_survival_oracle, lognormal_tail_mean_oracle};
use linkseg::segment::{
    edge_cdf, packet_cdf, packet_count, segment_message, segmentation_stats, Tolerance,
};
use linkseg::{Error, MessageSizeDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[test]
fn deterministic_stats_match_explicit_enumeration() {
    let dist = MessageSizeDistribution::deterministic(100.0).unwrap();
    let stats = segmentation_stats(&dist, 40.0, Tolerance::default()).unwrap();

    // Every message segments identically; enumerate one.
    let packets = segment_message(100.0, 40.0).unwrap();
    assert_eq!(packets, vec![40.0, 40.0, 20.0]);
    let k = packets.len() as f64;
    let mean = packets.iter().sum::<f64>() / k;
    let variance = packets.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / k;

    assert_abs(stats.edge_probability, 1.0 / k, 1e-9, "edge probability");
    assert_abs(stats.mean_packet, mean, 1e-9, "mean packet");
    assert_abs(stats.packet_variance, variance, 1e-9, "packet variance");
    assert_abs(stats.mean_batch, k, 1e-9, "mean batch");
    assert_abs(stats.mean_batch_sq, k * k, 1e-9, "mean squared batch");

    // Bounded support: the series terminates exactly, with zero tails.
    assert_eq!(stats.series.terms_used, 2);
    assert_eq!(stats.series.tail_bound_u, 0.0);
    assert_eq!(stats.series.tail_bound_nu, 0.0);
    assert_eq!(stats.series.tail_bound_v, 0.0);
    assert_abs(stats.series.sum_u, 3.0, 1e-12, "sum of u");
    assert_abs(stats.series.sum_nu, 3.0, 1e-12, "sum of n*u");
    assert_abs(stats.series.sum_v, 300.0, 1e-12, "sum of v");
}

#[test]
fn exponential_series_match_geometric_identities() {
    let mean = 1000.0;
    let dist = MessageSizeDistribution::exponential(mean).unwrap();
    for ell_d in [250.0, 500.0, 1000.0, 2000.0, 4000.0] {
        let stats = segmentation_stats(&dist, ell_d, Tolerance::default()).unwrap();
        let series = stats.series;
        let q: f64 = (-ell_d / mean).exp();

        let sum_u = 1.0 / (1.0 - q);
        let sum_nu = q / ((1.0 - q) * (1.0 - q));
        let sum_v = mean / (1.0 - q) + ell_d * sum_nu;

        // The certified tail bounds must actually contain the truth.
        let slack = |exact: f64| 1e-12 * exact.abs();
        assert!(
            (series.sum_u - sum_u).abs() <= series.tail_bound_u + slack(sum_u),
            "sum_u bound violated at ell_d={ell_d}: {} vs {sum_u} (bound {})",
            series.sum_u,
            series.tail_bound_u
        );
        assert!(
            (series.sum_nu - sum_nu).abs() <= series.tail_bound_nu + slack(sum_nu),
            "sum_nu bound violated at ell_d={ell_d}: {} vs {sum_nu} (bound {})",
            series.sum_nu,
            series.tail_bound_nu
        );
        assert!(
            (series.sum_v - sum_v).abs() <= series.tail_bound_v + slack(sum_v),
            "sum_v bound violated at ell_d={ell_d}: {} vs {sum_v} (bound {})",
            series.sum_v,
            series.tail_bound_v
        );

        // And the requested relative tolerance is met.
        assert_rel(stats.mean_batch, sum_u, 1e-9, &format!("EX at {ell_d}"));
        assert_rel(
            stats.mean_batch_sq,
            2.0 * sum_nu + sum_u,
            1e-9,
            &format!("EX2 at {ell_d}"),
        );
    }
}

#[test]
fn lognormal_tail_terms_match_quadrature() {
    // Individual series terms: u_n = P(M > n*ell_d), v_n = E[M; M > n*ell_d].
    let dist = MessageSizeDistribution::lognormal(6.34, 2.07).unwrap();
    let ell_d = 1500.0;
    for n in [1u64, 10, 100] {
        let t = n as f64 * ell_d;
        let u = 1.0 - dist.cdf(t);
        let v = dist.partial_expectation(t).unwrap();
        assert_rel(
            u,
            lognormal_survival_oracle(6.34, 2.07, t),
            1e-6,
            &format!("u_{n}"),
        );
        assert_rel(
            v,
            lognormal_tail_mean_oracle(6.34, 2.07, t),
            1e-6,
            &format!("v_{n}"),
        );
    }
}

#[test]
fn edge_cdf_matches_exponential_closed_form() {
    let mean = 1000.0;
    let ell_d = 1000.0;
    let dist = MessageSizeDistribution::exponential(mean).unwrap();
    let tol = Tolerance::default();
    // P(edge <= x) = sum over n of P(n*ell_d < M <= n*ell_d + x), a
    // geometric series for the exponential law.
    let exact = |x: f64| -> f64 { (-(-x / mean).exp_m1()) / (-(-ell_d / mean).exp_m1()) };
    for x in [1.0, 100.0, 250.0, 500.0, 900.0, 1000.0] {
        assert_rel(
            edge_cdf(&dist, ell_d, x, tol).unwrap(),
            exact(x),
            1e-9,
            &format!("edge cdf at {x}"),
        );
    }
    assert_abs(
        edge_cdf(&dist, ell_d, 500.0, tol).unwrap(),
        0.622459,
        1e-6,
        "edge cdf frozen point",
    );
    assert_eq!(edge_cdf(&dist, ell_d, 0.0, tol).unwrap(), 0.0);
    assert_eq!(edge_cdf(&dist, ell_d, -3.0, tol).unwrap(), 0.0);
    assert_eq!(edge_cdf(&dist, ell_d, 1500.0, tol).unwrap(), 1.0);
}

#[test]
fn packet_cdf_mixes_body_step_and_edge_law() {
    let mean = 1000.0;
    let ell_d = 1000.0;
    let dist = MessageSizeDistribution::exponential(mean).unwrap();
    let tol = Tolerance::default();
    let stats = segmentation_stats(&dist, ell_d, tol).unwrap();
    let pi = stats.edge_probability;
    for x in [1.0, 250.0, 500.0, 999.0] {
        let edge = edge_cdf(&dist, ell_d, x, tol).unwrap();
        assert_rel(
            packet_cdf(&dist, ell_d, x, tol).unwrap(),
            pi * edge,
            1e-12,
            &format!("packet cdf below the body size at {x}"),
        );
    }
    // All body packets sit exactly at ell_d: the cdf jumps to 1 there.
    assert_eq!(packet_cdf(&dist, ell_d, ell_d, tol).unwrap(), 1.0);
    assert_eq!(packet_cdf(&dist, ell_d, 2000.0, tol).unwrap(), 1.0);
    assert_eq!(packet_cdf(&dist, ell_d, 0.0, tol).unwrap(), 0.0);

    // Monotone in x.
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 25.0).collect();
    let mut previous = -1.0;
    for x in grid {
        let value = packet_cdf(&dist, ell_d, x, tol).unwrap();
        assert!(
            value + 1e-12 >= previous,
            "packet cdf decreased at {x}: {value} < {previous}"
        );
        previous = value;
    }
}

#[test]
fn deterministic_edge_cdf_is_a_step_at_the_remainder() {
    let dist = MessageSizeDistribution::deterministic(100.0).unwrap();
    let tol = Tolerance::default();
    assert_eq!(edge_cdf(&dist, 40.0, 19.999, tol).unwrap(), 0.0);
    assert_eq!(edge_cdf(&dist, 40.0, 20.0, tol).unwrap(), 1.0);
    assert_eq!(edge_cdf(&dist, 40.0, 25.0, tol).unwrap(), 1.0);
    // Unsegmented: the edge is the whole message.
    assert_eq!(edge_cdf(&dist, 100.0, 99.999, tol).unwrap(), 0.0);
    assert_eq!(edge_cdf(&dist, 100.0, 100.0, tol).unwrap(), 1.0);
}

#[test]
fn segmentation_conserves_bytes_on_random_messages() {
    let dist = MessageSizeDistribution::lognormal(6.34, 2.07).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let message = dist.sample(&mut rng);
        let ell_d = 1500.0;
        let packets = segment_message(message, ell_d).unwrap();
        assert_eq!(packets.len() as u64, packet_count(message, ell_d));
        let total: f64 = packets.iter().sum();
        assert_rel(total, message, 1e-9, "byte conservation");
        for (index, packet) in packets.iter().enumerate() {
            assert!(
                *packet > 0.0 && *packet <= ell_d,
                "packet {index} of {message} out of range: {packet}"
            );
        }
        // All but the last packet are full-size.
        for packet in &packets[..packets.len() - 1] {
            assert_eq!(*packet, ell_d);
        }
    }
}

#[test]
fn fractional_sizes_segment_exactly() {
    assert_eq!(
        segment_message(100.5, 40.0).unwrap(),
        vec![40.0, 40.0, 20.5]
    );
    assert_eq!(segment_message(120.0, 40.0).unwrap(), vec![40.0, 40.0, 40.0]);
    assert_eq!(packet_count(0.3, 0.1), 3);
}

#[test]
fn exhausted_term_budget_is_a_typed_error() {
    let dist = MessageSizeDistribution::lognormal(6.34, 2.07).unwrap();
    let tol = Tolerance::new(1e-9, 4096).unwrap();
    match segmentation_stats(&dist, 100.0, tol) {
        Err(Error::Truncation { payload, n_max }) => {
            assert_eq!(payload, 100.0);
            assert_eq!(n_max, 4096);
        }
        other => panic!("expected truncation, got {other:?}"),
    }
}
