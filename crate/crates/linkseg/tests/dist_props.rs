//! Message-size distributions checked against an independent quadrature
//! oracle and closed-form identities.

mod common;

use common::{
    assert_abs, assert_rel, lognormal_survival_oracle, lognormal_tail_mean_oracle,
};
use linkseg::{Error, MessageSizeDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[test]
fn lognormal_cdf_matches_density_quadrature() {
    let dist = MessageSizeDistribution::lognormal(6.34, 2.07).unwrap();
    for t in [100.0, 1500.0, 15_000.0, 150_000.0, 1.5e6] {
        let survival = 1.0 - dist.cdf(t);
        let oracle = lognormal_survival_oracle(6.34, 2.07, t);
        assert_rel(survival, oracle, 1e-9, &format!("P(M > {t})"));
    }
}

#[test]
fn lognormal_partial_expectation_matches_density_quadrature() {
    let dist = MessageSizeDistribution::lognormal(6.34, 2.07).unwrap();
    assert_rel(
        dist.partial_expectation(0.0).unwrap(),
        dist.mean(),
        1e-12,
        "partial expectation at zero",
    );
    for t in [100.0, 1500.0, 15_000.0, 150_000.0, 1.5e6] {
        let actual = dist.partial_expectation(t).unwrap();
        let oracle = lognormal_tail_mean_oracle(6.34, 2.07, t);
        assert_rel(actual, oracle, 1e-9, &format!("E[M; M >= {t}]"));
    }
}

#[test]
fn exponential_closed_forms_hold() {
    let mean = 1000.0;
    let dist = MessageSizeDistribution::exponential(mean).unwrap();
    assert_rel(dist.mean(), mean, 1e-12, "mean");
    assert_rel(dist.variance(), mean * mean, 1e-12, "variance");
    for t in [0.0, 1.0, 250.0, 1000.0, 5000.0] {
        assert_rel(
            dist.cdf(t),
            -(-t / mean).exp_m1(),
            1e-12,
            &format!("cdf at {t}"),
        );
        assert_rel(
            dist.partial_expectation(t).unwrap(),
            (t + mean) * (-t / mean).exp(),
            1e-12,
            &format!("partial expectation at {t}"),
        );
    }
}

#[test]
fn moment_fit_recovers_published_parameters() {
    let (mu, sigma) = linkseg::dist::lognormal_params_from_moments(4827.0, 41_008.0).unwrap();
    assert_abs(mu, 6.34, 0.02, "mu");
    assert_abs(sigma, 2.07, 0.02, "sigma");

    let dist = MessageSizeDistribution::lognormal_from_moments(4827.0, 41_008.0).unwrap();
    assert_rel(dist.mean(), 4827.0, 1e-9, "fitted mean");
    assert_rel(
        dist.variance().sqrt(),
        41_008.0,
        1e-9,
        "fitted standard deviation",
    );
}

#[test]
fn deterministic_distribution_is_a_step() {
    let dist = MessageSizeDistribution::deterministic(100.0).unwrap();
    assert_eq!(dist.cdf(99.999), 0.0);
    assert_eq!(dist.cdf(100.0), 1.0);
    assert_eq!(dist.mean(), 100.0);
    assert_eq!(dist.variance(), 0.0);
    // The threshold itself is included in the partial expectation.
    assert_eq!(dist.partial_expectation(100.0).unwrap(), 100.0);
    assert_eq!(dist.partial_expectation(100.0001).unwrap(), 0.0);
}

#[test]
fn empirical_file_round_trips_and_reports_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("sizes.txt");
    std::fs::write(&good, "# sample\n100\n\n200\n200\n400\n").unwrap();
    let dist = MessageSizeDistribution::empirical_from_file(&good).unwrap();
    assert_rel(dist.mean(), 225.0, 1e-12, "empirical mean");
    assert_eq!(dist.cdf(150.0), 0.25);
    assert_eq!(dist.cdf(200.0), 0.75);
    // Atom at 200 included on the right of the threshold.
    assert_rel(
        dist.partial_expectation(200.0).unwrap(),
        200.0,
        1e-12,
        "tail mean at atom",
    );

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "100\n200\nnot-a-number\n400\n").unwrap();
    match MessageSizeDistribution::empirical_from_file(&bad) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error with its line, got {other:?}"),
    }

    let negative = dir.path().join("negative.txt");
    std::fs::write(&negative, "100\n-5\n").unwrap();
    match MessageSizeDistribution::empirical_from_file(&negative) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected a parse error with its line, got {other:?}"),
    }
}

#[test]
fn thresholds_must_be_finite_and_non_negative() {
    let dist = MessageSizeDistribution::exponential(1000.0).unwrap();
    assert!(matches!(
        dist.partial_expectation(-1.0),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        dist.partial_expectation(f64::NAN),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn sampling_agrees_with_the_analytic_mean() {
    let n = 200_000;
    let cases: Vec<(MessageSizeDistribution, f64, &str)> = vec![
        (
            MessageSizeDistribution::exponential(1000.0).unwrap(),
            1000.0,
            "exponential",
        ),
        (
            MessageSizeDistribution::lognormal(6.34, 1.0).unwrap(),
            (6.34f64 + 0.5).exp(),
            "lognormal",
        ),
        (
            MessageSizeDistribution::empirical(vec![100.0, 200.0, 300.0, 400.0]).unwrap(),
            250.0,
            "empirical",
        ),
        (
            MessageSizeDistribution::deterministic(100.0).unwrap(),
            100.0,
            "deterministic",
        ),
    ];
    for (dist, mean, label) in cases {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let mut sum = 0.0;
        let mut positive = true;
        for _ in 0..n {
            let draw = dist.sample(&mut rng);
            positive &= draw > 0.0;
            sum += draw;
        }
        assert!(positive, "{label}: all draws must be positive");
        let sample_mean = sum / n as f64;
        let se = (dist.variance() / n as f64).sqrt();
        assert!(
            (sample_mean - mean).abs() <= 5.0 * se + 1e-12,
            "{label}: sample mean {sample_mean} too far from {mean} (5 SE = {})",
            5.0 * se
        );
    }
}
