//! Monte Carlo consistency: empirical frequencies against the exact law,
//! goodness of fit, and bytewise reproducibility under a fixed seed.

mod common;

use common::chi_square_p_value;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use telsim_core::{run_exact, run_sampled, InputSpec, ProtocolConfig, RunMode};

fn sampled_config(seed: u64, shots: u64) -> ProtocolConfig {
    let w = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut config = ProtocolConfig::exact(InputSpec::new(w, w, 1).unwrap());
    config.mode = RunMode::MonteCarlo { shots };
    config.seed = seed;
    config
}

#[test]
fn empirical_success_rate_tracks_the_exact_law() {
    let shots = 100_000u64;
    for seed in [1u64, 42] {
        let report = run_sampled(&sampled_config(seed, shots)).unwrap();
        let rate = report.aggregates.success_probability;
        let bound = 3.0 * (0.25 / shots as f64).sqrt();
        assert!(
            (rate - 0.5).abs() < bound,
            "seed {seed}: rate {rate}, bound {bound}"
        );
        assert_eq!(report.aggregates.shots, Some(shots));
        let se = report.aggregates.success_standard_error.unwrap();
        assert!((se - (rate * (1.0 - rate) / shots as f64).sqrt()).abs() < 1e-15);
    }
}

#[test]
fn per_pattern_frequencies_pass_a_chi_square_test() {
    let shots = 100_000u64;
    let exact = run_exact(&ProtocolConfig::exact(
        InputSpec::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            1,
        )
        .unwrap(),
    ))
    .unwrap();
    let sampled = run_sampled(&sampled_config(42, shots)).unwrap();

    // Align observed counts with the exact probabilities by pattern.
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    for row in &exact.rows {
        let count = sampled
            .rows
            .iter()
            .find(|r| r.pattern == row.pattern)
            .and_then(|r| r.count)
            .unwrap_or(0);
        observed.push(count);
        expected.push(row.probability);
    }
    assert_eq!(
        observed.iter().sum::<u64>(),
        shots,
        "every draw lands on an exact pattern"
    );

    let p = chi_square_p_value(&observed, &expected, shots);
    assert!(p > 1e-4, "chi-square p-value {p}");
}

#[test]
fn sampled_rows_expose_expected_probabilities() {
    let report = run_sampled(&sampled_config(3, 50_000)).unwrap();
    for row in &report.rows {
        let expected = row.expected_probability.unwrap();
        let bound = 4.0 * (expected * (1.0 - expected) / 50_000f64).sqrt();
        assert!(
            (row.probability - expected).abs() < bound,
            "pattern {} frequency {} expected {expected}",
            row.pattern,
            row.probability
        );
    }
}

#[test]
fn same_seed_means_identical_bytes() {
    let a = run_sampled(&sampled_config(9, 20_000)).unwrap();
    let b = run_sampled(&sampled_config(9, 20_000)).unwrap();
    assert_eq!(a.to_json().into_bytes(), b.to_json().into_bytes());
}

#[test]
fn different_seeds_usually_differ() {
    let a = run_sampled(&sampled_config(1, 20_000)).unwrap();
    let b = run_sampled(&sampled_config(2, 20_000)).unwrap();
    assert_ne!(a.to_json(), b.to_json());
}
