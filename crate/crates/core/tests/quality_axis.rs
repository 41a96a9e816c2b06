//! Measured quality along each dimension's level grid on the bundled
//! fixtures: exact where the level maps to a count, monotone where it should.

mod common;

use dqlab::pollute::DuplicationFactor;
use dqlab::scenario::{measure_dimension, pollute, quality_grid, Dimension, Level, PollutionOptions};
use dqlab::tabular::derive_rng;

fn curve(stem: &str, dim: Dimension, seed: u64) -> Vec<f64> {
    let (_, ds) = common::load_fixture(stem);
    let rng = derive_rng(seed, &["pollute", &dim.to_string()]);
    quality_grid(dim)
        .into_iter()
        .map(|level| {
            let half = pollute(&ds, dim, level, &PollutionOptions::default(), &rng).unwrap();
            measure_dimension(dim, &half, &ds).unwrap()
        })
        .collect()
}

fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + 1e-12)
}

#[test]
fn quality_falls_monotonically_on_both_fixtures() {
    for stem in ["mixed", "separable"] {
        for dim in [
            Dimension::Completeness,
            Dimension::TargetAccuracy,
            Dimension::Uniqueness,
        ] {
            for seed in 0..3 {
                let q = curve(stem, dim, seed);
                assert!(non_increasing(&q), "{stem} {dim} seed {seed}: {q:?}");
            }
        }
    }
}

#[test]
fn categorical_feature_accuracy_falls_monotonically() {
    let (_, ds) = common::load_fixture("mixed");
    let rng = derive_rng(4, &["pollute", "feature_accuracy"]);
    let scores: Vec<f64> = quality_grid(Dimension::FeatureAccuracy)
        .into_iter()
        .map(|level| {
            let half = pollute(
                &ds,
                Dimension::FeatureAccuracy,
                level,
                &PollutionOptions::default(),
                &rng,
            )
            .unwrap();
            let pd = dqlab::tabular::PairedDataset::new(half.dataset, ds.clone()).unwrap();
            dqlab::quality::feature_accuracy_report(&pd).unwrap().categorical
        })
        .collect();
    assert!(non_increasing(&scores), "{scores:?}");
    for (i, s) in scores.iter().enumerate() {
        assert!((s - (1.0 - i as f64 / 10.0)).abs() < 1e-12, "level {i}: {s}");
    }
}

#[test]
fn completeness_and_target_accuracy_are_exact_on_the_mixed_fixture() {
    for dim in [Dimension::Completeness, Dimension::TargetAccuracy] {
        let q = curve("mixed", dim, 9);
        for (i, v) in q.iter().enumerate() {
            assert!((v - (1.0 - i as f64 / 10.0)).abs() < 1e-12, "{dim} level {i}: {v}");
        }
    }
}

#[test]
fn duplication_reaches_the_requested_ratio() {
    let (_, ds) = common::load_fixture("mixed");
    let rng = derive_rng(2, &["pollute", "uniqueness"]);
    for den in 2..=10u64 {
        let rho = DuplicationFactor::new(10, den).unwrap();
        let half = pollute(
            &ds,
            Dimension::Uniqueness,
            Level::Rho(rho),
            &PollutionOptions::default(),
            &rng,
        )
        .unwrap();
        let unique = dqlab::quality::unique_rows(&half.dataset);
        assert_eq!(unique, 756);
        // n = unique * rho, exactly
        assert_eq!(half.dataset.n_rows() as u64 * den, unique as u64 * 10, "rho 10/{den}");
    }
}
