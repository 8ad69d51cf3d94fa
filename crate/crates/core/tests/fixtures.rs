//! Golden values for the shipped fixtures, recomputed independently with
//! exact fractions by `fixtures/oracle.py`.

use std::path::PathBuf;

use evento_core::decision::{method1_policy, method2_conditional, mode_decision};
use evento_core::edist::{estimate_edist, estimate_joint, pushforward_policy};
use evento_core::market::{build_circumstance_series, detect_technical, IndicatorConfig, MarketDataset};
use evento_core::valuation::{
    decision_family, estimate_value_matrix, lift_to_sets, mean_increments, ValueMatrix, BUY, SELL,
};
use evento_core::{Exact, JointLayout};
use proptest::prelude::*;

fn load(name: &str) -> MarketDataset {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    MarketDataset::from_csv_bytes(&std::fs::read(path).unwrap()).unwrap()
}

fn config() -> IndicatorConfig {
    IndicatorConfig::new(1, 3).unwrap()
}

fn frac(n: i128, d: i128) -> Exact {
    Exact::new(n, d)
}

#[test]
fn market_fixture_masks() {
    let ds = load("market_16.csv");
    let cs = build_circumstance_series(&ds, &config()).unwrap();
    assert_eq!(cs.masks(), [15, 23, 36, 0, 25, 0, 32, 11, 7, 54, 15, 7, 14]);
    assert_eq!(cs.records()[0].row, 3);
    assert_eq!(cs.records()[0].timestamp.as_str(), "2024-03-06");
    // a prefix yields a prefix of the series
    let train = build_circumstance_series(&ds.prefix(11), &config()).unwrap();
    assert_eq!(train.masks(), [15, 23, 36, 0, 25, 0, 32, 11]);
}

#[test]
fn market_fixture_training_values() {
    let ds = load("market_16.csv").prefix(11);
    let cs = build_circumstance_series(&ds, &config()).unwrap();
    let (means, counts) = mean_increments(&ds, &cs).unwrap();
    let expected = [
        (0, frac(-3, 4), 2),
        (11, frac(1, 1), 1),
        (15, frac(5, 4), 1),
        (23, frac(3, 4), 1),
        (25, frac(0, 1), 1),
        (32, frac(-3, 4), 1),
        (36, frac(-1, 1), 1),
    ];
    for (f, m, c) in expected {
        assert_eq!(means[f], m, "mask {f}");
        assert_eq!(counts[f], c, "mask {f}");
    }
    assert_eq!(counts.iter().sum::<u64>(), 8);

    let vm: ValueMatrix<f64> = estimate_value_matrix(&ds, &cs).unwrap();
    let (policy, _) = method1_policy(&vm).unwrap();
    for (f, d) in [(0, BUY), (11, SELL), (15, SELL), (23, SELL), (25, 0), (32, BUY), (36, BUY)] {
        assert_eq!(policy.decision_for(f), d, "mask {f}");
    }
    // unobserved masks do nothing
    assert!(vm.unobserved(7));
    assert_eq!(policy.decision_for(7), 0);

    let p = estimate_edist::<f64>(&cs.sets()).unwrap();
    assert_eq!(p.prob(0), 0.25);
    for f in [11, 15, 23, 25, 32, 36] {
        assert_eq!(p.prob(f), 0.125);
    }
    let layout = JointLayout::new(&decision_family(), cs.family()).unwrap();
    let ds_sets: Vec<_> = cs
        .masks()
        .iter()
        .map(|&f| decision_family().set(policy.decision_for(f)).unwrap())
        .collect();
    let p_star = estimate_joint::<f64>(&ds_sets, &cs.sets()).unwrap().to_joint_edist(&layout).unwrap();
    assert_eq!(p_star.prob(2), 0.25);
    for x in [45, 61, 93, 100, 130, 146] {
        assert_eq!(p_star.prob(x), 0.125, "x = {x}");
    }
    let q = pushforward_policy(&p, &policy).unwrap();
    assert_eq!(q.probs(), &[0.125, 0.375, 0.5, 0.0]);
}

#[test]
fn full_fixture_means() {
    let ds = load("market_16.csv");
    let cs = build_circumstance_series(&ds, &config()).unwrap();
    let (means, counts) = mean_increments(&ds, &cs).unwrap();
    assert_eq!((means[7], counts[7]), (frac(7, 8), 2));
    assert_eq!((means[14], counts[14]), (frac(-1, 2), 1));
    assert_eq!((means[15], counts[15]), (frac(11, 8), 2));
    assert_eq!((means[54], counts[54]), (frac(-3, 4), 1));
}

#[test]
fn constant_fixture_is_flat() {
    let ds = load("constant_16.csv");
    let cs = build_circumstance_series(&ds, &config()).unwrap();
    assert!(cs.masks().iter().all(|&m| m == 7));
    let vm: ValueMatrix<f64> = estimate_value_matrix(&ds, &cs).unwrap();
    assert!(vm.values().iter().all(|&v| v == 0.0));
    let (policy, _) = method1_policy(&vm).unwrap();
    assert!(policy.as_slice().iter().all(|&d| d == 0));
}

#[test]
fn antisymmetry_and_sign_logic_on_fixtures() {
    for name in ["market_16.csv", "constant_16.csv"] {
        let ds = load(name);
        for rows in [11, ds.len()] {
            let ds = ds.prefix(rows);
            let cs = build_circumstance_series(&ds, &config()).unwrap();
            let vm: ValueMatrix<f64> = estimate_value_matrix(&ds, &cs).unwrap();
            for f in 0..64 {
                assert_eq!(vm.value(0, f), -vm.value(1, f));
                assert_eq!(vm.value(0, f) + vm.value(1, f), 0.0);
            }
            let (policy, _) = method1_policy(&vm).unwrap();
            assert!(policy.as_slice().iter().all(|&d| d != SELL | BUY));
        }
    }
}

fn scale_prices(ds: &MarketDataset, c: Exact, b: Exact) -> MarketDataset {
    ds.map_prices(|a| a * c + b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0xF1F2),
        ..ProptestConfig::default()
    })]

    #[test]
    fn technical_events_ignore_affine_price_maps(num in 1i128..1000, den in 1i128..1000, shift in 0i128..10_000) {
        let ds = load("market_16.csv");
        let mapped = scale_prices(&ds, frac(num, den), frac(shift, 100));
        prop_assert_eq!(
            detect_technical(&ds, &config()).unwrap(),
            detect_technical(&mapped, &config()).unwrap()
        );
    }

    #[test]
    fn methods_ignore_positive_scaling(num in 1i128..1000, den in 1i128..1000) {
        let ds = load("market_16.csv");
        let cs = build_circumstance_series(&ds, &config()).unwrap();
        let vm: ValueMatrix<f64> = estimate_value_matrix(&ds, &cs).unwrap();
        let c = num as f64 / den as f64;
        let scaled_ds = scale_prices(&ds, frac(num, den), frac(0, 1));
        let scaled = estimate_value_matrix::<f64>(&scaled_ds, &build_circumstance_series(&scaled_ds, &config()).unwrap()).unwrap();
        for other in [vm.scaled(c), scaled] {
            prop_assert_eq!(method1_policy(&vm).unwrap().0, method1_policy(&other).unwrap().0);
            let a = method2_conditional(&lift_to_sets(&vm)).unwrap();
            let b = method2_conditional(&lift_to_sets(&other)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn method1_and_method2_agree_on_doublets() {
    let ds = load("market_16.csv");
    let cs = build_circumstance_series(&ds, &config()).unwrap();
    let vm: ValueMatrix<f64> = estimate_value_matrix(&ds, &cs).unwrap();
    let (policy, _) = method1_policy(&vm).unwrap();
    let m2 = method2_conditional(&lift_to_sets(&vm)).unwrap();
    for f in 0..64u32 {
        let row = m2.row(f).unwrap();
        let d = policy.decision_for(f);
        if d != 0 {
            assert_eq!(mode_decision(row), d);
            assert_eq!(row[d as usize], 1.0);
        } else {
            assert_eq!(row[0], 1.0);
        }
    }
}
