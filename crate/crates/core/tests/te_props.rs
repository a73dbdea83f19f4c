use etcausal::{
    conditional_entropy, surrogate_test, transfer_entropy, LogBase, SymbolSequence, TeConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn binary(v: Vec<u32>) -> SymbolSequence {
    SymbolSequence::new(v, 2).unwrap()
}

/// TE(y -> x) with s = t = 1 straight from its definition: a sum over every
/// realized `(x[n+1], x[n], y[n])` cell, probabilities counted by scanning
/// the sample list for each one.
fn naive_te(x: &[u32], y: &[u32]) -> f64 {
    let samples: Vec<(u32, u32, u32)> = (0..x.len() - 1).map(|n| (x[n + 1], x[n], y[n])).collect();
    let total = samples.len() as f64;
    let count =
        |f: &dyn Fn(&(u32, u32, u32)) -> bool| samples.iter().filter(|s| f(s)).count() as f64;
    let mut cells: Vec<(u32, u32, u32)> = samples.clone();
    cells.sort_unstable();
    cells.dedup();
    let mut te = 0.0;
    for &(a, b, c) in &cells {
        let p_abc = count(&|s| *s == (a, b, c)) / total;
        let p_bc = count(&|s| s.1 == b && s.2 == c) / total;
        let p_ab = count(&|s| s.0 == a && s.1 == b) / total;
        let p_b = count(&|s| s.1 == b) / total;
        te += p_abc * ((p_abc / p_bc) / (p_ab / p_b)).ln();
    }
    te
}

fn nats() -> TeConfig {
    TeConfig {
        log_base: LogBase::E,
        ..TeConfig::default()
    }
}

#[test]
fn matches_naive_definition_on_all_short_binary_pairs() {
    let cfg = nats();
    let mut checked = 0usize;
    for len in 3..=8u32 {
        for xc in 0..1u32 << len {
            let x: Vec<u32> = (0..len).map(|i| xc >> i & 1).collect();
            for yc in 0..1u32 << len {
                let y: Vec<u32> = (0..len).map(|i| yc >> i & 1).collect();
                let got = transfer_entropy(&binary(y.clone()), &binary(x.clone()), &cfg)
                    .unwrap()
                    .value;
                let want = naive_te(&x, &y).max(0.0);
                assert!(
                    (got - want).abs() <= 1e-12,
                    "x={x:?} y={y:?}: {got} vs {want}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, (3..=8).map(|l| 1usize << (2 * l)).sum::<usize>());
}

fn binary_pair(min: usize, max: usize) -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
    (min..=max).prop_flat_map(|n| {
        (
            proptest::collection::vec(0..2u32, n),
            proptest::collection::vec(0..2u32, n),
        )
    })
}

fn ternary_pair(max: usize) -> impl Strategy<Value = (SymbolSequence, SymbolSequence)> {
    (5..=max).prop_flat_map(|n| {
        (
            proptest::collection::vec(0..3u32, n),
            proptest::collection::vec(0..3u32, n),
        )
            .prop_map(|(a, b)| {
                (
                    SymbolSequence::new(a, 3).unwrap(),
                    SymbolSequence::new(b, 3).unwrap(),
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_naive_definition_up_to_length_12((x, y) in binary_pair(9, 12)) {
        let got = transfer_entropy(&binary(y.clone()), &binary(x.clone()), &nats()).unwrap().value;
        prop_assert!((got - naive_te(&x, &y).max(0.0)).abs() <= 1e-12);
    }

    #[test]
    fn base_change_is_ln_2((y, x) in ternary_pair(60), lags in 1usize..=3) {
        let e = TeConfig { log_base: LogBase::E, ..TeConfig::with_lags(lags) };
        let two = TeConfig { log_base: LogBase::Two, ..TeConfig::with_lags(lags) };
        let te_e = transfer_entropy(&y, &x, &e).unwrap().value;
        let te_2 = transfer_entropy(&y, &x, &two).unwrap().value;
        prop_assert!((te_e - te_2 * std::f64::consts::LN_2).abs() <= 1e-12);
    }

    #[test]
    fn value_non_negative_and_sample_count((y, x) in ternary_pair(60), s in 1usize..=3, t in 1usize..=3) {
        let cfg = TeConfig { source_lags: t, target_lags: s, ..TeConfig::default() };
        let r = transfer_entropy(&y, &x, &cfg).unwrap();
        prop_assert!(r.value >= 0.0);
        prop_assert_eq!(r.effective_samples, x.len() - s.max(t));
    }
}

fn iid_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

/// `x[n+1] = y[n]`, `x[0]` arbitrary.
fn copy_coupled(rng: &mut ChaCha8Rng, n: usize) -> (Vec<u32>, Vec<u32>) {
    let y = iid_bits(rng, n);
    let mut x = vec![rng.random_range(0..2)];
    x.extend_from_slice(&y[..n - 1]);
    (x, y)
}

#[test]
fn copy_coupling_is_one_bit_and_asymmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (x, y) = copy_coupled(&mut rng, 10_000);
    let cfg = TeConfig::default();
    let forward = transfer_entropy(&binary(y.clone()), &binary(x.clone()), &cfg)
        .unwrap()
        .value;
    let backward = transfer_entropy(&binary(x), &binary(y), &cfg)
        .unwrap()
        .value;
    assert!((forward - 1.0).abs() < 0.02, "TE(y->x) = {forward}");
    assert!(forward > backward + 0.5, "{forward} vs {backward}");
}

#[test]
fn independent_series_have_near_zero_te() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = binary(iid_bits(&mut rng, 100_000));
    let y = binary(iid_bits(&mut rng, 100_000));
    let r = transfer_entropy(&y, &x, &TeConfig::default()).unwrap();
    assert!(r.value < 1e-3, "{}", r.value);
}

#[test]
fn surrogate_null_is_calibrated() {
    let cfg = TeConfig {
        surrogate_count: 100,
        significance_level: 0.05,
        ..TeConfig::default()
    };
    let trials = 100;
    let mut rejected = 0;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let x = binary(iid_bits(&mut rng, 200));
        let y = binary(iid_bits(&mut rng, 200));
        let r = surrogate_test(
            &y,
            &x,
            &TeConfig {
                rng_seed: trial,
                ..cfg.clone()
            },
        )
        .unwrap();
        let s = r.surrogate.unwrap();
        if s.passed {
            rejected += 1;
        } else {
            assert_eq!(s.value_after_test, 0.0);
        }
    }
    assert!(
        rejected * 10 <= trials,
        "{rejected} of {trials} independent pairs passed"
    );
}

#[test]
fn surrogate_test_detects_deterministic_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (x, y) = copy_coupled(&mut rng, 1000);
    let cfg = TeConfig {
        surrogate_count: 100,
        ..TeConfig::default()
    };
    let r = surrogate_test(&binary(y), &binary(x), &cfg).unwrap();
    let s = r.surrogate.as_ref().unwrap();
    assert!(s.passed);
    assert_eq!(s.value_after_test, r.value);
}

#[test]
fn surrogate_pipeline_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = binary(iid_bits(&mut rng, 300));
    let y = binary(iid_bits(&mut rng, 300));
    let cfg = TeConfig {
        surrogate_count: 64,
        rng_seed: 42,
        ..TeConfig::with_lags(2)
    };
    let a = surrogate_test(&y, &x, &cfg).unwrap();
    let b = surrogate_test(&y, &x, &cfg).unwrap();
    assert_eq!(a, b);
    let other = surrogate_test(
        &y,
        &x,
        &TeConfig {
            rng_seed: 43,
            ..cfg
        },
    )
    .unwrap();
    assert_ne!(
        a.surrogate.unwrap().null_values,
        other.surrogate.unwrap().null_values
    );
}

#[test]
fn naive_oracle_on_delayed_copy() {
    let y = [0, 1, 1, 0, 1, 0, 0, 1, 1];
    let mut x = vec![0];
    x.extend_from_slice(&y[..8]);
    // x[n+1] = y[n], so TE collapses to H(x[n+1] | x[n])
    let next = binary(x[1..].to_vec());
    let prev = binary(x[..8].to_vec());
    let h = conditional_entropy(&next, &prev, LogBase::E).unwrap();
    assert!((naive_te(&x, &y) - h).abs() < 1e-12);
}
