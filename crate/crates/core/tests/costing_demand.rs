use chargeplan::costing::{erlang_c, expected_wait, min_slots, QueueSpec};
use chargeplan::demand::{fit_cca, loocv_rmse, mdr_weights, ModelKind};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn single_server_wait_probability_is_the_load(rho in 0.0f64..0.999) {
        prop_assert!((erlang_c(1, rho).unwrap() - rho).abs() < 1e-12);
    }

    #[test]
    fn wait_falls_with_every_extra_slot(lambda in 0.1f64..40.0, mu in 0.2f64..6.0) {
        let q = QueueSpec::new(lambda, mu, 0.0).unwrap();
        let floor = q.stability_floor();
        let mut prev = f64::INFINITY;
        for n in floor..=floor + 20 {
            let w = expected_wait(n, &q).unwrap();
            prop_assert!(w < prev || (w == 0.0 && prev == 0.0));
            prev = w;
        }
        prop_assert!(expected_wait(floor - 1, &q).is_err() || floor == 1);
    }

    #[test]
    fn min_slots_is_minimal(lambda in 0.1f64..40.0, mu in 0.2f64..6.0, sla in 0.001f64..1.0) {
        let q = QueueSpec::new(lambda, mu, sla).unwrap();
        let n = min_slots(&q);
        prop_assert!(expected_wait(n, &q).unwrap() <= sla);
        if n > q.stability_floor() {
            prop_assert!(expected_wait(n - 1, &q).unwrap() > sla);
        }
    }

    #[test]
    fn weights_sum_to_one(errors in prop::collection::vec(0.0f64..100.0, 2..8)) {
        let w = mdr_weights(&errors);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        // Lower error never gets a lower weight.
        for i in 0..errors.len() {
            for j in 0..errors.len() {
                if errors[i] < errors[j] {
                    prop_assert!(w[i] >= w[j]);
                }
            }
        }
    }

    #[test]
    fn canonical_correlations_ignore_affine_rescaling(seed in any::<u64>(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(40, 3, |_, _| rng.random_range(-1.0..1.0));
        let noise = DMatrix::from_fn(40, 2, |_, _| rng.random_range(-1.0..1.0));
        let y = x.columns(0, 2) * 0.8 + noise;
        let base = fit_cca(&x, &y, None).unwrap();
        let moved = fit_cca(&x.map(|v| a * v + b), &y.map(|v| v / a - b), None).unwrap();
        for (p, q) in base.correlations.iter().zip(&moved.correlations) {
            prop_assert!((p - q).abs() < 1e-6);
            prop_assert!((0.0..=1.0).contains(p));
        }
    }
}

#[test]
fn worked_queue_case_needs_four_slots() {
    // Four arrivals an hour, two sessions per slot-hour, five-minute SLA.
    let q = QueueSpec::new(4.0, 2.0, 5.0 / 60.0).unwrap();
    assert_eq!(min_slots(&q), 4);
}

#[test]
fn independent_views_have_small_correlations() {
    // Permutation null: shuffling the rows of Y destroys any dependence, and
    // the observed top correlation for independent data stays in that range.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let x = DMatrix::from_fn(200, 2, |_, _| rng.random_range(-1.0..1.0));
    let y = DMatrix::from_fn(200, 2, |_, _| rng.random_range(-1.0..1.0));
    let observed = fit_cca(&x, &y, None).unwrap().correlations[0];
    let mut null = Vec::new();
    for _ in 0..50 {
        let mut rows: Vec<usize> = (0..200).collect();
        for i in (1..rows.len()).rev() {
            rows.swap(i, rng.random_range(0..=i));
        }
        null.push(fit_cca(&x, &y.select_rows(&rows), None).unwrap().correlations[0]);
    }
    null.sort_by(f64::total_cmp);
    assert!(observed <= null[49], "{observed} above every permuted value");
    assert!(observed < 0.3);
}

#[test]
fn mdr_tracks_the_informative_view() {
    let mut wins = 0;
    let mut top = 0;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let signal = DMatrix::from_fn(n, 3, |_, _| rng.random_range(-1.0..1.0));
        let map = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-2.0..2.0));
        let y = &signal * map + DMatrix::from_fn(n, 2, |_, _| rng.random_range(-0.3..0.3));
        let views = vec![
            signal,
            DMatrix::from_fn(n, 3, |_, _| rng.random_range(-1.0..1.0)),
            DMatrix::from_fn(n, 3, |_, _| rng.random_range(-1.0..1.0)),
        ];
        let mdr = loocv_rmse(&views, &y, ModelKind::Mdr, None).unwrap();
        let uni = loocv_rmse(&views, &y, ModelKind::UniformEnsemble, None).unwrap();
        wins += usize::from(mdr.mean <= uni.mean);
        let m = chargeplan::demand::fit_mdr(&views, &y, None).unwrap();
        top += usize::from(m.weights[0] > m.weights[1] && m.weights[0] > m.weights[2]);
    }
    assert!(wins >= 7, "{wins}/10");
    assert_eq!(top, 10);
}
