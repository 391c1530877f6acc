use gcp_core::pmf::{mean, pgf, pmf_enumerated, pmf_recurrence, tail_bound, truncation_point, variance};
use gcp_core::RateVector;
use proptest::prelude::*;

fn arb_rates() -> impl Strategy<Value = RateVector> {
    prop::collection::vec(0.0f64..3.0, 1..6).prop_map(|mut r| {
        let last = r.len() - 1;
        r[last] += 0.01;
        RateVector::new(r).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncated_mass_within_tail_bound(rates in arb_rates(), t in 0.01f64..5.0) {
        let n = truncation_point(&rates, t, 1e-9);
        prop_assert!(tail_bound(&rates, t, n + 1) <= 1e-9);
        let total: f64 = pmf_recurrence(&rates, n, t).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9, "total {total} at n {n}");
    }

    #[test]
    fn pgf_slope_at_one_is_the_mean(rates in arb_rates(), t in 0.01f64..5.0) {
        let h = 1e-6;
        let g = |u: f64| pgf(&rates, u, t).unwrap();
        let slope = (3.0 * g(1.0) - 4.0 * g(1.0 - h) + g(1.0 - 2.0 * h)) / (2.0 * h);
        let m = mean(&rates, t);
        prop_assert!((slope - m).abs() <= 1e-5 * m.max(1.0), "slope {slope} mean {m}");
    }

    #[test]
    fn moments_from_the_table(rates in arb_rates(), t in 0.01f64..3.0) {
        let n = truncation_point(&rates, t, 1e-14);
        let p = pmf_recurrence(&rates, n, t).unwrap();
        let m1: f64 = p.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let m2: f64 = p.iter().enumerate().map(|(n, p)| (n as f64).powi(2) * p).sum();
        let m = mean(&rates, t);
        prop_assert!((m1 - m).abs() <= 1e-8 * m.max(1.0));
        prop_assert!((m2 - m1 * m1 - variance(&rates, t)).abs() <= 1e-7 * m2.max(1.0));
    }
}

#[test]
fn oracle_equivalence_on_a_fixed_grid() {
    let grid = [
        vec![1.0],
        vec![0.5, 0.25],
        vec![0.0, 1.0],
        vec![1.0, 0.0, 2.0],
        vec![0.2, 0.4, 0.6, 0.8],
        vec![1.5, 0.1, 0.0, 0.3, 0.7],
    ];
    for r in grid {
        let rates = RateVector::new(r).unwrap();
        for t in [0.1, 0.5, 1.0, 2.5, 5.0] {
            let rec = pmf_recurrence(&rates, 30, t).unwrap();
            for (n, p) in rec.iter().enumerate() {
                assert!((pmf_enumerated(&rates, n, t).unwrap() - p).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn poisson_reduction() {
    let rates = RateVector::poisson(1.3).unwrap();
    for t in [0.5f64, 1.0, 2.0] {
        let mut p = (-1.3 * t).exp();
        for n in 0..=50usize {
            if n > 0 {
                p *= 1.3 * t / n as f64;
            }
            assert!((pmf_enumerated(&rates, n, t).unwrap() - p).abs() <= 1e-12);
        }
    }
}

#[test]
fn large_rates_stay_normalized() {
    let rates = RateVector::new(vec![20.0, 10.0, 5.0]).unwrap();
    let t = 3.0;
    let n = truncation_point(&rates, t, 1e-12);
    let p = pmf_recurrence(&rates, n, t).unwrap();
    assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}
