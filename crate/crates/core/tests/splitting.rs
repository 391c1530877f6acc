use gcp_core::parallel::replicate;
use gcp_core::routing::SplitSpec;
use gcp_core::simulate::{sample_path, superpose_paths, SamplePath};
use gcp_core::splitting::{type2_component_rates, type2_covariance, type2_split_path};
use gcp_core::stats::{chi_square_independence, MIN_EXPECTED};
use gcp_core::thinning::{type1_component_rates, type1_thin_path};
use gcp_core::{RateVector, SeedSpec};
use proptest::prelude::*;

fn arb_rates() -> impl Strategy<Value = RateVector> {
    prop::collection::vec(0.0f64..3.0, 1..5).prop_map(|mut r| {
        let last = r.len() - 1;
        r[last] += 0.05;
        RateVector::new(r).unwrap()
    })
}

fn arb_spec() -> impl Strategy<Value = SplitSpec> {
    prop::collection::vec(0.05f64..1.0, 1..5).prop_map(|w| {
        let s: f64 = w.iter().sum();
        let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
        let head: f64 = p[..p.len() - 1].iter().sum();
        let last = p.len() - 1;
        p[last] = 1.0 - head;
        SplitSpec::new(p).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_splits_conserve_events(rates in arb_rates(), spec in arb_spec(), seed in any::<u64>()) {
        let s = SeedSpec::new(seed, 0);
        let path = sample_path(&rates, 4.0, s).unwrap();
        let one = type1_thin_path(&path, &spec, s);
        prop_assert_eq!(superpose_paths(&one).unwrap(), path.clone());
        let two = type2_split_path(&path, &spec, s);
        prop_assert_eq!(two.len(), spec.len());
        prop_assert_eq!(two.iter().map(SamplePath::total).sum::<u64>(), path.total());
        prop_assert_eq!(superpose_paths(&two).unwrap(), path);
    }

    #[test]
    fn unit_jumps_split_alike(rate in 0.01f64..5.0, spec in arb_spec()) {
        let rates = RateVector::poisson(rate).unwrap();
        for i in 1..=spec.len() {
            let two = type2_component_rates(&rates, &spec, i).unwrap();
            let one = type1_component_rates(&rates, &spec, i).unwrap();
            prop_assert_eq!(two.as_slice(), one.as_slice());
        }
    }

    #[test]
    fn covariance_positive_with_multi_unit_jumps(rates in arb_rates(), spec in arb_spec(), t in 0.1f64..3.0) {
        prop_assume!(spec.len() >= 2);
        let cov = type2_covariance(&rates, &spec, 1, 2, t).unwrap();
        let multi = rates.iter().any(|(j, l)| j >= 2 && l > 0.0);
        if multi { prop_assert!(cov > 0.0) } else { prop_assert_eq!(cov, 0.0) }
    }
}

/// Twenty independent Type I experiments; the chi-square test of
/// independence should reject at the 1% level rarely (P(≥ 3 of 20) ≈ 1e-3).
#[test]
fn type1_independence_rarely_rejected() {
    let rates = RateVector::new(vec![1.0, 2.0]).unwrap();
    let spec = SplitSpec::coin(0.4).unwrap();
    let mut rejections = 0;
    for run in 0..20u64 {
        let pairs: Vec<(u64, u64)> = replicate(10_000, |i| {
            let s = SeedSpec::new(1000 + run, i);
            let parts = type1_thin_path(&sample_path(&rates, 1.0, s).unwrap(), &spec, s);
            (parts[0].total(), parts[1].total())
        });
        if chi_square_independence(&pairs, MIN_EXPECTED).unwrap().p_value < 0.01 {
            rejections += 1;
        }
    }
    assert!(rejections <= 2, "{rejections} rejections in 20 runs");
}

/// Type II components of a process with double jumps are dependent, and the
/// same test detects it.
#[test]
fn type2_dependence_detected() {
    let rates = RateVector::new(vec![0.0, 3.0]).unwrap();
    let spec = SplitSpec::coin(0.5).unwrap();
    let pairs: Vec<(u64, u64)> = replicate(10_000, |i| {
        let s = SeedSpec::new(77, i);
        let parts = type2_split_path(&sample_path(&rates, 1.0, s).unwrap(), &spec, s);
        (parts[0].total(), parts[1].total())
    });
    assert!(chi_square_independence(&pairs, MIN_EXPECTED).unwrap().p_value < 1e-6);
}
