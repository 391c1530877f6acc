//! Packet-level (Type I) splitting: every jump packet is routed whole to one
//! component by an independent categorical draw.

use rand::distr::Distribution;
use serde::Serialize;

use crate::error::{GcpError, Result};
use crate::parallel::replicate;
use crate::pmf::{pmf_recurrence, truncation_point};
use crate::rates::RateVector;
use crate::routing::SplitSpec;
use crate::simulate::{sample_path, superpose_paths, Event, SamplePath};
use crate::stats::{
    bivariate_estimates, chi_square_gof, chi_square_independence, tv_distance, EmpiricalDistribution, Estimate,
    GofResult, MIN_EXPECTED,
};
use crate::stream::{SeedSpec, DOMAIN_ROUTING};

/// Fewest replications accepted by [`type1_independence_check`].
pub const MIN_REPLICATIONS: usize = 10_000;

/// Rates `λ_j p_i` of component `i` (1-based).
pub fn type1_component_rates(rates: &RateVector, spec: &SplitSpec, component: usize) -> Result<RateVector> {
    let p = spec.probability(component)?;
    if p == 0.0 {
        return Err(GcpError::ZeroRoutingProbability(component));
    }
    rates.scaled(p)
}

/// Route every event of `path` to one of `spec.len()` components. Times and
/// sizes are preserved; each output keeps the input's maximum jump size.
pub fn type1_thin_path(path: &SamplePath, spec: &SplitSpec, seed: SeedSpec) -> Vec<SamplePath> {
    let mut rng = seed.domain(DOMAIN_ROUTING).rng();
    let sampler = spec.sampler();
    let mut parts: Vec<Vec<Event>> = vec![Vec::new(); spec.len()];
    for e in path.events() {
        parts[sampler.sample(&mut rng)].push(*e);
    }
    parts
        .into_iter()
        .map(|events| SamplePath::new(path.horizon(), path.max_jump(), events).expect("a subsequence of a valid path"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentFit {
    pub component: usize,
    pub tv: f64,
    pub gof: GofResult,
    pub mean: Estimate,
    pub expected_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCovariance {
    pub x: usize,
    pub y: usize,
    pub covariance: Estimate,
    pub independence: Option<GofResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Type1Report {
    pub replications: usize,
    pub t: f64,
    /// Every replication's split paths superpose back to the original path.
    pub conserved: bool,
    /// One entry per component with positive routing probability.
    pub components: Vec<ComponentFit>,
    pub pairs: Vec<PairCovariance>,
}

/// Simulate, thin and summarize `replications` paths on `(0, t]`.
///
/// The report is data only: TV distance and goodness of fit of each
/// component against `λ_j p_i`, and for each pair of components the sample
/// covariance of their counts with its SE and a chi-square independence test
/// (absent when a component is almost surely empty).
pub fn type1_independence_check(
    rates: &RateVector,
    spec: &SplitSpec,
    t: f64,
    replications: usize,
    master_seed: u64,
) -> Result<Type1Report> {
    if replications < MIN_REPLICATIONS {
        return Err(GcpError::TooFewSamples { need: MIN_REPLICATIONS, got: replications });
    }
    let q = spec.len();
    let draws = replicate(replications, |i| -> Result<(Vec<u64>, bool)> {
        let seed = SeedSpec::new(master_seed, i);
        let path = sample_path(rates, t, seed)?;
        let parts = type1_thin_path(&path, spec, seed);
        let conserved = superpose_paths(&parts)? == path;
        Ok((parts.iter().map(SamplePath::total).collect(), conserved))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let conserved = draws.iter().all(|d| d.1);
    let counts: Vec<Vec<u64>> = (0..q).map(|c| draws.iter().map(|d| d.0[c]).collect()).collect();
    let as_f64 = |c: usize| counts[c].iter().map(|&v| v as f64).collect::<Vec<_>>();

    let mut components = Vec::new();
    for c in 1..=q {
        let Ok(component_rates) = type1_component_rates(rates, spec, c) else { continue };
        let emp = EmpiricalDistribution::from_samples(counts[c - 1].iter().copied())?;
        components.push(fit_component(c, &component_rates, &emp, &as_f64(c - 1), t)?);
    }
    let mut pairs = Vec::new();
    for x in 1..=q {
        for y in x + 1..=q {
            let covariance = bivariate_estimates(&as_f64(x - 1), &as_f64(y - 1))?.covariance;
            let joint: Vec<(u64, u64)> = counts[x - 1].iter().copied().zip(counts[y - 1].iter().copied()).collect();
            let independence = chi_square_independence(&joint, MIN_EXPECTED).ok();
            pairs.push(PairCovariance { x, y, covariance, independence });
        }
    }
    Ok(Type1Report { replications, t, conserved, components, pairs })
}

pub(crate) fn fit_component(
    component: usize,
    rates: &RateVector,
    emp: &EmpiricalDistribution,
    samples: &[f64],
    t: f64,
) -> Result<ComponentFit> {
    let n_max = truncation_point(rates, t, 1e-12).max(emp.max_value() as usize);
    let pmf = pmf_recurrence(rates, n_max, t)?;
    let mean = crate::stats::moment_estimates(samples)?.mean;
    Ok(ComponentFit {
        component,
        tv: tv_distance(emp, &pmf),
        gof: chi_square_gof(emp, &pmf, MIN_EXPECTED).unwrap_or(GofResult { statistic: 0.0, dof: 0, p_value: 1.0 }),
        mean,
        expected_mean: crate::pmf::mean(rates, t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{proportion, SE_BAND, TV_TOLERANCE};
    use proptest::prelude::*;

    fn rv(r: &[f64]) -> RateVector {
        RateVector::new(r.to_vec()).unwrap()
    }

    #[test]
    fn component_rate_examples() {
        let r = rv(&[1.0, 2.0]);
        let s = SplitSpec::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(type1_component_rates(&r, &s, 2).unwrap().as_slice(), &[0.75, 1.5]);
        assert_eq!(type1_component_rates(&r, &SplitSpec::new(vec![1.0]).unwrap(), 1).unwrap(), r);
        let z = SplitSpec::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(type1_component_rates(&r, &z, 2), Err(GcpError::ZeroRoutingProbability(2)));
        assert!(type1_component_rates(&r, &z, 3).is_err());
    }

    #[test]
    fn degenerate_routing() {
        let path = sample_path(&rv(&[1.0, 1.0]), 5.0, SeedSpec::new(1, 0)).unwrap();
        let one = type1_thin_path(&path, &SplitSpec::new(vec![1.0]).unwrap(), SeedSpec::new(1, 0));
        assert_eq!(one, vec![path.clone()]);
        let first = type1_thin_path(&path, &SplitSpec::new(vec![1.0, 0.0, 0.0]).unwrap(), SeedSpec::new(1, 0));
        assert_eq!(first[0], path);
        assert!(first[1].events().is_empty() && first[2].events().is_empty());
    }

    #[test]
    fn routing_fraction_matches_probability() {
        let r = rv(&[1.0, 1.0]);
        let s = SplitSpec::new(vec![0.2, 0.3, 0.5]).unwrap();
        let mut routed = [[0u64; 3]; 2];
        for i in 0..3000 {
            let seed = SeedSpec::new(5, i);
            let path = sample_path(&r, 2.0, seed).unwrap();
            for (c, part) in type1_thin_path(&path, &s, seed).iter().enumerate() {
                for e in part.events() {
                    routed[e.size as usize - 1][c] += 1;
                }
            }
        }
        for sizes in routed {
            let total: u64 = sizes.iter().sum();
            for (c, &n) in sizes.iter().enumerate() {
                let est = proportion(n, total);
                assert!(est.within(s.probabilities()[c], SE_BAND), "{c}: {est:?}");
            }
        }
    }

    #[test]
    fn too_few_replications_rejected() {
        let r = rv(&[1.0]);
        let s = SplitSpec::coin(0.5).unwrap();
        assert!(matches!(type1_independence_check(&r, &s, 1.0, 100, 0), Err(GcpError::TooFewSamples { .. })));
    }

    #[test]
    fn poisson_thinning_is_independent() {
        let r = rv(&[2.0]);
        let s = SplitSpec::coin(0.3).unwrap();
        let report = type1_independence_check(&r, &s, 1.0, 20_000, 17).unwrap();
        assert!(report.conserved);
        assert!(report.pairs[0].covariance.within(0.0, SE_BAND));
        for c in &report.components {
            assert!(c.tv < 2.0 * TV_TOLERANCE);
            assert!(c.mean.within(c.expected_mean, SE_BAND));
        }
    }

    proptest! {
        #[test]
        fn rates_add_back(r in prop::collection::vec(0.01f64..5.0, 1..5), raw in prop::collection::vec(0.01f64..1.0, 1..5)) {
            let total: f64 = raw.iter().sum();
            let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let head: f64 = p[..p.len() - 1].iter().sum();
            let last = p.len() - 1;
            p[last] = 1.0 - head;
            prop_assume!(p[last] > 0.0);
            let spec = SplitSpec::new(p).unwrap();
            let rates = rv(&r);
            let comps: Vec<RateVector> = (1..=spec.len()).map(|i| type1_component_rates(&rates, &spec, i).unwrap()).collect();
            for (j, lambda) in rates.iter() {
                let sum: f64 = comps.iter().map(|c| c.rate(j)).sum();
                prop_assert!((sum - lambda).abs() <= 4.0 * f64::EPSILON * lambda * spec.len() as f64);
            }
        }

        #[test]
        fn dyadic_rates_add_back_exactly(r in prop::collection::vec(0.01f64..5.0, 1..5), bits in 1u32..6) {
            let p = 0.5f64.powi(bits as i32);
            let spec = SplitSpec::new(vec![p, 1.0 - p]).unwrap();
            let rates = rv(&r);
            let a = type1_component_rates(&rates, &spec, 1).unwrap();
            let b = type1_component_rates(&rates, &spec, 2).unwrap();
            for (j, lambda) in rates.iter() {
                prop_assert_eq!(a.rate(j) + b.rate(j), lambda);
            }
        }

        #[test]
        fn thinning_conserves_events(seed in 0u64..10_000, q in 1usize..5) {
            let rates = rv(&[1.0, 0.5, 2.0]);
            let spec = SplitSpec::new(vec![1.0 / q as f64; q]).unwrap_or_else(|_| SplitSpec::new(vec![1.0]).unwrap());
            let path = sample_path(&rates, 3.0, SeedSpec::new(seed, 0)).unwrap();
            let parts = type1_thin_path(&path, &spec, SeedSpec::new(seed, 0));
            prop_assert_eq!(superpose_paths(&parts).unwrap(), path.clone());
            let mut all: Vec<(u64, u32)> = parts.iter().flat_map(|p| p.events().iter().map(|e| (e.time.to_bits(), e.size))).collect();
            all.sort();
            let mut orig: Vec<(u64, u32)> = path.events().iter().map(|e| (e.time.to_bits(), e.size)).collect();
            orig.sort();
            prop_assert_eq!(all, orig);
        }
    }
}
