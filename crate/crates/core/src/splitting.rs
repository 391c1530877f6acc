//! Unit-level (Type II) splitting: each of the `j` units of a size-`j` jump
//! is routed independently, so components can jump at the same instant.

use rand::distr::Distribution;
use serde::Serialize;
use statrs::function::factorial::binomial;

use crate::error::{check_time, check_unit, GcpError, Result};
use crate::parallel::replicate;
use crate::pmf::{pmf_recurrence, truncation_point};
use crate::rates::RateVector;
use crate::routing::SplitSpec;
use crate::simulate::{sample_path, superpose_paths, Event, SamplePath};
use crate::stats::{bivariate_estimates, moment_estimates, ode_residual, EmpiricalDistribution, Estimate};
use crate::stream::{SeedSpec, DOMAIN_ROUTING};
use crate::thinning::{fit_component, ComponentFit};

/// Rate at which component `i` (1-based) receives jumps of size `units`:
/// `Σ_{j ≥ units} λ_j C(j, units) p_i^units (1 - p_i)^(j - units)`.
pub fn type2_component_rate(rates: &RateVector, spec: &SplitSpec, component: usize, units: usize) -> Result<f64> {
    let p = spec.probability(component)?;
    let k = rates.max_jump();
    if units == 0 || units > k {
        return Err(GcpError::JumpOutOfRange { jump: units, max: k });
    }
    Ok(binomial_rate(rates, p, units))
}

fn binomial_rate(rates: &RateVector, p: f64, units: usize) -> f64 {
    rates
        .iter()
        .filter(|&(j, _)| j >= units)
        .map(|(j, lambda)| {
            lambda * binomial(j as u64, units as u64) * p.powi(units as i32) * (1.0 - p).powi((j - units) as i32)
        })
        .sum()
}

/// All per-size rates of component `i` as a rate vector.
pub fn type2_component_rates(rates: &RateVector, spec: &SplitSpec, component: usize) -> Result<RateVector> {
    let p = spec.probability(component)?;
    if p == 0.0 {
        return Err(GcpError::ZeroRoutingProbability(component));
    }
    RateVector::new((1..=rates.max_jump()).map(|u| binomial_rate(rates, p, u)).collect())
}

/// Total event rate of component `i`: `Σ_j λ_j (1 - (1 - p_i)^j)`.
pub fn type2_event_rate(rates: &RateVector, spec: &SplitSpec, component: usize) -> Result<f64> {
    let p = spec.probability(component)?;
    Ok(rates.iter().map(|(j, lambda)| lambda * (1.0 - (1.0 - p).powi(j as i32))).sum())
}

/// Divide every event of `path` unit by unit. A component receiving `j_i > 0`
/// units gets an event of size `j_i` at the original time.
pub fn type2_split_path(path: &SamplePath, spec: &SplitSpec, seed: SeedSpec) -> Vec<SamplePath> {
    let mut rng = seed.domain(DOMAIN_ROUTING).rng();
    let sampler = spec.sampler();
    let q = spec.len();
    let mut parts: Vec<Vec<Event>> = vec![Vec::new(); q];
    let mut units = vec![0u32; q];
    for e in path.events() {
        units.iter_mut().for_each(|u| *u = 0);
        for _ in 0..e.size {
            units[sampler.sample(&mut rng)] += 1;
        }
        for (part, &u) in parts.iter_mut().zip(&units) {
            if u > 0 {
                part.push(Event { time: e.time, size: u });
            }
        }
    }
    parts
        .into_iter()
        .map(|events| SamplePath::new(path.horizon(), path.max_jump(), events).expect("sizes never grow"))
        .collect()
}

/// `E[Π u_i^{M_i(t)}] = exp(Σ_j λ_j t ((Σ_i p_i u_i)^j - 1))`.
pub fn type2_joint_pgf(rates: &RateVector, spec: &SplitSpec, u: &[f64], t: f64) -> Result<f64> {
    if u.len() != spec.len() {
        return Err(GcpError::InvalidArgument(format!("expected {} pgf arguments, got {}", spec.len(), u.len())));
    }
    for &x in u {
        check_unit("u", x)?;
    }
    check_time(t)?;
    let s: f64 = spec.probabilities().iter().zip(u).map(|(p, x)| p * x).sum();
    let exponent: f64 = rates.iter().map(|(j, lambda)| lambda * (s.powi(j as i32) - 1.0)).sum();
    Ok((exponent * t).exp())
}

/// `E[M_i(t)] = p_i Σ_j j λ_j t`.
pub fn type2_mean(rates: &RateVector, spec: &SplitSpec, component: usize, t: f64) -> Result<f64> {
    let p = spec.probability(component)?;
    check_time(t)?;
    Ok(p * rates.iter().map(|(j, l)| j as f64 * l).sum::<f64>() * t)
}

/// `Cov(M_x(t), M_y(t)) = t p_x p_y Σ_j λ_j j (j - 1)` for `x ≠ y`.
pub fn type2_covariance(rates: &RateVector, spec: &SplitSpec, x: usize, y: usize, t: f64) -> Result<f64> {
    if x == y {
        return Err(GcpError::InvalidArgument("covariance needs two distinct components".into()));
    }
    let (px, py) = (spec.probability(x)?, spec.probability(y)?);
    check_time(t)?;
    let factorial_moment: f64 = rates.iter().map(|(j, l)| l * (j * (j - 1)) as f64).sum();
    Ok(t * px * py * factorial_moment)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeReport {
    pub max_residual: f64,
    /// `p(0, 0) = 1` and `p(n, 0) = 0` for `n > 0` hold exactly.
    pub initial_condition_exact: bool,
}

/// Check that the marginal pmf of component `i` solves
/// `d/dt p(n) = -Σ_j λ_j (1 - (1 - p)^j) p(n) + Σ_j Σ_{u=1}^{j} λ_j C(j, u) p^u (1 - p)^(j - u) p(n - u)`
/// for `n ≤ n_max` at time `t`, using a finite difference with step `dt`.
pub fn type2_marginal_ode_residual(
    rates: &RateVector,
    spec: &SplitSpec,
    component: usize,
    n_max: usize,
    t: f64,
    dt: f64,
) -> Result<OdeReport> {
    check_time(t)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(GcpError::InvalidArgument(format!("step must be positive, got {dt}")));
    }
    let p = spec.probability(component)?;
    let marginal = type2_component_rates(rates, spec, component)?;
    let leave = type2_event_rate(rates, spec, component)?;
    let pmf_at = |s: f64| pmf_recurrence(&marginal, n_max, s).expect("time is valid");
    let rhs = |n: usize, s: f64| {
        let pn = pmf_at(s);
        let mut arrive = 0.0;
        for (j, lambda) in rates.iter() {
            for u in 1..=j.min(n) {
                arrive += lambda
                    * binomial(j as u64, u as u64)
                    * p.powi(u as i32)
                    * (1.0 - p).powi((j - u) as i32)
                    * pn[n - u];
            }
        }
        -leave * pn[n] + arrive
    };
    let grid: Vec<(usize, f64)> = (0..=n_max).map(|n| (n, t)).collect();
    let max_residual = ode_residual(|n, s| pmf_at(s)[n], rhs, &grid, dt);
    let initial = pmf_at(0.0);
    let initial_condition_exact = initial[0] == 1.0 && initial[1..].iter().all(|&v| v == 0.0);
    Ok(OdeReport { max_residual, initial_condition_exact })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Type2Pair {
    pub x: usize,
    pub y: usize,
    pub covariance: Estimate,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Type2Report {
    pub replications: usize,
    pub t: f64,
    /// Every replication's split paths superpose back to the original path.
    pub conserved: bool,
    pub components: Vec<ComponentFit>,
    pub pairs: Vec<Type2Pair>,
}

/// Simulate, split and summarize `replications` paths on `(0, t]`.
pub fn type2_check(
    rates: &RateVector,
    spec: &SplitSpec,
    t: f64,
    replications: usize,
    master_seed: u64,
) -> Result<Type2Report> {
    if replications < 3 {
        return Err(GcpError::TooFewSamples { need: 3, got: replications });
    }
    let q = spec.len();
    let draws = replicate(replications, |i| -> Result<(Vec<u64>, bool)> {
        let seed = SeedSpec::new(master_seed, i);
        let path = sample_path(rates, t, seed)?;
        let parts = type2_split_path(&path, spec, seed);
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
        let Ok(component_rates) = type2_component_rates(rates, spec, c) else { continue };
        let emp = EmpiricalDistribution::from_samples(counts[c - 1].iter().copied())?;
        components.push(fit_component(c, &component_rates, &emp, &as_f64(c - 1), t)?);
    }
    let mut pairs = Vec::new();
    for x in 1..=q {
        for y in x + 1..=q {
            let covariance = bivariate_estimates(&as_f64(x - 1), &as_f64(y - 1))?.covariance;
            pairs.push(Type2Pair { x, y, covariance, expected: type2_covariance(rates, spec, x, y, t)? });
        }
    }
    Ok(Type2Report { replications, t, conserved, components, pairs })
}

/// Monte Carlo estimates of the per-size jump rates of component `i`:
/// entry `u - 1` estimates the rate of size-`u` jumps.
pub fn type2_size_rate_estimates(
    rates: &RateVector,
    spec: &SplitSpec,
    component: usize,
    t: f64,
    replications: usize,
    master_seed: u64,
) -> Result<Vec<Estimate>> {
    spec.probability(component)?;
    if t.is_nan() || t <= 0.0 {
        return Err(GcpError::InvalidTime(t));
    }
    let per_path = replicate(replications, |i| -> Result<Vec<u64>> {
        let seed = SeedSpec::new(master_seed, i);
        let path = sample_path(rates, t, seed)?;
        Ok(type2_split_path(&path, spec, seed)[component - 1].size_counts())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    (0..rates.max_jump())
        .map(|u| {
            let xs: Vec<f64> = per_path.iter().map(|c| c[u] as f64 / t).collect();
            Ok(moment_estimates(&xs)?.mean)
        })
        .collect()
}

/// Largest `n` worth tabulating for the marginal law of component `i` at `t`.
pub fn type2_table_size(rates: &RateVector, spec: &SplitSpec, component: usize, t: f64) -> Result<usize> {
    Ok(truncation_point(&type2_component_rates(rates, spec, component)?, t, 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::for_each_composition;
    use crate::pmf::pgf;
    use crate::stats::SE_BAND;
    use crate::thinning::type1_component_rates;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use statrs::function::factorial::factorial;

    fn rv(r: &[f64]) -> RateVector {
        RateVector::new(r.to_vec()).unwrap()
    }

    fn spec(p: &[f64]) -> SplitSpec {
        SplitSpec::new(p.to_vec()).unwrap()
    }

    /// Rate of size-`units` jumps into component `i` by summing multinomial
    /// allocations `(j_1, .., j_q)` with `j_i = units`, weighted `j! / Π j_r! Π p_r^{j_r}`.
    fn multinomial_rate(rates: &RateVector, spec: &SplitSpec, i: usize, units: usize) -> f64 {
        let p = spec.probabilities();
        let q = p.len();
        let mut total = 0.0;
        for (j, lambda) in rates.iter() {
            for_each_composition(q, j, |alloc| {
                if alloc[i - 1] == units {
                    let coeff = factorial(j as u64) / alloc.iter().map(|&a| factorial(a as u64)).product::<f64>();
                    let prob: f64 = alloc.iter().zip(p).map(|(&a, pr)| pr.powi(a as i32)).product();
                    total += lambda * coeff * prob;
                }
            });
        }
        total
    }

    #[test]
    fn component_rate_examples() {
        let r = rv(&[0.0, 1.0]);
        let s = spec(&[0.5, 0.5]);
        assert_relative_eq!(type2_component_rate(&r, &s, 1, 1).unwrap(), 0.5);
        assert_relative_eq!(type2_component_rate(&r, &s, 1, 2).unwrap(), 0.25);
        assert!(type2_component_rate(&r, &s, 1, 3).is_err());
        assert!(type2_component_rate(&r, &s, 1, 0).is_err());
        let poisson = rv(&[3.0]);
        let s3 = spec(&[0.2, 0.8]);
        assert_relative_eq!(type2_component_rate(&poisson, &s3, 1, 1).unwrap(), 0.6);
        assert_eq!(
            type2_component_rates(&poisson, &s3, 2).unwrap().as_slice(),
            type1_component_rates(&poisson, &s3, 2).unwrap().as_slice()
        );
    }

    #[test]
    fn covariance_examples() {
        let s = spec(&[0.5, 0.5]);
        assert_relative_eq!(type2_covariance(&rv(&[0.0, 1.0]), &s, 1, 2, 1.0).unwrap(), 0.5);
        assert_eq!(type2_covariance(&rv(&[4.0]), &s, 1, 2, 3.0).unwrap(), 0.0);
        let r = rv(&[1.0, 2.0, 0.5]);
        let s3 = spec(&[0.2, 0.3, 0.5]);
        assert_eq!(type2_covariance(&r, &s3, 1, 3, 2.0).unwrap(), type2_covariance(&r, &s3, 3, 1, 2.0).unwrap());
        assert!(type2_covariance(&r, &s3, 2, 2, 1.0).is_err());
    }

    #[test]
    fn covariance_is_mixed_derivative_of_pgf() {
        let r = rv(&[1.0, 2.0, 0.5]);
        let s = spec(&[0.2, 0.3, 0.5]);
        let t = 0.7;
        let h = 1e-4;
        let g = |a: f64, b: f64| type2_joint_pgf(&r, &s, &[1.0 - a, 1.0 - b, 1.0], t).unwrap();
        let mixed = (g(0.0, 0.0) - g(h, 0.0) - g(0.0, h) + g(h, h)) / (h * h);
        let d1 = (g(0.0, 0.0) - g(h, 0.0)) / h;
        let d2 = (g(0.0, 0.0) - g(0.0, h)) / h;
        let cov = type2_covariance(&r, &s, 1, 2, t).unwrap();
        assert!((mixed - d1 * d2 - cov).abs() < 1e-2, "{} vs {cov}", mixed - d1 * d2);
        // first derivatives are the means, with the factor t
        assert!((d1 - type2_mean(&r, &s, 1, t).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn joint_pgf_examples() {
        let r = rv(&[1.0, 2.0]);
        let s = spec(&[0.3, 0.7]);
        assert_eq!(type2_joint_pgf(&r, &s, &[1.0, 1.0], 2.0).unwrap(), 1.0);
        assert!(type2_joint_pgf(&r, &s, &[1.0], 2.0).is_err());
        assert!(type2_joint_pgf(&r, &s, &[1.2, 1.0], 2.0).is_err());
        for w in [-1.0, -0.3, 0.0, 0.5, 0.9] {
            for c in 1..=2 {
                let mut u = vec![1.0; 2];
                u[c - 1] = w;
                let marginal = type2_component_rates(&r, &s, c).unwrap();
                let expected = pgf(&marginal, w, 1.3).unwrap();
                assert!((type2_joint_pgf(&r, &s, &u, 1.3).unwrap() - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn joint_pgf_matches_two_variable_expansion() {
        let r = rv(&[0.4, 1.1, 0.7]);
        let p = 0.35;
        let s = spec(&[p, 1.0 - p]);
        let t = 0.9;
        for &(u, v) in &[(0.2, 0.8), (-0.5, 0.3), (1.0, -1.0), (0.0, 0.0)] {
            let mut exponent = -r.total_rate() * t;
            for (j, lambda) in r.iter() {
                for j1 in 0..=j {
                    let j2 = j - j1;
                    exponent += binomial(j as u64, j1 as u64)
                        * f64::powi(u * p, j1 as i32)
                        * f64::powi(v * (1.0 - p), j2 as i32)
                        * lambda
                        * t;
                }
            }
            assert!((type2_joint_pgf(&r, &s, &[u, v], t).unwrap() - exponent.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn ode_residual_examples() {
        let dt = 1e-4;
        let report = type2_marginal_ode_residual(&rv(&[2.0]), &spec(&[0.4, 0.6]), 1, 10, 1.0, dt).unwrap();
        assert!(report.max_residual < 1e-7);
        assert!(report.initial_condition_exact);
        let report = type2_marginal_ode_residual(&rv(&[1.0, 2.0]), &spec(&[0.3, 0.7]), 1, 15, 1.0, dt).unwrap();
        assert!(report.max_residual < 1e-6, "{}", report.max_residual);
        let at_zero = type2_marginal_ode_residual(&rv(&[1.0, 2.0]), &spec(&[0.3, 0.7]), 2, 15, 0.0, dt).unwrap();
        assert!(at_zero.max_residual < 1e-6);
    }

    #[test]
    fn split_identity_and_unit_sizes() {
        let r = rv(&[1.0, 1.0, 1.0]);
        let path = sample_path(&r, 4.0, SeedSpec::new(2, 0)).unwrap();
        assert_eq!(type2_split_path(&path, &spec(&[1.0]), SeedSpec::new(2, 0)), vec![path.clone()]);
        // unit-size paths route exactly like packet routing
        let unit = sample_path(&rv(&[3.0]), 4.0, SeedSpec::new(2, 1)).unwrap();
        let s = spec(&[0.25, 0.75]);
        let split = type2_split_path(&unit, &s, SeedSpec::new(2, 1));
        let thinned = crate::thinning::type1_thin_path(&unit, &s, SeedSpec::new(2, 1));
        assert_eq!(split, thinned);
    }

    #[test]
    fn size_rates_match_monte_carlo() {
        let r = rv(&[1.0, 2.0, 1.5]);
        let s = spec(&[0.3, 0.7]);
        let est = type2_size_rate_estimates(&r, &s, 1, 1.0, 20_000, 8).unwrap();
        for (u, e) in est.iter().enumerate() {
            let target = type2_component_rate(&r, &s, 1, u + 1).unwrap();
            assert!(e.within(target, SE_BAND), "size {}: {e:?} vs {target}", u + 1);
        }
    }

    #[test]
    fn monte_carlo_covariance_is_positive() {
        let r = rv(&[0.0, 1.0]);
        let s = spec(&[0.5, 0.5]);
        let report = type2_check(&r, &s, 1.0, 20_000, 4).unwrap();
        assert!(report.conserved);
        let pair = &report.pairs[0];
        assert!(pair.covariance.within(pair.expected, SE_BAND), "{pair:?}");
        assert!(pair.covariance.value > 0.0);
    }

    proptest! {
        #[test]
        fn binomial_rate_matches_multinomial(
            r in prop::collection::vec(0.01f64..3.0, 1..5),
            raw in prop::collection::vec(0.05f64..1.0, 2..4),
            pick in 0usize..3,
        ) {
            let total: f64 = raw.iter().sum();
            let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let last = p.len() - 1;
            p[last] = 1.0 - p[..last].iter().sum::<f64>();
            let s = SplitSpec::new(p).unwrap();
            let rates = rv(&r);
            let i = pick % s.len() + 1;
            for u in 1..=rates.max_jump() {
                let a = type2_component_rate(&rates, &s, i, u).unwrap();
                let b = multinomial_rate(&rates, &s, i, u);
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
            let sum: f64 = (1..=rates.max_jump()).map(|u| type2_component_rate(&rates, &s, i, u).unwrap()).sum();
            prop_assert!((sum - type2_event_rate(&rates, &s, i).unwrap()).abs() < 1e-12 * sum.max(1.0));
        }

        #[test]
        fn splitting_conserves_units(seed in 0u64..10_000, q in 1usize..5) {
            let rates = rv(&[0.5, 1.0, 1.0, 0.5]);
            let s = SplitSpec::new(vec![1.0 / q as f64; q]).unwrap_or_else(|_| spec(&[1.0]));
            let path = sample_path(&rates, 3.0, SeedSpec::new(seed, 0)).unwrap();
            let parts = type2_split_path(&path, &s, SeedSpec::new(seed, 0));
            prop_assert_eq!(superpose_paths(&parts).unwrap(), path);
        }
    }
}
