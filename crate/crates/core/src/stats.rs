//! Distances, goodness-of-fit tests and moment estimators shared by every check.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{GcpError, Result};

/// Width of the acceptance band in standard errors used by every Monte Carlo check.
/// A two-sided 4σ band has a false-alarm rate of about 6e-5 per check.
pub const SE_BAND: f64 = 4.0;

/// Largest acceptable total-variation distance between an empirical law
/// from 10^5 samples and its analytic counterpart.
pub const TV_TOLERANCE: f64 = 0.01;

/// Default minimum expected count per pooled chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;

/// Histogram of non-negative integer observations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmpiricalDistribution {
    counts: BTreeMap<u64, u64>,
    n: u64,
}

impl EmpiricalDistribution {
    pub fn from_samples(samples: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        let mut n = 0;
        for s in samples {
            *counts.entry(s).or_insert(0) += 1;
            n += 1;
        }
        if n == 0 {
            return Err(GcpError::TooFewSamples { need: 1, got: 0 });
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn sample_count(&self) -> u64 {
        self.n
    }

    pub fn count(&self, value: u64) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn frequency(&self, value: u64) -> f64 {
        self.count(value) as f64 / self.n as f64
    }

    pub fn max_value(&self) -> u64 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// Frequencies of `0..=n_max`.
    pub fn frequencies(&self, n_max: usize) -> Vec<f64> {
        (0..=n_max as u64).map(|v| self.frequency(v)).collect()
    }

    fn mass_above(&self, n_max: usize) -> f64 {
        let above: u64 = self.counts.range(n_max as u64 + 1..).map(|(_, c)| c).sum();
        above as f64 / self.n as f64
    }
}

/// Total-variation distance between an empirical law and an analytic pmf
/// given on `0..=n_max` (`pmf.len() == n_max + 1`).
///
/// The analytic mass beyond `n_max` is added in full and empirical mass beyond
/// `n_max` at half weight, which bounds the exact distance from above.
pub fn tv_distance(emp: &EmpiricalDistribution, pmf: &[f64]) -> f64 {
    let n_max = pmf.len().saturating_sub(1);
    let body: f64 = pmf.iter().enumerate().map(|(v, p)| (emp.frequency(v as u64) - p).abs()).sum();
    let analytic_tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    (0.5 * (body + emp.mass_above(n_max)) + analytic_tail).min(1.0)
}

/// Total-variation distance between two pmfs on a common support; the shorter
/// one is padded with zeros.
pub fn tv_between(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_tail(statistic: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
}

/// Pearson goodness-of-fit of `emp` against `pmf` on `0..=n_max`.
///
/// Adjacent values are pooled left to right until each bin expects at least
/// `min_expected` observations. The last bin absorbs everything above the
/// final cut, analytic tail mass included.
pub fn chi_square_gof(emp: &EmpiricalDistribution, pmf: &[f64], min_expected: f64) -> Result<GofResult> {
    let n = emp.sample_count() as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut exp_acc, mut obs_acc) = (0.0, 0.0);
    for (v, p) in pmf.iter().enumerate() {
        exp_acc += n * p;
        obs_acc += emp.count(v as u64) as f64;
        if exp_acc >= min_expected {
            bins.push((obs_acc, exp_acc));
            exp_acc = 0.0;
            obs_acc = 0.0;
        }
    }
    let n_max = pmf.len().saturating_sub(1);
    let analytic_tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    exp_acc += n * analytic_tail;
    obs_acc += emp.mass_above(n_max) * n;
    if exp_acc >= min_expected || bins.is_empty() {
        bins.push((obs_acc, exp_acc));
    } else if let Some(last) = bins.last_mut() {
        last.0 += obs_acc;
        last.1 += exp_acc;
    }
    if bins.len() < 2 {
        return Err(GcpError::TooFewBins(bins.len()));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    Ok(GofResult { statistic, dof, p_value: chi_square_tail(statistic, dof) })
}

/// Pearson test of independence for paired integer observations.
///
/// Values of each coordinate are pooled into consecutive groups holding at
/// least `sqrt(min_expected · n)` observations, which guarantees every cell of
/// the contingency table expects at least `min_expected`.
pub fn chi_square_independence(pairs: &[(u64, u64)], min_expected: f64) -> Result<GofResult> {
    let n = pairs.len();
    if n == 0 {
        return Err(GcpError::TooFewSamples { need: 1, got: 0 });
    }
    let threshold = (min_expected * n as f64).sqrt().ceil() as u64;
    let rows = pool_groups(pairs.iter().map(|p| p.0), threshold);
    let cols = pool_groups(pairs.iter().map(|p| p.1), threshold);
    let (r, c) = (group_count(&rows), group_count(&cols));
    if r < 2 || c < 2 {
        return Err(GcpError::TooFewBins(r.min(c)));
    }
    let mut table = vec![vec![0u64; c]; r];
    for &(x, y) in pairs {
        table[rows[&x]][cols[&y]] += 1;
    }
    let row_sums: Vec<f64> = table.iter().map(|row| row.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..c).map(|j| table.iter().map(|row| row[j]).sum::<u64>() as f64).collect();
    let total = n as f64;
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let e = row_sums[i] * col_sums[j] / total;
            statistic += (obs as f64 - e).powi(2) / e;
        }
    }
    let dof = (r - 1) * (c - 1);
    Ok(GofResult { statistic, dof, p_value: chi_square_tail(statistic, dof) })
}

fn pool_groups(values: impl Iterator<Item = u64>, threshold: u64) -> BTreeMap<u64, usize> {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0u64) += 1;
    }
    let mut group_of = BTreeMap::new();
    let (mut group, mut acc) = (0usize, 0u64);
    let mut open: Vec<u64> = Vec::new();
    for (&v, &cnt) in &counts {
        open.push(v);
        acc += cnt;
        if acc >= threshold {
            for w in open.drain(..) {
                group_of.insert(w, group);
            }
            group += 1;
            acc = 0;
        }
    }
    // leftovers join the last full group (or form the only group)
    let last = group.saturating_sub(1);
    for w in open {
        group_of.insert(w, last);
    }
    group_of
}

fn group_count(groups: &BTreeMap<u64, usize>) -> usize {
    groups.values().max().map_or(0, |g| g + 1)
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Distance from `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.se == 0.0 {
            return if self.value == target { 0.0 } else { f64::INFINITY };
        }
        (self.value - target) / self.se
    }

    /// `|value - target| ≤ bands · se`.
    pub fn within(&self, target: f64, bands: f64) -> bool {
        (self.value - target).abs() <= bands * self.se
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimates {
    pub mean: Estimate,
    pub variance: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BivariateEstimates {
    pub x: MomentEstimates,
    pub y: MomentEstimates,
    pub covariance: Estimate,
    pub correlation: Estimate,
}

/// Sample mean and unbiased variance with jackknife standard errors.
///
/// The variance SE needs at least three samples and is NaN with exactly two.
pub fn moment_estimates(samples: &[f64]) -> Result<MomentEstimates> {
    let n = samples.len();
    if n < 2 {
        return Err(GcpError::TooFewSamples { need: 2, got: n });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = samples.iter().map(|x| x - mean).collect();
    let s1: f64 = centered.iter().sum();
    let s2: f64 = centered.iter().map(|c| c * c).sum();
    let variance = (s2 - s1 * s1 / nf) / (nf - 1.0);
    // the jackknife SE of the mean reduces to s/√n
    let mean_se = (variance / nf).sqrt();
    let variance_se = if n < 3 {
        f64::NAN
    } else {
        jackknife_se(centered.iter().map(|&c| {
            let m = (s1 - c) / (nf - 1.0);
            (s2 - c * c - (nf - 1.0) * m * m) / (nf - 2.0)
        }))
    };
    Ok(MomentEstimates {
        mean: Estimate { value: mean, se: mean_se },
        variance: Estimate { value: variance, se: variance_se },
    })
}

/// Moments of both coordinates plus covariance and correlation, all with jackknife SEs.
pub fn bivariate_estimates(xs: &[f64], ys: &[f64]) -> Result<BivariateEstimates> {
    if xs.len() != ys.len() {
        return Err(GcpError::InvalidArgument(format!(
            "paired samples differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(GcpError::TooFewSamples { need: 3, got: n });
    }
    let nf = n as f64;
    let x = moment_estimates(xs)?;
    let y = moment_estimates(ys)?;
    let cx: Vec<f64> = xs.iter().map(|v| v - x.mean.value).collect();
    let cy: Vec<f64> = ys.iter().map(|v| v - y.mean.value).collect();
    let sx: f64 = cx.iter().sum();
    let sy: f64 = cy.iter().sum();
    let sxx: f64 = cx.iter().map(|c| c * c).sum();
    let syy: f64 = cy.iter().map(|c| c * c).sum();
    let sxy: f64 = cx.iter().zip(&cy).map(|(a, b)| a * b).sum();

    let cov = (sxy - sx * sy / nf) / (nf - 1.0);
    let corr = (sxy - sx * sy / nf) / ((sxx - sx * sx / nf) * (syy - sy * sy / nf)).sqrt();

    // leave-one-out sums; the common (n - 2) denominator cancels in the correlation
    let loo = |i: usize| {
        let (a, b) = (cx[i], cy[i]);
        let m = nf - 1.0;
        let (lx, ly) = (sx - a, sy - b);
        let cxy = sxy - a * b - lx * ly / m;
        let vx = sxx - a * a - lx * lx / m;
        let vy = syy - b * b - ly * ly / m;
        (cxy / (nf - 2.0), cxy / (vx * vy).sqrt())
    };
    let cov_se = jackknife_se((0..n).map(|i| loo(i).0));
    let corr_se = jackknife_se((0..n).map(|i| loo(i).1));
    Ok(BivariateEstimates {
        x,
        y,
        covariance: Estimate { value: cov, se: cov_se },
        correlation: Estimate { value: corr, se: corr_se },
    })
}

/// Sample covariance with its jackknife SE.
pub fn covariance_estimate(xs: &[f64], ys: &[f64]) -> Result<Estimate> {
    Ok(bivariate_estimates(xs, ys)?.covariance)
}

fn jackknife_se(leave_one_out: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = leave_one_out.collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    ((n - 1.0) / n * ss).sqrt()
}

/// Fraction of successes with its binomial standard error.
pub fn proportion(successes: u64, trials: u64) -> Estimate {
    let p = successes as f64 / trials as f64;
    Estimate { value: p, se: (p * (1.0 - p) / trials as f64).sqrt() }
}

/// Largest gap between a finite-difference time derivative of `value` and the
/// claimed right-hand side `rhs`, over the `(state, time)` grid.
///
/// Centered differences are used where `t ≥ dt`; closer to the origin a
/// second-order forward difference keeps the stencil inside `t ≥ 0`.
pub fn ode_residual<S: Copy>(
    value: impl Fn(S, f64) -> f64,
    rhs: impl Fn(S, f64) -> f64,
    grid: &[(S, f64)],
    dt: f64,
) -> f64 {
    assert!(dt > 0.0, "finite-difference step must be positive");
    grid.iter()
        .map(|&(state, t)| {
            let derivative = if t >= dt {
                (value(state, t + dt) - value(state, t - dt)) / (2.0 * dt)
            } else {
                (-3.0 * value(state, t) + 4.0 * value(state, t + dt) - value(state, t + 2.0 * dt)) / (2.0 * dt)
            };
            (derivative - rhs(state, t)).abs()
        })
        .fold(0.0, f64::max)
}
