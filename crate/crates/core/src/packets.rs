//! The packet process `(A_i(t), 𝓜(t))`: the number of jump packets contributed
//! by source `i` together with the merged count.

use serde::Serialize;
use statrs::function::factorial::{binomial, ln_binomial, ln_factorial};

use crate::error::{check_time, check_unit, GcpError, Result};
use crate::parallel::replicate;
use crate::partition::{for_each_composition, for_each_partition};
use crate::pmf::log_sum_exp;
use crate::simulate::sample_path;
use crate::stats::ode_residual;
use crate::stream::SeedSpec;
use crate::superpose::{merge, MergeFamily};

/// Above this packet count the conditional binomial is evaluated in log space.
const LOG_BINOMIAL_THRESHOLD: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketModel {
    family: MergeFamily,
    source: usize,
    /// Rates of the source, padded to `k_max`.
    own: Vec<f64>,
    /// `o_l = Σ_{k≠i} λ_l^{(k)}`, padded to `k_max`.
    others: Vec<f64>,
}

impl PacketModel {
    /// `source` is 1-based and must have a positive total rate.
    pub fn new(family: MergeFamily, source: usize) -> Result<Self> {
        let own_rates = family.component(source)?;
        let k = family.max_jump();
        let own = own_rates.padded(k);
        let others = (1..=k)
            .map(|l| {
                family.components().iter().enumerate().filter(|(c, _)| c + 1 != source).map(|(_, r)| r.rate(l)).sum()
            })
            .collect();
        Ok(Self { family, source, own, others })
    }

    pub fn family(&self) -> &MergeFamily {
        &self.family
    }

    pub fn source(&self) -> usize {
        self.source
    }

    /// `λ^{(i)} = Σ_j λ_j^{(i)}`.
    pub fn lambda_source(&self) -> f64 {
        self.own.iter().sum()
    }

    /// `Λ`, the total event rate of the merged process.
    pub fn lambda_total(&self) -> f64 {
        self.own.iter().sum::<f64>() + self.others.iter().sum::<f64>()
    }

    fn k_source(&self) -> usize {
        self.family.component(self.source).map_or(1, |c| c.max_jump())
    }
}

/// `P(A_i(t) = a, 𝓜(t) = n)` by enumerating the source packet profile
/// `r` (a weak composition of `a`) and the remaining packets `s` (a partition
/// of `n - Σ j r_j`). Terms are accumulated in log space.
pub fn packet_joint_pmf(model: &PacketModel, a: usize, n: usize, t: f64) -> Result<f64> {
    check_time(t)?;
    if a > n {
        return Err(GcpError::PacketsExceedTotal { packets: a, total: n });
    }
    if t == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let k_i = model.k_source();
    let k = model.others.len();
    let log_own: Vec<f64> = model.own.iter().map(|r| (r * t).ln()).collect();
    let log_others: Vec<f64> = model.others.iter().map(|r| (r * t).ln()).collect();

    let mut terms = Vec::new();
    for_each_composition(k_i, a, |r| {
        let mut lw = 0.0;
        let mut size = 0;
        for (j, &rj) in r.iter().enumerate() {
            if rj > 0 {
                lw += rj as f64 * log_own[j] - ln_factorial(rj as u64);
            }
            size += (j + 1) * rj;
        }
        if size > n || !lw.is_finite() {
            return;
        }
        for_each_partition(k, n - size, |s| {
            let mut ls = lw;
            for (l, &sl) in s.iter().enumerate() {
                if sl > 0 {
                    ls += sl as f64 * log_others[l] - ln_factorial(sl as u64);
                }
            }
            if ls.is_finite() {
                terms.push(ls);
            }
        });
    });
    if terms.is_empty() {
        return Ok(0.0);
    }
    Ok((log_sum_exp(&terms) - model.lambda_total() * t).exp())
}

/// `E[u^{A_i(t)} v^{𝓜(t)}] = exp((-Λ + Σ_j λ_j^{(i)} u v^j + Σ_l o_l v^l) t)`.
pub fn packet_joint_pgf(model: &PacketModel, u: f64, v: f64, t: f64) -> Result<f64> {
    check_unit("u", u)?;
    check_unit("v", v)?;
    check_time(t)?;
    let own: f64 = model.own.iter().enumerate().map(|(j, r)| r * u * v.powi(j as i32 + 1)).sum();
    let others: f64 = model.others.iter().enumerate().map(|(l, r)| r * v.powi(l as i32 + 1)).sum();
    Ok(((-model.lambda_total() + own + others) * t).exp())
}

/// `P(A_i = a | total packet count = b)`, binomial with success probability `λ^{(i)} / Σ_j λ^{(j)}`.
///
/// Each value is the gap between the conditional CDF and the floating-point
/// sum of the values before it, and the CDF is pinned to 1 at `a = b`, so
/// summing them in order over `a = 0..=b` gives exactly 1.0. Far upper-tail
/// values carry an absolute error of order 1e-16.
pub fn conditional_source_binomial(model: &PacketModel, a: usize, b: usize) -> f64 {
    if a > b {
        return 0.0;
    }
    conditional_values(model, b, a)[a]
}

/// The whole conditional law `P(A_i = a | b)` for `a = 0..=b`.
pub fn conditional_source_row(model: &PacketModel, b: usize) -> Vec<f64> {
    conditional_values(model, b, b)
}

fn conditional_values(model: &PacketModel, b: usize, upto: usize) -> Vec<f64> {
    let cdf = conditional_cdf(model, b, upto);
    let mut emitted = 0.0f64;
    cdf.iter()
        .map(|&c| {
            // for 0 ≤ s ≤ 1, s + fl(1 - s) rounds to exactly 1
            let v = (c - emitted).max(0.0);
            emitted += v;
            v
        })
        .collect()
}

/// Conditional CDF on `0..=upto`; entry `b` (if present) is exactly 1.
fn conditional_cdf(model: &PacketModel, b: usize, upto: usize) -> Vec<f64> {
    let own = model.lambda_source();
    let rest: f64 = model
        .family
        .components()
        .iter()
        .enumerate()
        .filter(|(c, _)| c + 1 != model.source)
        .map(|(_, r)| r.total_rate())
        .sum();
    let total = own + rest;
    let term = |a: usize| -> f64 {
        if b <= LOG_BINOMIAL_THRESHOLD {
            return binomial(b as u64, a as u64) * own.powi(a as i32) * rest.powi((b - a) as i32)
                / total.powi(b as i32);
        }
        let x_log = |x: f64, e: usize| if e == 0 { 0.0 } else { e as f64 * x.ln() };
        (ln_binomial(b as u64, a as u64) + x_log(own, a) + x_log(rest, b - a) - b as f64 * total.ln()).exp()
    };
    // compensated running sum, normalized so rounding in the terms cannot pile up in the last value
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    let mut cumulative = Vec::with_capacity(b + 1);
    for a in 0..=b {
        let x = term(a);
        let s = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - s) + x } else { (x - s) + sum };
        sum = s;
        cumulative.push(sum + carry);
    }
    let norm = cumulative[b];
    let mut cdf: Vec<f64> = cumulative[..=upto].iter().map(|c| (c / norm).min(1.0)).collect();
    if upto == b {
        cdf[b] = 1.0;
    }
    cdf
}

/// `Cov(A_i(t), 𝓜(t)) = Σ_j j λ_j^{(i)} t`.
pub fn packet_covariance(model: &PacketModel, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(weighted_sum(&model.own, 1) * t)
}

/// `Corr(A_i(t), 𝓜(t))`, which does not depend on `t`.
pub fn packet_correlation(model: &PacketModel) -> f64 {
    let beta = merge(&model.family);
    let second: f64 = beta.iter().map(|(j, b)| (j * j) as f64 * b).sum();
    weighted_sum(&model.own, 1) / (model.lambda_source().sqrt() * second.sqrt())
}

fn weighted_sum(rates: &[f64], power: i32) -> f64 {
    rates.iter().enumerate().map(|(j, r)| ((j + 1) as f64).powi(power) * r).sum()
}

/// Right side of the forward equation
/// `d/dt p(a,n) = -Λ p(a,n) + Σ_j λ_j^{(i)} p(a-1, n-j) + Σ_l o_l p(a, n-l)`.
pub fn packet_master_rhs(model: &PacketModel, a: usize, n: usize, t: f64) -> Result<f64> {
    let p = |a: usize, n: usize| if a > n { Ok(0.0) } else { packet_joint_pmf(model, a, n, t) };
    let mut rhs = -model.lambda_total() * p(a, n)?;
    if a >= 1 {
        for (j, r) in model.own.iter().enumerate() {
            if n > j && *r > 0.0 {
                rhs += r * p(a - 1, n - j - 1)?;
            }
        }
    }
    for (l, o) in model.others.iter().enumerate() {
        if n > l && *o > 0.0 {
            rhs += o * p(a, n - l - 1)?;
        }
    }
    Ok(rhs)
}

/// Largest gap between a finite-difference time derivative of the joint pmf
/// and [`packet_master_rhs`] over `(a, n)` with `a ≤ n ≤ n_max` at each time in `times`.
pub fn packet_master_residual(model: &PacketModel, n_max: usize, times: &[f64], dt: f64) -> Result<f64> {
    for &t in times {
        check_time(t)?;
    }
    let grid: Vec<((usize, usize), f64)> =
        times.iter().flat_map(|&t| (0..=n_max).flat_map(move |n| (0..=n).map(move |a| ((a, n), t)))).collect();
    Ok(ode_residual(
        |(a, n), t| packet_joint_pmf(model, a, n, t).unwrap_or(f64::NAN),
        |(a, n), t| packet_master_rhs(model, a, n, t).unwrap_or(f64::NAN),
        &grid,
        dt,
    ))
}

/// One draw of `(A_i(t), 𝓜(t))`: every component path is simulated on its own
/// substream and the merged count is the sum of component counts.
pub fn packet_sample(model: &PacketModel, t: f64, seed: SeedSpec) -> Result<(u64, u64)> {
    let mut packets = 0;
    let mut total = 0;
    for (c, rates) in model.family.components().iter().enumerate() {
        let path = sample_path(rates, t, seed.domain(c as u64 + 1))?;
        if c + 1 == model.source {
            packets = path.events().len() as u64;
        }
        total += path.total();
    }
    Ok((packets, total))
}

/// Replications `0..count` of [`packet_sample`] under `master_seed`.
pub fn packet_samples(model: &PacketModel, t: f64, master_seed: u64, count: usize) -> Result<Vec<(u64, u64)>> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(vec![(0, 0); count]);
    }
    replicate(count, |i| packet_sample(model, t, SeedSpec::new(master_seed, i))).into_iter().collect()
}
