//! State probabilities, generating function and moments of a single process.

use statrs::function::factorial::{factorial, ln_factorial};

use crate::error::{check_time, check_unit, Result};
use crate::partition::for_each_partition;
use crate::rates::RateVector;

/// Above this expected packet count `Λt` the pmf is accumulated in log space.
pub const LOG_SPACE_THRESHOLD: f64 = 50.0;

/// `p(n, t)` as the sum over `Ω(k, n)` of products of Poisson weights.
///
/// Cost grows with the number of partitions of `n`; this is the reference
/// route, [`pmf_recurrence`] is the fast one.
pub fn pmf_enumerated(rates: &RateVector, n: usize, t: f64) -> Result<f64> {
    check_time(t)?;
    let k = rates.max_jump();
    let scaled: Vec<f64> = rates.as_slice().iter().map(|r| r * t).collect();
    let decay = rates.total_rate() * t;

    if decay <= LOG_SPACE_THRESHOLD {
        let mut sum = 0.0;
        for_each_partition(k, n, |x| {
            let mut term = 1.0;
            for (&m, &count) in scaled.iter().zip(x) {
                if count > 0 {
                    term *= m.powi(count as i32) / factorial(count as u64);
                }
            }
            sum += term;
        });
        return Ok(sum * (-decay).exp());
    }

    let mut logs = Vec::new();
    for_each_partition(k, n, |x| {
        let mut log_term = -decay;
        for (&m, &count) in scaled.iter().zip(x) {
            if count == 0 {
                continue;
            }
            if m == 0.0 {
                return;
            }
            log_term += count as f64 * m.ln() - ln_factorial(count as u64);
        }
        logs.push(log_term);
    });
    Ok(log_sum_exp(&logs).exp())
}

/// `p(0..=n_max, t)` from `n·p(n) = t·Σ_j j·λ_j·p(n - j)`, starting at `p(0) = e^{-Λt}`.
pub fn pmf_recurrence(rates: &RateVector, n_max: usize, t: f64) -> Result<Vec<f64>> {
    check_time(t)?;
    let k = rates.max_jump();
    let decay = rates.total_rate() * t;
    let weights: Vec<f64> = rates.iter().map(|(j, r)| j as f64 * r).collect();

    if decay <= LOG_SPACE_THRESHOLD {
        let mut p = Vec::with_capacity(n_max + 1);
        p.push((-decay).exp());
        for n in 1..=n_max {
            let acc: f64 = (1..=k.min(n)).map(|j| weights[j - 1] * p[n - j]).sum();
            p.push(t * acc / n as f64);
        }
        return Ok(p);
    }

    // log space: every term is non-negative so log-sum-exp is stable
    let log_weights: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let log_t = t.ln();
    let mut lp = Vec::with_capacity(n_max + 1);
    lp.push(-decay);
    let mut terms = Vec::with_capacity(k);
    for n in 1..=n_max {
        terms.clear();
        terms.extend((1..=k.min(n)).filter(|&j| weights[j - 1] > 0.0).map(|j| log_weights[j - 1] + lp[n - j]));
        lp.push(log_t - (n as f64).ln() + log_sum_exp(&terms));
    }
    Ok(lp.into_iter().map(f64::exp).collect())
}

/// `G(u, t) = exp(-Σ λ_j (1 - u^j) t)` for `|u| ≤ 1`.
pub fn pgf(rates: &RateVector, u: f64, t: f64) -> Result<f64> {
    check_unit("u", u)?;
    check_time(t)?;
    Ok(pgf_unchecked(rates, u, t))
}

pub(crate) fn pgf_unchecked(rates: &RateVector, u: f64, t: f64) -> f64 {
    let exponent: f64 = rates.iter().map(|(j, r)| r * (1.0 - u.powi(j as i32))).sum();
    (-exponent * t).exp()
}

/// `E M(t) = Σ j·λ_j·t`.
pub fn mean(rates: &RateVector, t: f64) -> f64 {
    rates.iter().map(|(j, r)| j as f64 * r).sum::<f64>() * t
}

/// `Var M(t) = Σ j²·λ_j·t`.
pub fn variance(rates: &RateVector, t: f64) -> f64 {
    rates.iter().map(|(j, r)| (j * j) as f64 * r).sum::<f64>() * t
}

/// Chernoff bound on `P(M(t) ≥ n)`.
///
/// For `s > 0`, `P(M ≥ n) ≤ E[e^{sM}] e^{-sn} = exp(Σ λ_j t (e^{js} - 1) - sn)`.
/// The exponent is convex in `s`; its minimiser solves `Σ j λ_j t e^{js} = n`,
/// which lies in `(0, ln(n / mean)]` whenever `n` exceeds the mean.
pub fn tail_bound(rates: &RateVector, t: f64, n: usize) -> f64 {
    let m = mean(rates, t);
    let n = n as f64;
    if n <= 0.0 {
        return 1.0;
    }
    if m == 0.0 {
        return 0.0;
    }
    if n <= m {
        return 1.0;
    }
    let slope = |s: f64| -> f64 { rates.iter().map(|(j, r)| j as f64 * r * t * (j as f64 * s).exp()).sum::<f64>() - n };
    let (mut lo, mut hi) = (0.0_f64, (n / m).ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let exponent: f64 = rates.iter().map(|(j, r)| r * t * (j as f64 * s).exp_m1()).sum::<f64>() - s * n;
    exponent.exp().min(1.0)
}

/// Smallest `N` whose Chernoff bound certifies `P(M(t) > N) ≤ tol`.
pub fn truncation_point(rates: &RateVector, t: f64, tol: f64) -> usize {
    let start = mean(rates, t).ceil() as usize;
    let fits = |n: usize| tail_bound(rates, t, n + 1) <= tol;
    if fits(0) {
        return 0;
    }
    let mut lo = start.max(1);
    if fits(lo) {
        // the bound is 1 below the mean, so the answer is not smaller than `start`
        return lo;
    }
    let mut step = lo.max(8);
    let mut hi = lo + step;
    while !fits(hi) {
        lo = hi;
        step *= 2;
        hi = lo + step;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
