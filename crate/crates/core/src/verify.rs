//! Deterministic verification suites. Every analytic identity is compared
//! with an independent oracle and every distributional claim with a seeded
//! Monte Carlo experiment; each comparison becomes one [`CheckRecord`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Discrete, Poisson};

use crate::error::{GcpError, Result};
use crate::packets::{
    conditional_source_binomial, packet_correlation, packet_joint_pmf, packet_master_residual, packet_samples,
    PacketModel,
};
use crate::parallel::{replicate, replicate_sequential};
use crate::pmf::{mean, pgf, pmf_enumerated, pmf_recurrence, truncation_point, variance};
use crate::rates::RateVector;
use crate::routing::SplitSpec;
use crate::simulate::{empirical_distribution, sample_path, sample_paths};
use crate::splitting::{
    type2_check, type2_component_rate, type2_component_rates, type2_marginal_ode_residual, type2_size_rate_estimates,
};
use crate::stats::{
    bivariate_estimates, chi_square_gof, chi_square_independence, moment_estimates, tv_distance, EmpiricalDistribution,
    MIN_EXPECTED, SE_BAND, TV_TOLERANCE,
};
use crate::stream::SeedSpec;
use crate::superpose::{
    merge, merge_countable, merged_pmf_check, origin_probability, CountableMerge, FnFamily, MergeFamily,
};
use crate::thinning::{type1_component_rates, type1_independence_check, MIN_REPLICATIONS};

/// Smallest p-value a single goodness-of-fit or independence test may report.
pub const MIN_P_VALUE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Core,
    Merge,
    Packets,
    Split,
    Sim,
    All,
}

impl Suite {
    pub const PARTS: [Suite; 5] = [Suite::Core, Suite::Merge, Suite::Packets, Suite::Split, Suite::Sim];
}

impl FromStr for Suite {
    type Err = GcpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" => Ok(Self::Core),
            "merge" => Ok(Self::Merge),
            "packets" => Ok(Self::Packets),
            "split" => Ok(Self::Split),
            "sim" => Ok(Self::Sim),
            "all" => Ok(Self::All),
            _ => Err(GcpError::InvalidArgument(format!(
                "unknown suite {s:?}; expected core, merge, packets, split, sim or all"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Core => "core",
            Self::Merge => "merge",
            Self::Packets => "packets",
            Self::Split => "split",
            Self::Sim => "sim",
            Self::All => "all",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Replications for distributional checks.
    pub paths: usize,
    /// Replications for the Type II covariance check.
    pub covariance_paths: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 42, paths: 100_000, covariance_paths: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub statistic: f64,
    pub bound: Bound,
    pub band: f64,
    pub passed: bool,
}

impl CheckRecord {
    /// Passes when `statistic ≤ band`; NaN fails.
    pub fn at_most(name: impl Into<String>, statistic: f64, band: f64) -> Self {
        Self { name: name.into(), statistic, bound: Bound::AtMost, band, passed: statistic <= band }
    }

    /// Passes when `statistic ≥ band`; NaN fails.
    pub fn at_least(name: impl Into<String>, statistic: f64, band: f64) -> Self {
        Self { name: name.into(), statistic, bound: Bound::AtLeast, band, passed: statistic >= band }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::at_most(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "{} statistic={:e} band{op}{:e} {}",
            self.name,
            self.statistic,
            self.band,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub config: VerifyConfig,
    pub checks: Vec<CheckRecord>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let passed = self.checks.iter().filter(|c| c.passed).count();
        writeln!(
            f,
            "suite={} seed={} paths={} covariance_paths={} checks={} passed={}",
            self.suite,
            self.config.seed,
            self.config.paths,
            self.config.covariance_paths,
            self.checks.len(),
            passed
        )?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "result={}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

pub fn run(suite: Suite, config: &VerifyConfig) -> Result<VerifyReport> {
    let fewest = config.paths.min(config.covariance_paths);
    if fewest < MIN_REPLICATIONS {
        return Err(GcpError::TooFewSamples { need: MIN_REPLICATIONS, got: fewest });
    }
    let parts: Vec<Suite> = if suite == Suite::All { Suite::PARTS.to_vec() } else { vec![suite] };
    let mut checks = Vec::new();
    for part in parts {
        let mut found = match part {
            Suite::Core => core_checks(config)?,
            Suite::Merge => merge_checks(config)?,
            Suite::Packets => packet_checks(config)?,
            Suite::Split => split_checks(config)?,
            Suite::Sim => sim_checks(config)?,
            Suite::All => unreachable!(),
        };
        checks.append(&mut found);
    }
    Ok(VerifyReport { suite, config: config.clone(), checks })
}

/// Master seed for one experiment, derived from the run seed and a label.
fn experiment_seed(seed: u64, label: &str) -> u64 {
    let tag = label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3));
    SeedSpec::new(seed, 0).domain(tag).master_seed
}

fn rv(rates: &[f64]) -> RateVector {
    RateVector::new(rates.to_vec()).expect("fixed rates are valid")
}

fn random_rates<R: Rng>(rng: &mut R, max_k: usize) -> RateVector {
    let k = rng.random_range(1..=max_k);
    let rates: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..2.0)).collect();
    RateVector::new(rates).expect("positive rates")
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

fn core_checks(config: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();

    let unit = rv(&[1.0]);
    let mut worst: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        let poisson = Poisson::new(t).expect("positive mean");
        for n in 0..=50 {
            worst = worst.max((pmf_enumerated(&unit, n, t)? - poisson.pmf(n as u64)).abs());
        }
    }
    out.push(CheckRecord::at_most("core.poisson_reduction", worst, 1e-12));

    let mut rng = SeedSpec::new(experiment_seed(config.seed, "core.random_rates"), 0).rng();
    let vectors: Vec<RateVector> = (0..10).map(|_| random_rates(&mut rng, 5)).collect();
    let mut worst: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for rates in &vectors {
        for t in [0.1, 1.0, 5.0] {
            let rec = pmf_recurrence(rates, 30, t)?;
            for (n, r) in rec.iter().enumerate() {
                worst = worst.max((r - pmf_enumerated(rates, n, t)?).abs());
            }
            let n_max = truncation_point(rates, t, 1e-14);
            norm = norm.max((pmf_recurrence(rates, n_max, t)?.iter().sum::<f64>() - 1.0).abs());
        }
    }
    out.push(CheckRecord::at_most("core.recurrence_vs_enumeration", worst, 1e-10));
    out.push(CheckRecord::at_most("core.normalization", norm, 1e-10));

    let r = rv(&[1.0, 2.0]);
    out.push(CheckRecord::at_most("core.moments", max_abs([mean(&r, 2.0) - 10.0, variance(&r, 2.0) - 18.0]), 1e-12));

    let mut worst: f64 = 0.0;
    let mut slope: f64 = 0.0;
    for rates in &vectors {
        let t = 0.8;
        let p = pmf_recurrence(rates, truncation_point(rates, t, 1e-15), t)?;
        for u in [-1.0f64, -0.5, 0.0, 0.5, 0.9, 1.0] {
            let series: f64 = p.iter().enumerate().map(|(n, pn)| u.powi(n as i32) * pn).sum();
            worst = worst.max((series - pgf(rates, u, t)?).abs());
        }
        let h = 1e-6;
        // second-order one-sided difference; u may not exceed 1
        let derivative =
            (3.0 * pgf(rates, 1.0, t)? - 4.0 * pgf(rates, 1.0 - h, t)? + pgf(rates, 1.0 - 2.0 * h, t)?) / (2.0 * h);
        slope = slope.max((derivative - mean(rates, t)).abs() / mean(rates, t).max(1.0));
    }
    out.push(CheckRecord::at_most("core.pgf_series", worst, 1e-10));
    out.push(CheckRecord::at_most("core.pgf_mean", slope, 1e-5));
    Ok(out)
}

fn merge_checks(config: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let pair = MergeFamily::new(vec![rv(&[1.0, 2.0]), rv(&[3.0, 4.0, 5.0])])?;
    let beta = merge(&pair);
    out.push(CheckRecord::at_most(
        "merge.example",
        max_abs(beta.as_slice().iter().zip([4.0, 6.0, 5.0]).map(|(a, b)| a - b)),
        0.0,
    ));

    let mut rng = SeedSpec::new(experiment_seed(config.seed, "merge.random_families"), 0).rng();
    let mut conv: f64 = 0.0;
    let mut additivity: f64 = 0.0;
    for _ in 0..10 {
        let q = rng.random_range(1..=3);
        let family = MergeFamily::new((0..q).map(|_| random_rates(&mut rng, 3)).collect())?;
        for t in [0.3, 1.0] {
            for n in 0..=20 {
                let (a, b) = merged_pmf_check(&family, n, t)?;
                conv = conv.max((a - b).abs());
            }
            let sum: f64 = family.components().iter().map(|c| mean(c, t)).sum();
            additivity = additivity.max((sum - mean(&merge(&family), t)).abs());
        }
    }
    out.push(CheckRecord::at_most("merge.convolution", conv, 1e-10));
    out.push(CheckRecord::at_most("merge.mean_additivity", additivity, 1e-12));

    let k = 3;
    let geometric = FnFamily::new(k, move |i| vec![0.5f64.powi(i as i32); k], |_, n| Some(0.5f64.powi(n as i32)));
    let err = match merge_countable(&geometric, 1e-10)? {
        CountableMerge::Converged { rates, .. } => max_abs(rates.as_slice().iter().map(|b| b - 1.0)),
        CountableMerge::Divergent { .. } => f64::INFINITY,
    };
    out.push(CheckRecord::at_most("merge.countable_geometric", err, 1e-8));
    let weighted = FnFamily::new(
        k,
        move |i| (1..=k).map(|j| j as f64 * 3f64.powi(-(i as i32))).collect(),
        |j, n| Some(j as f64 * 3f64.powi(-(n as i32)) / 2.0),
    );
    let err = match merge_countable(&weighted, 1e-10)? {
        CountableMerge::Converged { rates, .. } => max_abs(rates.iter().map(|(j, b)| b - j as f64 / 2.0)),
        CountableMerge::Divergent { .. } => f64::INFINITY,
    };
    out.push(CheckRecord::at_most("merge.countable_weighted", err, 1e-8));
    let harmonic = FnFamily::new(1, |i| vec![1.0 / i as f64], |_, _| None).with_divergent([1]);
    out.push(CheckRecord::flag(
        "merge.countable_harmonic_divergent",
        merge_countable(&harmonic, 1e-8)? == CountableMerge::Divergent { jump: 1 },
    ));

    let expected = [[0.25, 1.0 / 3.0, 0.0], [0.75, 2.0 / 3.0, 1.0]];
    let mut worst: f64 = 0.0;
    for (s, row) in expected.iter().enumerate() {
        for (j, want) in row.iter().enumerate() {
            worst = worst.max((origin_probability(&pair, s + 1, j + 1)? - want).abs());
        }
    }
    out.push(CheckRecord::at_most("merge.origin_example", worst, 1e-15));
    let mut rows: f64 = 0.0;
    for j in 1..=3 {
        let s: f64 = (1..=2).map(|s| origin_probability(&pair, s, j)).sum::<Result<f64>>()?;
        rows = rows.max((s - 1.0).abs());
    }
    out.push(CheckRecord::at_most("merge.origin_row_sums", rows, 0.0));
    Ok(out)
}

/// Light family used for the packet ODE and Monte Carlo checks.
fn packet_model() -> Result<PacketModel> {
    PacketModel::new(MergeFamily::new(vec![rv(&[0.6, 0.4]), rv(&[0.5, 0.3, 0.2])])?, 1)
}

fn packet_checks(config: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let heavy = PacketModel::new(MergeFamily::new(vec![rv(&[1.0, 2.0]), rv(&[3.0, 4.0, 5.0])])?, 1)?;
    let t = 0.3;
    let merged = merge(heavy.family());
    let n_max = truncation_point(&merged, t, 1e-13);
    let rows = pmf_recurrence(&merged, n_max, t)?;
    let mut table = vec![Vec::new(); n_max + 1];
    for (n, row) in table.iter_mut().enumerate() {
        for a in 0..=n {
            row.push(packet_joint_pmf(&heavy, a, n, t)?);
        }
    }
    let row_err = max_abs(table.iter().zip(&rows).map(|(r, p)| r.iter().sum::<f64>() - p));
    out.push(CheckRecord::at_most("packets.marginal_merged", row_err, 1e-8));
    let poisson = Poisson::new(heavy.lambda_source() * t).expect("positive mean");
    let col_err = max_abs((0..=n_max).map(|a| {
        let col: f64 = (a..=n_max).map(|n| table[n][a]).sum();
        col - poisson.pmf(a as u64)
    }));
    out.push(CheckRecord::at_most("packets.marginal_poisson", col_err, 1e-8));

    let mut norm: f64 = 0.0;
    for b in 0..=100 {
        let s: f64 = (0..=b).map(|a| conditional_source_binomial(&heavy, a, b)).sum();
        norm = norm.max((s - 1.0).abs());
    }
    out.push(CheckRecord::at_most("packets.conditional_normalization", norm, 0.0));

    let model = packet_model()?;
    out.push(CheckRecord::at_most(
        "packets.master_equation",
        packet_master_residual(&model, 15, &[0.25, 0.5, 1.0], 1e-4)?,
        1e-6,
    ));

    let seed = experiment_seed(config.seed, "packets.monte_carlo");
    let mut correlations = Vec::new();
    for (step, t) in [1.0, 5.0].into_iter().enumerate() {
        let draws = packet_samples(&model, t, seed.wrapping_add(step as u64), config.paths)?;
        let xs: Vec<f64> = draws.iter().map(|d| d.0 as f64).collect();
        let ys: Vec<f64> = draws.iter().map(|d| d.1 as f64).collect();
        let est = bivariate_estimates(&xs, &ys)?;
        if step == 0 {
            out.push(CheckRecord::at_most("packets.mc_joint_cells", joint_cell_z(&model, &draws, t)?, SE_BAND));
            let target = crate::packets::packet_covariance(&model, t)?;
            out.push(CheckRecord::at_most("packets.mc_covariance", est.covariance.z_score(target).abs(), SE_BAND));
            out.push(CheckRecord::at_most(
                "packets.mc_correlation",
                est.correlation.z_score(packet_correlation(&model)).abs(),
                SE_BAND,
            ));
        }
        correlations.push(est.correlation);
    }
    let (c1, c5) = (correlations[0], correlations[1]);
    out.push(CheckRecord::at_most(
        "packets.correlation_constancy",
        (c1.value - c5.value).abs() / (c1.se.powi(2) + c5.se.powi(2)).sqrt(),
        3.0,
    ));
    Ok(out)
}

/// Largest standardized deviation of empirical joint-cell frequencies from
/// the joint pmf, over cells expecting at least 25 observations.
fn joint_cell_z(model: &PacketModel, draws: &[(u64, u64)], t: f64) -> Result<f64> {
    let n = draws.len() as f64;
    let n_max = draws.iter().map(|d| d.1).max().unwrap_or(0) as usize;
    let mut counts = vec![vec![0u64; n_max + 1]; n_max + 1];
    for &(a, m) in draws {
        counts[m as usize][a as usize] += 1;
    }
    let mut worst: f64 = 0.0;
    for (m, row) in counts.iter().enumerate() {
        for (a, &c) in row.iter().enumerate().take(m + 1) {
            let p = packet_joint_pmf(model, a, m, t)?;
            if n * p >= 25.0 {
                worst = worst.max((c as f64 - n * p).abs() / (n * p * (1.0 - p)).sqrt());
            }
        }
    }
    Ok(worst)
}

fn split_checks(config: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let rates = rv(&[1.0, 2.0]);
    let coin = SplitSpec::new(vec![0.5, 0.5])?;

    let additivity = max_abs(rates.iter().map(|(j, l)| {
        let parts: f64 =
            (1..=2).map(|i| type1_component_rates(&rates, &coin, i).map(|r| r.rate(j)).unwrap_or(f64::NAN)).sum();
        parts - l
    }));
    out.push(CheckRecord::at_most("split.type1_rate_additivity", additivity, 0.0));

    let report =
        type1_independence_check(&rates, &coin, 1.0, config.paths, experiment_seed(config.seed, "split.type1"))?;
    for c in &report.components {
        out.push(CheckRecord::at_most(format!("split.type1_tv_component{}", c.component), c.tv, TV_TOLERANCE));
    }
    for pair in &report.pairs {
        out.push(CheckRecord::at_most(
            format!("split.type1_covariance_{}_{}", pair.x, pair.y),
            pair.covariance.z_score(0.0).abs(),
            SE_BAND,
        ));
        out.push(CheckRecord::at_least(
            format!("split.type1_independence_{}_{}", pair.x, pair.y),
            pair.independence.map_or(f64::NAN, |g| g.p_value),
            MIN_P_VALUE,
        ));
    }
    out.push(CheckRecord::flag("split.type1_conservation", report.conserved));

    let spec = SplitSpec::new(vec![0.3, 0.7])?;
    let estimates = type2_size_rate_estimates(
        &rates,
        &spec,
        1,
        1.0,
        config.paths,
        experiment_seed(config.seed, "split.type2_sizes"),
    )?;
    let mut worst: f64 = 0.0;
    for (u, e) in estimates.iter().enumerate() {
        worst = worst.max(e.z_score(type2_component_rate(&rates, &spec, 1, u + 1)?).abs());
    }
    out.push(CheckRecord::at_most("split.type2_size_rates", worst, SE_BAND));

    let report = type2_check(&rates, &spec, 1.0, config.paths, experiment_seed(config.seed, "split.type2"))?;
    for c in &report.components {
        out.push(CheckRecord::at_most(format!("split.type2_tv_component{}", c.component), c.tv, TV_TOLERANCE));
    }
    out.push(CheckRecord::flag("split.type2_conservation", report.conserved));

    let pair_rates = rv(&[0.0, 1.0]);
    let report =
        type2_check(&pair_rates, &coin, 1.0, config.covariance_paths, experiment_seed(config.seed, "split.type2_cov"))?;
    let pair = &report.pairs[0];
    out.push(CheckRecord::at_most("split.type2_covariance", pair.covariance.z_score(pair.expected).abs(), SE_BAND));
    out.push(CheckRecord::at_least("split.type2_covariance_positive", pair.covariance.value, f64::MIN_POSITIVE));

    let ode = type2_marginal_ode_residual(&rates, &spec, 1, 15, 1.0, 1e-4)?;
    out.push(CheckRecord::at_most("split.type2_ode_residual", ode.max_residual, 1e-6));
    out.push(CheckRecord::flag("split.type2_ode_initial_condition", ode.initial_condition_exact));

    let poisson = rv(&[2.5]);
    let die = SplitSpec::new(vec![0.2, 0.3, 0.5])?;
    let diff = max_abs((1..=3).map(|i| {
        match (type1_component_rates(&poisson, &die, i), type2_component_rates(&poisson, &die, i)) {
            (Ok(a), Ok(b)) => a.rate(1) - b.rate(1),
            _ => f64::NAN,
        }
    }));
    out.push(CheckRecord::at_most("split.k1_reduction", diff, 0.0));
    Ok(out)
}

fn sim_checks(config: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let rates = rv(&[1.0, 2.0]);
    let seed = experiment_seed(config.seed, "sim.paths");
    let paths = sample_paths(&rates, 2.0, seed, config.paths)?;
    let at_one: Vec<u64> = paths.iter().map(|p| p.count_at(1.0)).collect::<Result<_>>()?;
    let xs: Vec<f64> = at_one.iter().map(|&v| v as f64).collect();
    let m = moment_estimates(&xs)?;
    out.push(CheckRecord::at_most("sim.mean", m.mean.z_score(mean(&rates, 1.0)).abs(), SE_BAND));
    out.push(CheckRecord::at_most("sim.variance", m.variance.z_score(variance(&rates, 1.0)).abs(), SE_BAND));

    let emp = empirical_distribution(&paths, 1.0)?;
    let n_max = truncation_point(&rates, 1.0, 1e-12).max(emp.max_value() as usize);
    let pmf = pmf_recurrence(&rates, n_max, 1.0)?;
    out.push(CheckRecord::at_most("sim.tv", tv_distance(&emp, &pmf), TV_TOLERANCE));
    out.push(CheckRecord::at_least("sim.gof", chi_square_gof(&emp, &pmf, MIN_EXPECTED)?.p_value, MIN_P_VALUE));

    let increments: Vec<Vec<u64>> = paths.iter().map(|p| p.increments(&[0.0, 1.0, 2.0])).collect::<Result<_>>()?;
    let later = EmpiricalDistribution::from_samples(increments.iter().map(|i| i[1]))?;
    out.push(CheckRecord::at_least(
        "sim.increment_stationarity",
        chi_square_gof(&later, &pmf, MIN_EXPECTED)?.p_value,
        MIN_P_VALUE,
    ));
    let first: Vec<f64> = increments.iter().map(|i| i[0] as f64).collect();
    let second: Vec<f64> = increments.iter().map(|i| i[1] as f64).collect();
    let corr = bivariate_estimates(&first, &second)?.correlation;
    out.push(CheckRecord::at_most("sim.increment_independence", corr.z_score(0.0).abs(), SE_BAND));
    let pairs: Vec<(u64, u64)> = increments.iter().map(|i| (i[0], i[1])).collect();
    out.push(CheckRecord::at_least(
        "sim.increment_independence_chi2",
        chi_square_independence(&pairs, MIN_EXPECTED)?.p_value,
        MIN_P_VALUE,
    ));

    let count = config.paths.min(2000);
    let draw = |i: u64| sample_path(&rates, 2.0, SeedSpec::new(seed, i));
    let parallel: Vec<_> = replicate(count, draw);
    let sequential: Vec<_> = replicate_sequential(count, draw);
    let same = parallel == sequential && parallel.iter().zip(&paths).all(|(p, q)| p.as_ref() == Ok(q));
    out.push(CheckRecord::flag("sim.schedule_independence", same));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig { seed: 7, paths: 100_000, covariance_paths: 100_000 }
    }

    #[test]
    fn suites_parse() {
        for s in ["core", "merge", "packets", "split", "sim", "all"] {
            assert_eq!(s.parse::<Suite>().unwrap().to_string(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn record_bounds() {
        assert!(CheckRecord::at_most("x", 1.0, 1.0).passed);
        assert!(!CheckRecord::at_most("x", f64::NAN, 1.0).passed);
        assert!(CheckRecord::at_least("x", 0.5, 0.1).passed);
        assert!(!CheckRecord::at_least("x", 0.05, 0.1).passed);
        assert_eq!(CheckRecord::at_most("x", 0.5, 1.0).to_string(), "x statistic=5e-1 band<=1e0 PASS");
    }

    #[test]
    fn analytic_suites_pass() {
        for suite in [Suite::Core, Suite::Merge] {
            let report = run(suite, &small()).unwrap();
            assert!(report.passed(), "{report}");
        }
    }

    #[test]
    fn monte_carlo_suites_pass() {
        for suite in [Suite::Packets, Suite::Split, Suite::Sim] {
            let report = run(suite, &small()).unwrap();
            assert!(report.passed(), "{report}");
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let config = VerifyConfig { seed: 3, paths: 10_000, covariance_paths: 10_000 };
        let a = run(Suite::Sim, &config).unwrap().to_string();
        let b = run(Suite::Sim, &config).unwrap().to_string();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_configs_rejected() {
        let config = VerifyConfig { seed: 3, paths: 10, covariance_paths: 5_000 };
        assert!(run(Suite::Core, &config).is_err());
    }
}
