//! Event-driven sampling of counting-process paths.
//!
//! A path is generated as a marked Poisson clock: gaps are `Exp(Λ)` and each
//! event draws its jump size `j` with probability `λ_j / Λ`.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{check_time, GcpError, Result};
use crate::parallel::replicate;
use crate::rates::RateVector;
use crate::stats::EmpiricalDistribution;
use crate::stream::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub size: u32,
}

/// A realized trajectory on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    horizon: f64,
    max_jump: usize,
    events: Vec<Event>,
}

impl SamplePath {
    /// Validates that times are strictly increasing inside `(0, horizon]` and
    /// sizes lie in `1..=max_jump`.
    pub fn new(horizon: f64, max_jump: usize, events: Vec<Event>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(GcpError::InvalidPath(format!("horizon must be positive, got {horizon}")));
        }
        if max_jump == 0 {
            return Err(GcpError::InvalidPath("maximum jump size must be at least 1".into()));
        }
        let mut last = 0.0;
        for (i, e) in events.iter().enumerate() {
            if !(e.time > last && e.time <= horizon) {
                return Err(GcpError::InvalidPath(format!(
                    "event {i} at time {} is not strictly after {last} within (0, {horizon}]",
                    e.time
                )));
            }
            if e.size == 0 || e.size as usize > max_jump {
                return Err(GcpError::InvalidPath(format!("event {i} has size {} outside 1..={max_jump}", e.size)));
            }
            last = e.time;
        }
        Ok(Self { horizon, max_jump, events })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn max_jump(&self) -> usize {
        self.max_jump
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Sum of all jump sizes, i.e. the count at the horizon.
    pub fn total(&self) -> u64 {
        self.events.iter().map(|e| u64::from(e.size)).sum()
    }

    /// `M(t)`: total size of events with time `≤ t`.
    pub fn count_at(&self, t: f64) -> Result<u64> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(GcpError::InvalidTime(t));
        }
        let end = self.events.partition_point(|e| e.time <= t);
        Ok(self.events[..end].iter().map(|e| u64::from(e.size)).sum())
    }

    /// Increments `M(g_{i+1}) - M(g_i)` over the half-open intervals `(g_i, g_{i+1}]`.
    /// An event exactly at a grid point counts towards the interval ending there.
    pub fn increments(&self, grid: &[f64]) -> Result<Vec<u64>> {
        if grid.iter().any(|g| g.is_nan()) || grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(GcpError::InvalidArgument("grid must be ascending".into()));
        }
        let counts = grid.iter().map(|&t| self.count_at(t)).collect::<Result<Vec<_>>>()?;
        Ok(counts.windows(2).map(|w| w[1] - w[0]).collect())
    }

    /// Per-size event counts: entry `j - 1` counts jumps of size `j`.
    pub fn size_counts(&self) -> Vec<u64> {
        let mut counts = vec![0; self.max_jump];
        for e in &self.events {
            counts[e.size as usize - 1] += 1;
        }
        counts
    }
}

impl fmt::Display for SamplePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "horizon={:?} k={}", self.horizon, self.max_jump)?;
        for e in &self.events {
            writeln!(f, "{:?},{}", e.time, e.size)?;
        }
        Ok(())
    }
}

impl FromStr for SamplePath {
    type Err = GcpError;

    fn from_str(s: &str) -> Result<Self> {
        let mut paths = parse_paths(s)?;
        match paths.len() {
            1 => Ok(paths.pop().unwrap()),
            n => Err(GcpError::PathParse { line: 1, reason: format!("expected one path, found {n}") }),
        }
    }
}

fn parse_header(line: &str, line_no: usize) -> Result<(f64, usize)> {
    let err = |reason: String| GcpError::PathParse { line: line_no, reason };
    let mut horizon = None;
    let mut k = None;
    for field in line.split_whitespace() {
        match field.split_once('=') {
            Some(("horizon", v)) => {
                horizon = Some(v.parse::<f64>().map_err(|e| err(format!("bad horizon {v:?}: {e}")))?)
            }
            Some(("k", v)) => k = Some(v.parse::<usize>().map_err(|e| err(format!("bad k {v:?}: {e}")))?),
            _ => return Err(err(format!("unexpected header field {field:?}"))),
        }
    }
    match (horizon, k) {
        (Some(h), Some(k)) => Ok((h, k)),
        _ => Err(err("header needs horizon=<real> k=<int>".into())),
    }
}

/// Parse one or more concatenated paths, each introduced by its own header line.
/// Blank lines are ignored.
pub fn parse_paths(s: &str) -> Result<Vec<SamplePath>> {
    let mut paths = Vec::new();
    let mut current: Option<(f64, usize, Vec<Event>, usize)> = None;
    let finish = |c: (f64, usize, Vec<Event>, usize)| {
        SamplePath::new(c.0, c.1, c.2).map_err(|e| GcpError::PathParse { line: c.3, reason: e.to_string() })
    };
    for (i, raw) in s.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("horizon=") {
            if let Some(c) = current.take() {
                paths.push(finish(c)?);
            }
            let (h, k) = parse_header(line, line_no)?;
            current = Some((h, k, Vec::new(), line_no));
            continue;
        }
        let Some(cur) = current.as_mut() else {
            return Err(GcpError::PathParse { line: line_no, reason: "event before header".into() });
        };
        let err = |reason: String| GcpError::PathParse { line: line_no, reason };
        let (t, size) = line.split_once(',').ok_or_else(|| err(format!("expected time,size in {line:?}")))?;
        let time = t.trim().parse::<f64>().map_err(|e| err(format!("bad time {t:?}: {e}")))?;
        let size = size.trim().parse::<u32>().map_err(|e| err(format!("bad size {size:?}: {e}")))?;
        cur.2.push(Event { time, size });
    }
    if let Some(c) = current.take() {
        paths.push(finish(c)?);
    }
    Ok(paths)
}

/// Draw one path of the process with the given rates on `(0, horizon]`.
pub fn sample_path(rates: &RateVector, horizon: f64, seed: SeedSpec) -> Result<SamplePath> {
    if check_time(horizon)? == 0.0 {
        return Err(GcpError::InvalidTime(horizon));
    }
    let mut rng = seed.rng();
    let events = draw_events(rates, horizon, &mut rng);
    Ok(SamplePath { horizon, max_jump: rates.max_jump(), events })
}

pub(crate) fn draw_events<R: Rng + ?Sized>(rates: &RateVector, horizon: f64, rng: &mut R) -> Vec<Event> {
    let gaps = Exp::new(rates.total_rate()).expect("total rate is positive");
    let marks = WeightedIndex::new(rates.as_slice()).expect("rates are non-negative with positive sum");
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        let next = t + gaps.sample(rng);
        if next > horizon {
            break;
        }
        let size = marks.sample(rng) as u32 + 1;
        // a gap lost to rounding would break strict ordering; such an event is dropped
        if next > t {
            events.push(Event { time: next, size });
            t = next;
        }
    }
    events
}

/// Paths `0..count`, path `i` drawn from stream `i` of `master_seed`.
pub fn sample_paths(rates: &RateVector, horizon: f64, master_seed: u64, count: usize) -> Result<Vec<SamplePath>> {
    check_time(horizon)?;
    replicate(count, |i| sample_path(rates, horizon, SeedSpec::new(master_seed, i))).into_iter().collect()
}

/// Histogram of `M(t)` over the given paths.
pub fn empirical_distribution(paths: &[SamplePath], t: f64) -> Result<EmpiricalDistribution> {
    let counts = paths.iter().map(|p| p.count_at(t)).collect::<Result<Vec<_>>>()?;
    EmpiricalDistribution::from_samples(counts)
}

/// Superpose paths sharing a horizon. Events at identical times merge into a
/// single event whose size is the sum, so the merged count equals the sum of counts.
pub fn superpose_paths(paths: &[SamplePath]) -> Result<SamplePath> {
    let first = paths.first().ok_or(GcpError::EmptyFamily)?;
    let horizon = first.horizon;
    if paths.iter().any(|p| p.horizon != horizon) {
        return Err(GcpError::InvalidArgument("superposed paths must share a horizon".into()));
    }
    let mut all: Vec<Event> = paths.iter().flat_map(|p| p.events.iter().copied()).collect();
    all.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut events: Vec<Event> = Vec::with_capacity(all.len());
    for e in all {
        match events.last_mut() {
            Some(last) if last.time == e.time => last.size += e.size,
            _ => events.push(e),
        }
    }
    let k_components = paths.iter().map(|p| p.max_jump).max().unwrap_or(1);
    let k_merged = events.iter().map(|e| e.size as usize).max().unwrap_or(1);
    SamplePath::new(horizon, k_components.max(k_merged), events)
}
