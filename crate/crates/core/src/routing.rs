//! Routing probabilities shared by both splitting schemes.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use serde::{Deserialize, Serialize};

use crate::error::{GcpError, Result};
use crate::rates::parse_reals;

/// Largest accepted deviation of `Σ p_i` from 1.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// How a jump of size `j` is divided among the components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    /// The whole packet goes to one component (Type I).
    Packet,
    /// Each of the `j` units goes to a component independently (Type II).
    Unit,
}

impl FromStr for SplitKind {
    type Err = GcpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "i" | "packet" | "type1" => Ok(Self::Packet),
            "2" | "ii" | "unit" | "type2" => Ok(Self::Unit),
            _ => Err(GcpError::InvalidArgument(format!("unknown split type {s:?}; use 1 or 2"))),
        }
    }
}

/// Routing probabilities `p_1, .., p_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SplitSpec {
    p: Vec<f64>,
}

impl SplitSpec {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let sum: f64 = p.iter().sum();
        if p.is_empty() || p.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(GcpError::InvalidSplit { sum });
        }
        Ok(Self { p })
    }

    /// The two-component coin `(p, 1 - p)`.
    pub fn coin(p: f64) -> Result<Self> {
        Self::new(vec![p, 1.0 - p])
    }

    /// Number of components `q`.
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// `p_i` for a 1-based component index.
    pub fn probability(&self, component: usize) -> Result<f64> {
        component
            .checked_sub(1)
            .and_then(|i| self.p.get(i).copied())
            .ok_or(GcpError::ComponentOutOfRange { index: component, count: self.len() })
    }

    /// Categorical sampler over 0-based component indices.
    pub(crate) fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.p).expect("probabilities are validated")
    }
}

impl TryFrom<Vec<f64>> for SplitSpec {
    type Error = GcpError;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<SplitSpec> for Vec<f64> {
    fn from(s: SplitSpec) -> Self {
        s.p
    }
}

/// Parses `0.3,0.7`. A single value `p` is read as the coin `(p, 1 - p)`.
impl FromStr for SplitSpec {
    type Err = GcpError;

    fn from_str(s: &str) -> Result<Self> {
        let p = parse_reals(s)?;
        if p.len() == 1 && p[0] != 1.0 {
            return Self::coin(p[0]);
        }
        Self::new(p)
    }
}

impl fmt::Display for SplitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.p.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}
