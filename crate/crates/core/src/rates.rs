use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GcpError, Result};

/// Jump-rate profile of a generalized counting process.
///
/// Entry `j - 1` is the rate of size-`j` jumps. Trailing zeros are allowed so
/// that a profile can be embedded into a larger maximum jump size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RateVector {
    rates: Vec<f64>,
}

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(GcpError::EmptyRates);
        }
        for (i, &value) in rates.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(GcpError::InvalidRate { jump: i + 1, value });
            }
        }
        let total: f64 = rates.iter().sum();
        if total.is_nan() || total <= 0.0 || !total.is_finite() {
            return Err(GcpError::ZeroTotalRate);
        }
        Ok(Self { rates })
    }

    /// The homogeneous Poisson process with the given rate.
    pub fn poisson(rate: f64) -> Result<Self> {
        Self::new(vec![rate])
    }

    /// Maximum jump amplitude `k`.
    pub fn max_jump(&self) -> usize {
        self.rates.len()
    }

    /// Rate of size-`jump` jumps; zero for sizes beyond `k` (and for size 0).
    pub fn rate(&self, jump: usize) -> f64 {
        if jump == 0 {
            return 0.0;
        }
        self.rates.get(jump - 1).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    /// Total event (packet) rate, the sum of all jump rates.
    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// `(jump size, rate)` pairs for sizes `1..=k`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rates.iter().enumerate().map(|(i, &r)| (i + 1, r))
    }

    /// Rates padded with zeros (or the original rates) up to size `k`.
    pub fn padded(&self, k: usize) -> Vec<f64> {
        (1..=k.max(self.max_jump())).map(|j| self.rate(j)).collect()
    }

    /// Multiply every rate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.rates.iter().map(|r| r * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for RateVector {
    type Error = GcpError;

    fn try_from(rates: Vec<f64>) -> Result<Self> {
        Self::new(rates)
    }
}

impl From<RateVector> for Vec<f64> {
    fn from(rates: RateVector) -> Self {
        rates.rates
    }
}

/// Parse a comma-separated list of reals, as used on the command line and in config files.
pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|field| {
            let field = field.trim();
            field.parse::<f64>().map_err(|_| GcpError::InvalidArgument(format!("`{field}` is not a real number")))
        })
        .collect()
}

impl FromStr for RateVector {
    type Err = GcpError;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_reals(s)?)
    }
}

impl fmt::Display for RateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rates.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_profiles() {
        assert_eq!(RateVector::new(vec![]), Err(GcpError::EmptyRates));
        assert_eq!(RateVector::new(vec![0.0, 0.0]), Err(GcpError::ZeroTotalRate));
        assert!(matches!(RateVector::new(vec![1.0, -2.0]), Err(GcpError::InvalidRate { jump: 2, .. })));
        assert!(RateVector::new(vec![f64::NAN]).is_err());
        assert!(RateVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn zero_entries_and_padding() {
        let r = RateVector::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(r.max_jump(), 3);
        assert_eq!(r.rate(2), 1.0);
        assert_eq!(r.rate(7), 0.0);
        assert_eq!(r.padded(5), vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.total_rate(), 1.0);
    }

    #[test]
    fn parses_and_prints() {
        let r: RateVector = " 1, 2.5 ,3".parse().unwrap();
        assert_eq!(r.as_slice(), &[1.0, 2.5, 3.0]);
        assert_eq!(r.to_string(), "1,2.5,3");
        assert!("1,x".parse::<RateVector>().is_err());
    }
}
