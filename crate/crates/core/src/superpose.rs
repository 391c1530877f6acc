//! Superposition of independent counting processes.
//!
//! Components with different maximum jump sizes are embedded into a common
//! length by zero padding, so the merged rate of size-`j` jumps is the plain
//! sum `β_j = Σ_i λ_j^{(i)}`.

use serde::{Deserialize, Serialize};

use crate::error::{check_time, GcpError, Result};
use crate::pmf::pmf_recurrence;
use crate::rates::RateVector;

/// A finite, ordered family of independent components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<RateVector>", into = "Vec<RateVector>")]
pub struct MergeFamily {
    components: Vec<RateVector>,
}

impl MergeFamily {
    pub fn new(components: Vec<RateVector>) -> Result<Self> {
        if components.is_empty() {
            return Err(GcpError::EmptyFamily);
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[RateVector] {
        &self.components
    }

    /// Number of components `q`.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `k_max = max_i k_i`.
    pub fn max_jump(&self) -> usize {
        self.components.iter().map(RateVector::max_jump).max().unwrap_or(1)
    }

    /// Component `index`, 1-based.
    pub fn component(&self, index: usize) -> Result<&RateVector> {
        index
            .checked_sub(1)
            .and_then(|i| self.components.get(i))
            .ok_or(GcpError::ComponentOutOfRange { index, count: self.len() })
    }
}

impl TryFrom<Vec<RateVector>> for MergeFamily {
    type Error = GcpError;

    fn try_from(components: Vec<RateVector>) -> Result<Self> {
        Self::new(components)
    }
}

impl From<MergeFamily> for Vec<RateVector> {
    fn from(f: MergeFamily) -> Self {
        f.components
    }
}

/// Rates of the superposed process.
pub fn merge(family: &MergeFamily) -> RateVector {
    let k = family.max_jump();
    let mut beta = vec![0.0; k];
    for c in family.components() {
        for (b, r) in beta.iter_mut().zip(c.as_slice()) {
            *b += r;
        }
    }
    RateVector::new(beta).expect("a sum of valid rate vectors is valid")
}

/// `(pmf of merge(family) at n, convolution of the component pmfs at n)`.
pub fn merged_pmf_check(family: &MergeFamily, n: usize, t: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    let merged = pmf_recurrence(&merge(family), n, t)?[n];
    let mut conv = vec![1.0];
    for c in family.components() {
        let p = pmf_recurrence(c, n, t)?;
        let mut next = vec![0.0; n + 1];
        for (m, slot) in next.iter_mut().enumerate() {
            *slot = (0..=m.min(conv.len() - 1)).map(|i| conv[i] * p[m - i]).sum();
        }
        conv = next;
    }
    Ok((merged, conv[n]))
}

/// Probability that a size-`jump` event of the merged process came from component `source` (1-based).
pub fn origin_probability(family: &MergeFamily, source: usize, jump: usize) -> Result<f64> {
    let own = family.component(source)?.rate(jump);
    let k = family.max_jump();
    if jump == 0 || jump > k {
        return Err(GcpError::JumpOutOfRange { jump, max: k });
    }
    let total: f64 = family.components().iter().map(|c| c.rate(jump)).sum();
    if total == 0.0 {
        return Err(GcpError::UndefinedOrigin(jump));
    }
    Ok(own / total)
}

/// A countably infinite family of independent components with bounded jump sizes.
pub trait CountableFamily {
    /// Common bound on the jump sizes of every component, or `None` when
    /// jump sizes are unbounded (such families are rejected).
    fn max_jump(&self) -> Option<usize>;

    /// Rates of component `index ≥ 1`; entry `j - 1` is `λ_j^{(index)}`.
    fn component(&self, index: usize) -> Vec<f64>;

    /// An upper bound on `Σ_{i > n} λ_j^{(i)}`, non-increasing in `n`, or
    /// `None` when no bound is known.
    fn tail_bound(&self, jump: usize, n: usize) -> Option<f64>;

    /// Whether `Σ_i λ_j^{(i)}` is known to diverge.
    fn diverges(&self, _jump: usize) -> bool {
        false
    }
}

type RateFn = Box<dyn Fn(usize) -> Vec<f64> + Send + Sync>;
type TailFn = Box<dyn Fn(usize, usize) -> Option<f64> + Send + Sync>;

/// A [`CountableFamily`] assembled from closures.
pub struct FnFamily {
    max_jump: usize,
    rates: RateFn,
    tail: TailFn,
    divergent: Vec<usize>,
}

impl FnFamily {
    pub fn new(
        max_jump: usize,
        rates: impl Fn(usize) -> Vec<f64> + Send + Sync + 'static,
        tail: impl Fn(usize, usize) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { max_jump, rates: Box::new(rates), tail: Box::new(tail), divergent: Vec::new() }
    }

    /// Declare the sums for these jump sizes divergent.
    pub fn with_divergent(mut self, jumps: impl IntoIterator<Item = usize>) -> Self {
        self.divergent.extend(jumps);
        self
    }
}

impl CountableFamily for FnFamily {
    fn max_jump(&self) -> Option<usize> {
        Some(self.max_jump)
    }

    fn component(&self, index: usize) -> Vec<f64> {
        (self.rates)(index)
    }

    fn tail_bound(&self, jump: usize, n: usize) -> Option<f64> {
        (self.tail)(jump, n)
    }

    fn diverges(&self, jump: usize) -> bool {
        self.divergent.contains(&jump)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CountableMerge {
    /// Merged rates, each within `tol` of the infinite sum, and the number of components summed.
    Converged { rates: RateVector, terms: usize },
    /// The family declares the sum for this jump size divergent.
    Divergent { jump: usize },
}

/// Default number of components [`merge_countable`] may sum before giving up.
pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;

pub fn merge_countable(family: &dyn CountableFamily, tol: f64) -> Result<CountableMerge> {
    merge_countable_with_budget(family, tol, DEFAULT_TERM_BUDGET)
}

/// Sum components until the family's tail bound certifies every `β_j` to
/// within `tol`. Exhausting `budget` components is an error, distinct from a
/// declared divergence.
pub fn merge_countable_with_budget(family: &dyn CountableFamily, tol: f64, budget: usize) -> Result<CountableMerge> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(GcpError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let k = family
        .max_jump()
        .ok_or_else(|| GcpError::InvalidArgument("families with unbounded jump sizes are not supported".into()))?;
    if k == 0 {
        return Err(GcpError::InvalidArgument("maximum jump size must be at least 1".into()));
    }
    if let Some(jump) = (1..=k).find(|&j| family.diverges(j)) {
        return Ok(CountableMerge::Divergent { jump });
    }
    let certified = |n: usize| (1..=k).all(|j| family.tail_bound(j, n).is_some_and(|b| b < tol));
    let mut beta = vec![0.0; k];
    let mut n = 0;
    while !certified(n) {
        if n == budget {
            return Err(GcpError::ConvergenceBudgetExhausted { budget });
        }
        n += 1;
        let rates = family.component(n);
        let valid = RateVector::new(rates.clone())
            .map_err(|e| GcpError::InvalidComponent { index: n, reason: e.to_string() })?;
        if valid.max_jump() > k && rates[k..].iter().any(|&r| r > 0.0) {
            return Err(GcpError::InvalidComponent {
                index: n,
                reason: format!("jump sizes exceed the declared maximum {k}"),
            });
        }
        for (b, r) in beta.iter_mut().zip(&rates) {
            *b += r;
        }
    }
    Ok(CountableMerge::Converged { rates: RateVector::new(beta)?, terms: n })
}
