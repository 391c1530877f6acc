use thiserror::Error;

/// Errors raised by the counting-process toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GcpError {
    #[error("a rate vector needs at least one jump size")]
    EmptyRates,

    #[error("rate for jump size {jump} is {value}; rates must be finite and non-negative")]
    InvalidRate { jump: usize, value: f64 },

    #[error("every rate is zero; at least one jump size needs a positive rate")]
    ZeroTotalRate,

    #[error("time must be finite and non-negative, got {0}")]
    InvalidTime(f64),

    #[error("{name} = {value} lies outside [-1, 1]")]
    OutsideUnitInterval { name: &'static str, value: f64 },

    #[error("merge family has no components")]
    EmptyFamily,

    #[error("component index {index} is out of range 1..={count}")]
    ComponentOutOfRange { index: usize, count: usize },

    #[error("jump size {jump} is out of range 1..={max}")]
    JumpOutOfRange { jump: usize, max: usize },

    #[error("no component produces jumps of size {0}; the origin probability is undefined")]
    UndefinedOrigin(usize),

    #[error("routing probabilities must be finite, non-negative and sum to 1 (got sum {sum})")]
    InvalidSplit { sum: f64 },

    #[error("routing probability of component {0} is zero")]
    ZeroRoutingProbability(usize),

    #[error("packet count {packets} exceeds the total count {total}")]
    PacketsExceedTotal { packets: usize, total: usize },

    #[error("could not certify convergence within {budget} terms")]
    ConvergenceBudgetExhausted { budget: usize },

    #[error("countable family produced an invalid component {index}: {reason}")]
    InvalidComponent { index: usize, reason: String },

    #[error("invalid sample path: {0}")]
    InvalidPath(String),

    #[error("line {line}: {reason}")]
    PathParse { line: usize, reason: String },

    #[error("chi-square test needs at least two pooled bins, got {0}")]
    TooFewBins(usize),

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GcpError>;

pub fn check_time(t: f64) -> Result<f64> {
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(GcpError::InvalidTime(t))
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value.abs() <= 1.0 {
        Ok(value)
    } else {
        Err(GcpError::OutsideUnitInterval { name, value })
    }
}
