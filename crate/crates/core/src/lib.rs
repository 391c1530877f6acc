//! Generalized counting processes: exact distributions, merging, packet
//! structure, random splitting and Monte Carlo verification.
//!
//! A generalized counting process `M(t)` jumps by `j ∈ {1, .., k}` at rate
//! `λ_j`. Every analytic result in this crate has a Monte Carlo counterpart
//! built on [`simulate`] and judged with [`stats`].

#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod error;
pub mod packets;
pub mod parallel;
pub mod partition;
pub mod pmf;
pub mod rates;
pub mod routing;
pub mod scenario;
pub mod simulate;
pub mod splitting;
pub mod stats;
pub mod stream;
pub mod superpose;
pub mod thinning;
pub mod verify;

pub use error::{GcpError, Result};
pub use rates::RateVector;
pub use simulate::{Event, SamplePath};
pub use stream::SeedSpec;
