//! Worked applications: a fishing fleet as a merged process and hotel
//! bookings as a split process.

use serde::{Deserialize, Serialize};

use crate::error::{check_time, GcpError, Result};
use crate::pmf::mean;
use crate::rates::RateVector;
use crate::routing::SplitSpec;
use crate::splitting::type2_component_rates;
use crate::superpose::{merge, MergeFamily};

/// Catch-rate profiles per fish type, with optional stock sizes `N_i` and net capacity `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FishingParams {
    pub species: Vec<RateVector>,
    #[serde(default)]
    pub stock: Option<Vec<u64>>,
    #[serde(default)]
    pub capacity: Option<usize>,
    pub t: f64,
    /// Number of catches `b` to condition on.
    #[serde(default)]
    pub catches: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FishingReport {
    pub merged_rates: RateVector,
    /// `E[𝓜(t)] = Σ_j j β_j t`.
    pub expected_fish: f64,
    /// `E[A_i(t)] = λ^{(i)} t`, catches of each type.
    pub expected_catches: Vec<f64>,
    /// `E[A_i(t) | 𝒜(t) = b] = b λ^{(i)} / Σ_j λ^{(j)}`, when `b` is given.
    pub conditional_catches: Option<Vec<f64>>,
}

pub fn fishing(params: &FishingParams) -> Result<FishingReport> {
    let t = check_time(params.t)?;
    let family = MergeFamily::new(params.species.clone())?;
    if let Some(stock) = &params.stock {
        if stock.len() != family.len() {
            return Err(GcpError::InvalidArgument(format!(
                "{} stock sizes given for {} fish types",
                stock.len(),
                family.len()
            )));
        }
        for (i, (rates, &n)) in family.components().iter().zip(stock).enumerate() {
            if rates.max_jump() as u64 > n {
                return Err(GcpError::InvalidArgument(format!(
                    "fish type {}: at most {n} fish exist but up to {} can be caught at once",
                    i + 1,
                    rates.max_jump()
                )));
            }
        }
    }
    if let Some(capacity) = params.capacity {
        if family.max_jump() > capacity {
            return Err(GcpError::InvalidArgument(format!(
                "a single catch of {} fish exceeds the net capacity {capacity}",
                family.max_jump()
            )));
        }
    }
    let merged_rates = merge(&family);
    let totals: Vec<f64> = family.components().iter().map(RateVector::total_rate).collect();
    let all: f64 = totals.iter().sum();
    Ok(FishingReport {
        expected_fish: mean(&merged_rates, t),
        expected_catches: totals.iter().map(|l| l * t).collect(),
        conditional_catches: params.catches.map(|b| totals.iter().map(|l| b as f64 * l / all).collect()),
        merged_rates,
    })
}

/// Booking-rate profile `λ_j`, room-type probabilities and optional limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotelParams {
    pub rates: RateVector,
    pub p: SplitSpec,
    /// Largest simultaneous booking `k_i` per room type; defaults to `k`.
    #[serde(default)]
    pub limits: Option<Vec<usize>>,
    /// Rooms `N_i` of each type.
    #[serde(default)]
    pub rooms: Option<Vec<u64>>,
    /// Total rooms `N`.
    #[serde(default)]
    pub total_rooms: Option<u64>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoomType {
    pub room_type: usize,
    pub rates: Vec<f64>,
    pub expected_bookings: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HotelReport {
    /// `E[M(t)] = Σ_j j λ_j t`.
    pub expected_bookings: f64,
    /// Each booking is for a single room type: rates `p_i λ_j` up to `k_i`.
    pub same_type: Vec<RoomType>,
    /// Rooms of one booking are typed independently: binomial-thinned rates up to `k_i`.
    pub mixed_types: Vec<RoomType>,
}

pub fn hotel(params: &HotelParams) -> Result<HotelReport> {
    let t = check_time(params.t)?;
    let k = params.rates.max_jump();
    let q = params.p.len();
    let limits = params.limits.clone().unwrap_or_else(|| vec![k; q]);
    if limits.len() != q {
        return Err(GcpError::InvalidArgument(format!("{} booking limits given for {q} room types", limits.len())));
    }
    if let Some(n) = params.total_rooms {
        if k as u64 > n {
            return Err(GcpError::InvalidArgument(format!(
                "up to {k} rooms can be booked at once but the hotel has {n}"
            )));
        }
    }
    if let Some(rooms) = &params.rooms {
        if rooms.len() != q {
            return Err(GcpError::InvalidArgument(format!("{} room counts given for {q} room types", rooms.len())));
        }
        for (i, (&ki, &ni)) in limits.iter().zip(rooms).enumerate() {
            if ki as u64 > ni {
                return Err(GcpError::InvalidArgument(format!(
                    "room type {}: booking limit {ki} exceeds the {ni} rooms available",
                    i + 1
                )));
            }
        }
        if let Some(n) = params.total_rooms {
            if rooms.iter().sum::<u64>() > n {
                return Err(GcpError::InvalidArgument(format!("room counts exceed the total of {n} rooms")));
            }
        }
    }
    for (i, &ki) in limits.iter().enumerate() {
        if ki == 0 || ki > k {
            return Err(GcpError::InvalidArgument(format!(
                "room type {}: booking limit {ki} must lie in 1..={k}",
                i + 1
            )));
        }
    }

    let room = |i: usize, rates: Vec<f64>| {
        let expected = rates.iter().enumerate().map(|(j, r)| (j + 1) as f64 * r).sum::<f64>() * t;
        RoomType { room_type: i, rates, expected_bookings: expected }
    };
    let mut same_type = Vec::with_capacity(q);
    let mut mixed_types = Vec::with_capacity(q);
    for i in 1..=q {
        let pi = params.p.probability(i)?;
        let ki = limits[i - 1];
        let case1: Vec<f64> = params.rates.as_slice()[..ki].iter().map(|l| pi * l).collect();
        let case2: Vec<f64> = match type2_component_rates(&params.rates, &params.p, i) {
            Ok(r) => r.as_slice()[..ki].to_vec(),
            Err(GcpError::ZeroRoutingProbability(_)) => vec![0.0; ki],
            Err(e) => return Err(e),
        };
        same_type.push(room(i, case1));
        mixed_types.push(room(i, case2));
    }
    Ok(HotelReport { expected_bookings: mean(&params.rates, t), same_type, mixed_types })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rv(r: &[f64]) -> RateVector {
        RateVector::new(r.to_vec()).unwrap()
    }

    fn hotel_params(rates: &[f64], p: &[f64]) -> HotelParams {
        HotelParams {
            rates: rv(rates),
            p: SplitSpec::new(p.to_vec()).unwrap(),
            limits: None,
            rooms: None,
            total_rooms: None,
            t: 1.0,
        }
    }

    #[test]
    fn fishing_expectations() {
        let params = FishingParams {
            species: vec![rv(&[1.0, 2.0]), rv(&[3.0, 4.0, 5.0])],
            stock: Some(vec![10, 20]),
            capacity: Some(5),
            t: 2.0,
            catches: Some(10),
        };
        let r = fishing(&params).unwrap();
        assert_eq!(r.merged_rates.as_slice(), &[4.0, 6.0, 5.0]);
        assert_eq!(r.expected_fish, 2.0 * (4.0 + 12.0 + 15.0));
        assert_eq!(r.expected_catches, vec![6.0, 24.0]);
        assert_eq!(r.conditional_catches.unwrap(), vec![2.0, 8.0]);
    }

    #[test]
    fn single_fish_type_gets_every_catch() {
        let params =
            FishingParams { species: vec![rv(&[0.3, 0.2])], stock: None, capacity: None, t: 1.0, catches: Some(7) };
        assert_eq!(fishing(&params).unwrap().conditional_catches.unwrap(), vec![7.0]);
    }

    #[test]
    fn fishing_validation() {
        let base = FishingParams {
            species: vec![rv(&[1.0, 2.0, 3.0])],
            stock: Some(vec![2]),
            capacity: None,
            t: 1.0,
            catches: None,
        };
        assert!(fishing(&base).is_err());
        let cap = FishingParams { stock: None, capacity: Some(2), ..base.clone() };
        assert!(fishing(&cap).is_err());
        let count = FishingParams { stock: Some(vec![5, 5]), ..base.clone() };
        assert!(fishing(&count).is_err());
        let empty = FishingParams { species: vec![], stock: None, ..base };
        assert!(fishing(&empty).is_err());
    }

    #[test]
    fn hotel_case_one_rates() {
        let r = hotel(&hotel_params(&[1.0, 1.0], &[0.5, 0.3, 0.2])).unwrap();
        assert_eq!(r.same_type[0].rates, vec![0.5, 0.5]);
        assert_eq!(r.expected_bookings, 3.0);
        let total: f64 = r.mixed_types.iter().map(|m| m.expected_bookings).sum();
        assert_relative_eq!(total, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn hotel_case_two_collapses_at_k_one() {
        let r = hotel(&hotel_params(&[2.0], &[0.5, 0.3, 0.2])).unwrap();
        for (a, b) in r.same_type.iter().zip(&r.mixed_types) {
            assert_eq!(a.rates, b.rates);
        }
    }

    #[test]
    fn hotel_limits() {
        let mut p = hotel_params(&[1.0, 2.0, 3.0], &[0.5, 0.5]);
        p.limits = Some(vec![1, 3]);
        let r = hotel(&p).unwrap();
        assert_eq!(r.same_type[0].rates, vec![0.5]);
        assert_eq!(r.mixed_types[1].rates.len(), 3);
        p.rooms = Some(vec![0, 10]);
        assert!(hotel(&p).is_err());
        p.rooms = None;
        p.total_rooms = Some(2);
        assert!(hotel(&p).is_err());
        p.total_rooms = None;
        p.limits = Some(vec![4, 1]);
        assert!(hotel(&p).is_err());
        p.limits = Some(vec![1]);
        assert!(hotel(&p).is_err());
    }
}
