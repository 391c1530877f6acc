use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use gcp_core::routing::SplitSpec;
use gcp_core::scenario::{FishingParams, HotelParams};
use gcp_core::verify::VerifyConfig;
use gcp_core::RateVector;
use serde::Deserialize;

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub rates: BTreeMap<String, String>,
    #[serde(default)]
    pub splits: BTreeMap<String, String>,
    pub verify: Option<VerifySection>,
    pub fishing: Option<FishingSection>,
    pub hotel: Option<HotelSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub paths: usize,
    pub covariance_paths: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FishingSection {
    pub species: Vec<String>,
    pub stock: Option<Vec<u64>>,
    pub capacity: Option<usize>,
    pub t: f64,
    pub catches: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotelSection {
    pub rates: String,
    pub p: String,
    pub limits: Option<Vec<usize>>,
    pub rooms: Option<Vec<u64>>,
    pub total_rooms: Option<u64>,
    pub t: f64,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Self::parse(DEFAULT_CONFIG).context("built-in configuration"),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("in {}", p.display()))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        for name in self.rates.keys() {
            self.rate_vector(name).with_context(|| format!("[rates] {name}"))?;
        }
        for name in self.splits.keys() {
            self.split(name).with_context(|| format!("[splits] {name}"))?;
        }
        if self.fishing.is_some() {
            gcp_core::scenario::fishing(&self.fishing_params()?).context("[fishing]")?;
        }
        if self.hotel.is_some() {
            gcp_core::scenario::hotel(&self.hotel_params()?).context("[hotel]")?;
        }
        Ok(())
    }

    /// A literal `1,2.5` or the name of an entry under `[rates]`.
    pub fn rate_vector(&self, spec: &str) -> Result<RateVector> {
        let text = self.rates.get(spec).map_or(spec, String::as_str);
        text.parse::<RateVector>().map_err(|e| anyhow::anyhow!("rates {text:?}: {e}"))
    }

    /// A literal `0.3,0.7` or the name of an entry under `[splits]`.
    pub fn split(&self, spec: &str) -> Result<SplitSpec> {
        let text = self.splits.get(spec).map_or(spec, String::as_str);
        text.parse::<SplitSpec>().map_err(|e| anyhow::anyhow!("routing probabilities {text:?}: {e}"))
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(DEFAULT_SEED)
    }

    pub fn verify_config(&self, seed: u64, paths: Option<usize>) -> VerifyConfig {
        let defaults = VerifyConfig::default();
        let section = self.verify.as_ref();
        VerifyConfig {
            seed,
            paths: paths.or(section.map(|v| v.paths)).unwrap_or(defaults.paths),
            covariance_paths: paths.or(section.map(|v| v.covariance_paths)).unwrap_or(defaults.covariance_paths),
        }
    }

    pub fn fishing_params(&self) -> Result<FishingParams> {
        let Some(f) = &self.fishing else { bail!("no [fishing] section in the configuration") };
        Ok(FishingParams {
            species: f.species.iter().map(|s| self.rate_vector(s)).collect::<Result<_>>()?,
            stock: f.stock.clone(),
            capacity: f.capacity,
            t: f.t,
            catches: f.catches,
        })
    }

    pub fn hotel_params(&self) -> Result<HotelParams> {
        let Some(h) = &self.hotel else { bail!("no [hotel] section in the configuration") };
        Ok(HotelParams {
            rates: self.rate_vector(&h.rates)?,
            p: self.split(&h.p)?,
            limits: h.limits.clone(),
            rooms: h.rooms.clone(),
            total_rooms: h.total_rooms,
            t: h.t,
        })
    }
}
