//! River-basin parameters, loadable from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::water::{Concentrations, WaterMass, CLEANING_RATES};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    Slaughterhouse,
    PaperMill,
    Plastics,
}

impl Sector {
    /// Wastewater volume per tonne produced (m³), as a range.
    pub fn volume_per_tn(self) -> (f64, f64) {
        match self {
            Sector::Slaughterhouse => (1.6, 6.0),
            Sector::PaperMill => (100.0, 250.0),
            Sector::Plastics => (2.04, 2.04),
        }
    }

    pub fn conc(self) -> Concentrations {
        match self {
            Sector::Slaughterhouse => [422.0, 450.0, 986.0, 59.0, 22.0],
            Sector::PaperMill => [300.0, 275.0, 580.0, 25.0, 5.0],
            Sector::Plastics => [350.0, 277.0, 1200.0, 50.0, 6.0],
        }
    }

    /// Tonnes per step; enough to refill an empty default tank in one step.
    pub fn max_production(self) -> f64 {
        match self {
            Sector::Slaughterhouse => 65.0,
            Sector::PaperMill => 1.0,
            Sector::Plastics => 50.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndustryParams {
    pub sector: Sector,
    /// Section number, 1-based.
    pub location: usize,
    pub volume_per_tn: (f64, f64),
    pub conc: Concentrations,
    pub storage_capacity: f64,
    pub max_production: f64,
    pub revenue_per_tn: f64,
}

/// A batch of industries of one sector. Without a location each member is
/// placed on a random section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndustryGroup {
    pub sector: Sector,
    pub count: usize,
    #[serde(default)]
    pub location: Option<usize>,
    #[serde(default = "default_storage")]
    pub storage_capacity: f64,
    #[serde(default)]
    pub max_production: Option<f64>,
    #[serde(default = "default_revenue")]
    pub revenue_per_tn: f64,
}

fn default_storage() -> f64 {
    100.0
}

fn default_revenue() -> f64 {
    500.0
}

impl IndustryGroup {
    pub fn new(sector: Sector, count: usize) -> Self {
        IndustryGroup {
            sector,
            count,
            location: None,
            storage_capacity: default_storage(),
            max_production: None,
            revenue_per_tn: default_revenue(),
        }
    }

    pub fn member(&self, location: usize) -> IndustryParams {
        IndustryParams {
            sector: self.sector,
            location,
            volume_per_tn: self.sector.volume_per_tn(),
            conc: self.sector.conc(),
            storage_capacity: self.storage_capacity,
            max_production: self.max_production.unwrap_or(self.sector.max_production()),
            revenue_per_tn: self.revenue_per_tn,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HouseholdParams {
    pub name: String,
    pub population: u64,
    pub location: usize,
    pub discharge: WaterMass,
}

impl HouseholdParams {
    pub fn coal_hill() -> Self {
        HouseholdParams {
            name: "Coal Hill".into(),
            population: 3584,
            location: 3,
            discharge: WaterMass::new(16.875, [100.0, 130.0, 260.0, 32.0, 5.0]),
        }
    }

    pub fn torchwood() -> Self {
        HouseholdParams {
            name: "Torchwood".into(),
            population: 27645,
            location: 36,
            discharge: WaterMass::new(130.162, [200.0, 200.0, 400.0, 36.0, 7.0]),
        }
    }
}

/// Unit treatment costs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostPreset {
    /// 50/75/75/120/150 €/kg.
    #[default]
    Standard,
    /// 200/150/150/300/300 €/kg.
    Premium,
}

impl CostPreset {
    pub fn pollutant_costs(self) -> [f64; 5] {
        match self {
            CostPreset::Standard => [50.0, 75.0, 75.0, 120.0, 150.0],
            CostPreset::Premium => [200.0, 150.0, 150.0, 300.0, 300.0],
        }
    }

    /// €/m³. Carried for completeness; the price depends on loads only.
    pub fn volume_cost(self) -> f64 {
        100.0
    }
}

/// Price multiplier G as a function of how full the plant is.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Penalty {
    Constant { g: f64 },
    /// `base + slope * fill`, fill in [0, 1].
    Linear { base: f64, slope: f64 },
}

impl Default for Penalty {
    fn default() -> Self {
        Penalty::Constant { g: 1.0 }
    }
}

impl Penalty {
    pub fn factor(self, fill: f64) -> f64 {
        match self {
            Penalty::Constant { g } => g,
            Penalty::Linear { base, slope } => base + slope * fill.clamp(0.0, 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WwtpParams {
    pub name: String,
    pub location: usize,
    pub entrance_capacity: f64,
    pub treatment_capacity: f64,
    pub treatment_duration: u32,
    pub operative_threshold: f64,
    #[serde(default)]
    pub costs: CostPreset,
    #[serde(default)]
    pub penalty: Penalty,
    #[serde(default = "default_removal")]
    pub removal_rates: [f64; 5],
}

fn default_removal() -> [f64; 5] {
    [0.90, 0.90, 0.85, 0.70, 0.70]
}

impl WwtpParams {
    pub fn new(name: impl Into<String>, location: usize) -> Self {
        WwtpParams {
            name: name.into(),
            location,
            entrance_capacity: 100.0,
            treatment_capacity: 100.0,
            treatment_duration: 5,
            operative_threshold: 0.1,
            costs: CostPreset::default(),
            penalty: Penalty::default(),
            removal_rates: default_removal(),
        }
    }

    pub fn total_capacity(&self) -> f64 {
        self.entrance_capacity + self.treatment_capacity
    }
}

/// Proposal refused: the plant has less free volume than requested.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
#[error("requested {requested} m³ but only {free} m³ free")]
pub struct Rejected {
    pub requested: f64,
    pub free: f64,
}

/// Price in € of treating `mass`, or a rejection when it does not fit.
pub fn treatment_price(w: &WwtpParams, mass: &WaterMass, free_volume: f64) -> Result<f64, Rejected> {
    if free_volume < mass.volume {
        return Err(Rejected {
            requested: mass.volume,
            free: free_volume,
        });
    }
    let fill = 1.0 - free_volume / w.total_capacity();
    let g = w.penalty.factor(fill);
    let q = w.costs.pollutant_costs();
    let cost: f64 = mass.loads_kg().iter().zip(q).map(|(kg, q)| kg * q).sum();
    Ok(g * cost)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiverConfig {
    pub sections: usize,
    /// Seeds industry placement.
    pub seed: u64,
    pub headstream: WaterMass,
    pub cleaning_rates: [f64; 5],
    #[serde(default)]
    pub industries: Vec<IndustryGroup>,
    #[serde(default)]
    pub households: Vec<HouseholdParams>,
    pub wwtps: Vec<WwtpParams>,
}

impl Default for RiverConfig {
    fn default() -> Self {
        RiverConfig {
            sections: 40,
            seed: 7,
            headstream: WaterMass::fresh(5.0),
            cleaning_rates: CLEANING_RATES,
            industries: vec![
                IndustryGroup::new(Sector::Slaughterhouse, 34),
                IndustryGroup::new(Sector::PaperMill, 33),
                IndustryGroup::new(Sector::Plastics, 33),
            ],
            households: Vec::new(),
            wwtps: vec![WwtpParams::new("WWTP 1", 3), WwtpParams::new("WWTP 2", 36)],
        }
    }
}

impl RiverConfig {
    /// Default setup plus the two towns.
    pub fn with_towns() -> Self {
        RiverConfig {
            households: vec![HouseholdParams::coal_hill(), HouseholdParams::torchwood()],
            ..RiverConfig::default()
        }
    }

    /// One slaughterhouse and one plant on a four-section river.
    pub fn small() -> Self {
        let mut g = IndustryGroup::new(Sector::Slaughterhouse, 1);
        g.location = Some(1);
        let mut w = WwtpParams::new("WWTP", 1);
        w.operative_threshold = 0.0;
        w.treatment_capacity = w.entrance_capacity * f64::from(w.treatment_duration);
        RiverConfig {
            sections: 4,
            industries: vec![g],
            wwtps: vec![w],
            ..RiverConfig::default()
        }
    }

    pub fn with_costs(mut self, costs: CostPreset) -> Self {
        for w in &mut self.wwtps {
            w.costs = costs;
        }
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RiverConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is plain data")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.sections == 0 {
            return bad("river needs at least one section".into());
        }
        let on_river = |loc: usize| (1..=self.sections).contains(&loc);
        if self.wwtps.is_empty() && (!self.industries.is_empty() || !self.households.is_empty()) {
            return bad("dischargers need a treatment plant".into());
        }
        for w in &self.wwtps {
            if !(0.0..=1.0).contains(&w.operative_threshold) {
                return bad(format!("{}: operative threshold outside [0, 1]", w.name));
            }
            if w.treatment_duration == 0 {
                return bad(format!("{}: treatment duration must be at least 1", w.name));
            }
            if !on_river(w.location) {
                return bad(format!("{}: location {} not on the river", w.name, w.location));
            }
        }
        for g in &self.industries {
            if g.location.is_some_and(|l| !on_river(l)) {
                return bad(format!("industry location {:?} not on the river", g.location));
            }
            if g.storage_capacity <= 0.0 {
                return bad("industry storage must be positive".into());
            }
        }
        for h in &self.households {
            if !on_river(h.location) {
                return bad(format!("{}: location {} not on the river", h.name, h.location));
            }
        }
        Ok(())
    }

    /// Index of the plant nearest to `location`; ties go to the first.
    pub fn nearest_wwtp(&self, location: usize) -> Option<usize> {
        (0..self.wwtps.len()).min_by_key(|&i| self.wwtps[i].location.abs_diff(location))
    }
}
