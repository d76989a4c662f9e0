//! Shared world of the river-basin scenario. Only environment hooks and
//! external actions mutate it.

use serde::{Deserialize, Serialize};

use crate::environment::Environment;

use super::config::{RiverConfig, WwtpParams};
use super::water::{river_advance, sewer_advance, WaterMass};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub mass: WaterMass,
    pub remaining: u32,
}

/// Cumulative volumes through one plant, m³.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlantTotals {
    pub into_sewer: f64,
    pub arrived: f64,
    pub intake: f64,
    pub released: f64,
    pub bypassed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plant {
    /// River section, 1-based.
    pub location: usize,
    pub entrance: WaterMass,
    /// Index 0 is the segment next to the entrance.
    pub sewer: Vec<WaterMass>,
    pub batches: Vec<Batch>,
    /// Most recent treated discharge.
    pub last_exit: WaterMass,
    pub totals: PlantTotals,
}

impl Plant {
    pub fn treating(&self) -> f64 {
        self.batches.iter().map(|b| b.mass.volume).sum()
    }

    pub fn in_transit(&self) -> f64 {
        self.sewer.iter().map(|m| m.volume).sum()
    }
}

/// What one call to [`RiverEnv::treat`] moved.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TreatReport {
    pub released: WaterMass,
    pub intake: WaterMass,
    pub bypassed: WaterMass,
}

/// Industry figures summed over one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub industries: u32,
    pub storage: f64,
    pub discharged: f64,
    pub profit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub stats: StepStats,
    /// SS concentration of every river section after the step.
    pub ss: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiverEnv {
    pub river: Vec<WaterMass>,
    pub headstream: WaterMass,
    pub cleaning_rates: [f64; 5],
    pub plants: Vec<Plant>,
    pub current: StepStats,
    pub history: Vec<StepRecord>,
}

impl Environment for RiverEnv {
    fn snapshot(&self) -> Self {
        RiverEnv {
            history: Vec::new(),
            ..self.clone()
        }
    }
}

impl RiverEnv {
    pub fn new(cfg: &RiverConfig) -> Self {
        let plants = cfg
            .wwtps
            .iter()
            .map(|w| Plant {
                location: w.location,
                entrance: WaterMass::ZERO,
                sewer: vec![WaterMass::ZERO; cfg.sections],
                batches: Vec::new(),
                last_exit: WaterMass::ZERO,
                totals: PlantTotals::default(),
            })
            .collect();
        RiverEnv {
            river: vec![cfg.headstream; cfg.sections],
            headstream: cfg.headstream,
            cleaning_rates: cfg.cleaning_rates,
            plants,
            current: StepStats::default(),
            history: Vec::new(),
        }
    }

    /// River flow and sewer flow for one step. Sewer arrivals join the
    /// plant entrance.
    pub fn advance(&mut self) {
        river_advance(&mut self.river, self.headstream, &self.cleaning_rates);
        for p in &mut self.plants {
            let arrived = sewer_advance(&mut p.sewer);
            p.totals.arrived += arrived.volume;
            p.entrance.absorb(arrived);
        }
        self.current = StepStats::default();
    }

    /// Puts `mass` into the sewer of `plant`, `distance` segments upstream
    /// of the entrance.
    pub fn to_sewer(&mut self, plant: usize, distance: usize, mass: WaterMass) -> Option<()> {
        let p = self.plants.get_mut(plant)?;
        let i = distance.min(p.sewer.len().saturating_sub(1));
        p.totals.into_sewer += mass.volume;
        match p.sewer.get_mut(i) {
            Some(seg) => seg.absorb(mass),
            None => p.entrance.absorb(mass),
        }
        Some(())
    }

    fn discharge(&mut self, location: usize, mass: WaterMass) {
        if let Some(s) = self.river.get_mut(location - 1) {
            s.absorb(mass);
        }
    }

    /// One treatment cycle: finished batches are cleaned and released,
    /// the entrance feeds a new batch as far as capacity allows and any
    /// entrance overflow bypasses to the river.
    pub fn treat(&mut self, plant: usize, w: &WwtpParams) -> Option<TreatReport> {
        let p = self.plants.get_mut(plant)?;
        let mut report = TreatReport::default();
        for b in &mut p.batches {
            b.remaining = b.remaining.saturating_sub(1);
        }
        let (done, kept): (Vec<_>, Vec<_>) = p.batches.drain(..).partition(|b| b.remaining == 0);
        p.batches = kept;
        for b in done {
            report.released.absorb(b.mass.reduced(&w.removal_rates));
        }
        let room = (w.treatment_capacity - p.treating()).max(0.0);
        let intake = p.entrance.take(room);
        if !intake.is_empty() {
            p.batches.push(Batch {
                mass: intake,
                remaining: w.treatment_duration,
            });
        }
        report.intake = intake;
        let overflow = p.entrance.volume - w.entrance_capacity;
        if overflow > 0.0 {
            report.bypassed = p.entrance.take(overflow);
        }
        p.totals.intake += report.intake.volume;
        p.totals.released += report.released.volume;
        p.totals.bypassed += report.bypassed.volume;
        if !report.released.is_empty() {
            p.last_exit = report.released;
        }
        let loc = p.location;
        self.discharge(loc, report.released);
        self.discharge(loc, report.bypassed);
        Some(report)
    }

    pub fn record(&mut self, step: u64) {
        self.history.push(StepRecord {
            step,
            stats: self.current,
            ss: self.river.iter().map(|m| m.conc[0]).collect(),
        });
    }
}
