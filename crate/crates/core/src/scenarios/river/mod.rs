//! Wastewater in a river basin: industries and towns discharge into
//! sewers, treatment plants clean the water and sell treatment capacity.

pub mod agents;
pub mod config;
pub mod environment;
pub mod water;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::controller::{AgentSpec, Controller};
use crate::executor::{ExecutorConfig, ExecutorError};

pub use agents::Connection;
pub use config::{
    treatment_price, ConfigError, CostPreset, HouseholdParams, IndustryGroup, IndustryParams, Penalty, Rejected,
    RiverConfig, Sector, WwtpParams,
};
pub use environment::{RiverEnv, StepRecord, StepStats};
pub use water::{mix, river_advance, sewer_advance, WaterMass, CLEANING_RATES, POLLUTANTS};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Executor(#[from] ExecutorError),
}

/// Industries with their placement resolved.
pub fn industries(cfg: &RiverConfig) -> Vec<IndustryParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    cfg.industries
        .iter()
        .flat_map(|g| (0..g.count).map(move |_| g))
        .map(|g| {
            let loc = g.location.unwrap_or_else(|| rng.gen_range(1..=cfg.sections));
            g.member(loc)
        })
        .collect()
}

pub fn build(cfg: &RiverConfig, exec: ExecutorConfig) -> Result<Controller<RiverEnv>, BuildError> {
    cfg.validate()?;
    let registry = agents::registry(cfg.wwtps.clone());
    let mut c = Controller::with_executor(registry, RiverEnv::new(cfg), exec)?;
    c.set_pre_step(Some(Box::new(|env: &mut RiverEnv, _| env.advance())));
    c.set_post_step(Some(Box::new(|env: &mut RiverEnv, step| env.record(step))));
    let plants: Vec<_> = cfg
        .wwtps
        .iter()
        .enumerate()
        .map(|(i, w)| {
            c.generate_agent(
                AgentSpec::new(w.name.clone())
                    .behavior(agents::WWTP)
                    .beliefs(agents::wwtp_beliefs(i))
                    .planner(agents::wwtp_planner())
                    .services(["wwtp"]),
            )
            .id
        })
        .collect();
    let link = |location: usize| {
        let plant = cfg.nearest_wwtp(location).expect("validated: a plant exists");
        Connection {
            plant,
            distance: cfg.wwtps[plant].location.abs_diff(location),
            wwtp: plants[plant],
        }
    };
    for h in &cfg.households {
        c.generate_agent(
            AgentSpec::new(h.name.clone())
                .behavior(agents::HOUSEHOLD)
                .beliefs(agents::household_beliefs(h, link(h.location)))
                .planner(agents::household_planner())
                .services(["household"]),
        );
    }
    for (i, p) in industries(cfg).iter().enumerate() {
        c.generate_agent(
            AgentSpec::new(format!("industry {i}"))
                .behavior(agents::INDUSTRY)
                .beliefs(agents::industry_beliefs(p, link(p.location)))
                .planner(agents::industry_planner())
                .services(["industry"]),
        );
    }
    Ok(c)
}

/// Per-step averages over industries.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub storage: Vec<f64>,
    pub discharge: Vec<f64>,
    pub profit: Vec<f64>,
}

impl Series {
    pub fn from_history(history: &[StepRecord]) -> Self {
        let avg = |f: fn(&StepStats) -> f64| -> Vec<f64> {
            history
                .iter()
                .map(|r| if r.stats.industries == 0 { 0.0 } else { f(&r.stats) / f64::from(r.stats.industries) })
                .collect()
        };
        Series {
            storage: avg(|s| s.storage),
            discharge: avg(|s| s.discharged),
            profit: avg(|s| s.profit),
        }
    }
}

/// Writes one row per step: averages over industries and the SS
/// concentration of every section.
pub fn write_csv<W: Write>(history: &[StepRecord], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    let sections = history.first().map_or(0, |r| r.ss.len());
    let mut header = vec!["step".to_owned(), "avg_storage".into(), "avg_discharge".into(), "avg_profit".into()];
    header.extend((1..=sections).map(|i| format!("ss_{i}")));
    out.write_record(&header)?;
    let s = Series::from_history(history);
    for (i, r) in history.iter().enumerate() {
        let mut row = vec![
            r.step.to_string(),
            format!("{:.6}", s.storage[i]),
            format!("{:.6}", s.discharge[i]),
            format!("{:.6}", s.profit[i]),
        ];
        row.extend(r.ss.iter().map(|v| format!("{v:.6}")));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// First step with a nonzero value, reading `series[0]` as step 1.
pub fn first_positive_step(series: &[f64]) -> Option<u64> {
    series.iter().position(|v| *v > 0.0).map(|i| i as u64 + 1)
}

/// Sample autocorrelation at `lag`. Zero for a constant series.
pub fn autocorrelation(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    if lag >= n {
        return 0.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = (0..n - lag).map(|i| (series[i] - mean) * (series[i + lag] - mean)).sum();
    cov / var
}

/// Lag in `1..=max_lag` with the highest autocorrelation, and its value.
pub fn dominant_period(series: &[f64], max_lag: usize) -> Option<(usize, f64)> {
    (1..=max_lag.min(series.len().saturating_sub(1)))
        .map(|l| (l, autocorrelation(series, l)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}
