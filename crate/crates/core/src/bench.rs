//! Timing sweeps over the perf workload: vary one axis, keep the others
//! at their defaults, repeat, average.
//!
//! CSV schema, one header row then one row per run plus one `avg` row per
//! value: `value,rep,total_s,tasks_s,controller_s`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::controller::ControllerError;
use crate::executor::{ExecutorConfig, ExecutorError};
use crate::scenarios::perf::{self, PerfParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Agents,
    Messages,
    MsgSize,
    Workers,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::Agents, Axis::Messages, Axis::MsgSize, Axis::Workers];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Agents => "agents",
            Axis::Messages => "messages",
            Axis::MsgSize => "msgsize",
            Axis::Workers => "workers",
        }
    }

    /// Values swept when none are given.
    pub fn default_values(self) -> Vec<usize> {
        match self {
            Axis::Agents => vec![25, 50, 100, 200],
            Axis::Messages => vec![1, 10, 50, 100],
            Axis::MsgSize => vec![0, 10, 100, 1000],
            Axis::Workers => vec![1, 2, 4, 8],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown axis {0:?} (expected agents, messages, msgsize or workers)")]
pub struct UnknownAxis(pub String);

impl FromStr for Axis {
    type Err = UnknownAxis;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axis::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownAxis(s.to_owned()))
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Executor(#[from] ExecutorError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("no values to sweep")]
    NoValues,
}

/// Fixed settings of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchConfig {
    pub base: PerfParams,
    pub exec: ExecutorConfig,
    pub steps: u64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            base: PerfParams::default(),
            exec: ExecutorConfig::default(),
            steps: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub value: usize,
    /// `None` marks the average over reps.
    pub rep: Option<u32>,
    pub total_s: f64,
    pub tasks_s: f64,
    pub controller_s: f64,
}

/// Times one perf run. Building the controller is not timed.
pub fn time_run(axis: Axis, value: usize, cfg: &BenchConfig) -> Result<(f64, f64, f64), BenchError> {
    let mut p = cfg.base;
    let mut exec = cfg.exec;
    match axis {
        Axis::Agents => p.agents = value,
        Axis::Messages => p.msgs = value,
        Axis::MsgSize => p.msg_size = value,
        Axis::Workers => exec.workers = value,
    }
    let mut c = perf::build(p, exec)?;
    c.set_seed(cfg.seed);
    let m = c.run(cfg.steps)?;
    Ok((
        m.total_time.as_secs_f64(),
        m.agent_time.as_secs_f64(),
        m.controller_time.as_secs_f64(),
    ))
}

/// Runs every value `reps` times. Raw rows come first for each value,
/// followed by its average row.
pub fn bench_sweep(axis: Axis, values: &[usize], reps: u32, cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    if values.is_empty() {
        return Err(BenchError::NoValues);
    }
    let reps = reps.max(1);
    let mut rows = Vec::new();
    for &value in values {
        let mut sum = (0.0, 0.0, 0.0);
        for rep in 0..reps {
            let (t, a, c) = time_run(axis, value, cfg)?;
            sum = (sum.0 + t, sum.1 + a, sum.2 + c);
            rows.push(BenchRow {
                value,
                rep: Some(rep),
                total_s: t,
                tasks_s: a,
                controller_s: c,
            });
        }
        let n = f64::from(reps);
        rows.push(BenchRow {
            value,
            rep: None,
            total_s: sum.0 / n,
            tasks_s: sum.1 / n,
            controller_s: sum.2 / n,
        });
    }
    Ok(rows)
}

pub fn averages(rows: &[BenchRow]) -> impl Iterator<Item = &BenchRow> {
    rows.iter().filter(|r| r.rep.is_none())
}

/// Average total time for `value`, if present.
pub fn average_total(rows: &[BenchRow], value: usize) -> Option<f64> {
    averages(rows).find(|r| r.value == value).map(|r| r.total_s)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["value", "rep", "total_s", "tasks_s", "controller_s"])?;
    for r in rows {
        out.write_record([
            r.value.to_string(),
            r.rep.map_or_else(|| "avg".to_owned(), |n| n.to_string()),
            format!("{:.6}", r.total_s),
            format!("{:.6}", r.tasks_s),
            format!("{:.6}", r.controller_s),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Least-squares line through the points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// `None` with fewer than two points or no spread in `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs[..n].iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys[..n].iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs[..n]
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LinearFit { slope, intercept, r2 })
}

/// Fit of average total time against the swept value.
pub fn fit_averages(rows: &[BenchRow]) -> Option<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = averages(rows).map(|r| (r.value as f64, r.total_s)).unzip();
    linear_fit(&xs, &ys)
}

pub fn delay_from_secs(secs: f64) -> Option<Duration> {
    (secs > 0.0).then(|| Duration::from_secs_f64(secs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_arithmetic() {
        let cfg = BenchConfig {
            base: PerfParams { agents: 4, msgs: 2, msg_size: 0 },
            exec: ExecutorConfig::with_workers(2),
            steps: 1,
            seed: 1,
        };
        let rows = bench_sweep(Axis::Agents, &[10, 50], 2, &cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(averages(&rows).count(), 2);
        let raw: Vec<_> = rows.iter().filter(|r| r.value == 10 && r.rep.is_some()).collect();
        let mean = (raw[0].total_s + raw[1].total_s) / 2.0;
        assert!((average_total(&rows, 10).unwrap() - mean).abs() < 1e-12);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("value,rep,total_s,tasks_s,controller_s\n"));
        assert_eq!(text.lines().filter(|l| l.contains(",avg,")).count(), 2);
    }

    #[test]
    fn fit_of_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
        assert!(linear_fit(&[2.0, 2.0], &[1.0, 3.0]).is_none());
    }

    #[test]
    fn axis_names() {
        for a in Axis::ALL {
            assert_eq!(a.as_str().parse::<Axis>().unwrap(), a);
        }
        assert!("cores".parse::<Axis>().is_err());
    }
}
