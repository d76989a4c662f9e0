//! Command-line driver: `run`, `bench` and `dump-state`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, Axis, BenchConfig};
use crate::codec;
use crate::controller::{Controller, RunMetrics};
use crate::environment::Environment;
use crate::executor::ExecutorConfig;
use crate::scenarios::perf::PerfParams;
use crate::scenarios::random_messaging::Counters;
use crate::scenarios::river::{self, RiverConfig};
use crate::scenarios::{incrementation, perf, ping, random_messaging, ScenarioName};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

type Failure = Box<dyn std::error::Error>;

#[derive(Debug, Parser)]
#[command(name = "goalsim", version, about = "Goal-oriented multi-agent simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a built-in scenario.
    Run(RunArgs),
    /// Time the perf workload while sweeping one parameter.
    Bench(BenchArgs),
    /// Decode a saved agent state and print it.
    DumpState {
        file: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// incrementation, ping, random-messaging, perf or river.
    pub scenario: ScenarioName,
    /// Steps to run; defaults depend on the scenario.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, env = "SIM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = positive)]
    pub workers: Option<usize>,
    /// Seconds slept in every step task.
    #[arg(long, default_value_t = 0.0)]
    pub task_delay: f64,
    /// Agent log lines go here.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub verbose: bool,
    /// Per-step results, free of timings.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-step timings.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// River-basin parameters (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Writes every agent's final state as `agent-<id>.state`.
    #[arg(long)]
    pub save_states: Option<PathBuf>,
    /// Agents in the perf and random-messaging scenarios.
    #[arg(long)]
    pub agents: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// agents, messages, msgsize or workers.
    pub axis: Axis,
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub task_delay: f64,
    #[arg(long, default_value_t = 5)]
    pub reps: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Workers when the axis is not `workers`.
    #[arg(long, value_parser = positive)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub steps: u64,
    #[arg(long, env = "SIM_SEED", default_value_t = 0)]
    pub seed: u64,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                eprint!("{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(&a, stdout),
        Command::Bench(a) => run_bench(&a, stdout),
        Command::DumpState { file } => dump_state(&file, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn exec_config(workers: Option<usize>, delay: f64) -> ExecutorConfig {
    let mut exec = workers.map_or_else(ExecutorConfig::default, ExecutorConfig::with_workers);
    exec.task_delay = bench::delay_from_secs(delay);
    exec
}

fn run(a: &RunArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let exec = exec_config(a.workers, a.task_delay);
    match a.scenario {
        ScenarioName::Incrementation => {
            let c = incrementation::build(exec)?;
            drive(c, a, 10, stdout, |c, w| steps_csv(c.metrics(), w))
        }
        ScenarioName::Ping => drive(ping::build(exec)?, a, 100, stdout, |c, w| steps_csv(c.metrics(), w)),
        ScenarioName::RandomMessaging => {
            let c = random_messaging::build(a.agents.unwrap_or(random_messaging::AGENTS), exec)?;
            drive(c, a, 100, stdout, |c, w| tally_csv(c.environment(), w))
        }
        ScenarioName::Perf => {
            let p = PerfParams {
                agents: a.agents.unwrap_or(PerfParams::default().agents),
                ..PerfParams::default()
            };
            drive(perf::build(p, exec)?, a, 3, stdout, |c, w| steps_csv(c.metrics(), w))
        }
        ScenarioName::River => {
            let cfg = match &a.config {
                Some(path) => RiverConfig::load(path)?,
                None => RiverConfig::default(),
            };
            let c = river::build(&cfg, exec)?;
            drive(c, a, 100, stdout, |c, w| river::write_csv(&c.environment().history, w))
        }
    }
}

fn drive<E: Environment>(
    mut c: Controller<E>,
    a: &RunArgs,
    default_steps: u64,
    stdout: &mut dyn Write,
    write_out: impl Fn(&Controller<E>, fs::File) -> Result<(), csv::Error>,
) -> Result<(), Failure> {
    c.set_seed(a.seed);
    c.set_verbose(a.verbose);
    if let Some(path) = &a.log {
        c.set_log_file(path)?;
    }
    c.set_print_sink(Box::new(|line| println!("{line}")));
    let steps = a.steps.unwrap_or(default_steps);
    let m = c.run(steps)?;
    writeln!(
        stdout,
        "{}: {} steps, {} live agents, {} retired, {:.3} s",
        a.scenario,
        m.steps.len(),
        c.get_count(),
        c.retired().count(),
        m.total_time.as_secs_f64()
    )?;
    if let Some(path) = &a.out {
        write_out(&c, fs::File::create(path)?)?;
    }
    if let Some(path) = &a.metrics {
        c.metrics().write_csv(fs::File::create(path)?)?;
    }
    if let Some(dir) = &a.save_states {
        save_states(&c, dir)?;
    }
    Ok(())
}

fn save_states<E: Environment>(c: &Controller<E>, dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let live = c.ids().filter_map(|id| c.state(id).map(|s| (id, s)));
    let retired = c.retired().map(|(a, s)| (a.id, s));
    for (id, state) in live.chain(retired) {
        fs::write(dir.join(format!("agent-{}.state", id.0)), codec::encode_state(state)?)?;
    }
    Ok(())
}

fn steps_csv(m: &RunMetrics, w: fs::File) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "live_agents", "msgs_sent", "delivered", "dropped"])?;
    for s in &m.steps {
        out.write_record([s.step, s.live_agents as u64, s.msgs_sent as u64, s.delivered as u64, s.dropped as u64].map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

fn tally_csv(env: &Counters, w: fs::File) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "sent", "received"])?;
    for (i, t) in env.history.iter().enumerate() {
        out.write_record([(i + 1) as u64, t.sent, t.received].map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

fn run_bench(a: &BenchArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let values = if a.values.is_empty() { a.axis.default_values() } else { a.values.clone() };
    let cfg = BenchConfig {
        exec: exec_config(a.workers, a.task_delay),
        steps: a.steps,
        seed: a.seed,
        ..BenchConfig::default()
    };
    let rows = bench::bench_sweep(a.axis, &values, a.reps, &cfg)?;
    writeln!(stdout, "{:>8} {:>10} {:>10} {:>12}", a.axis, "total_s", "tasks_s", "controller_s")?;
    for r in bench::averages(&rows) {
        writeln!(stdout, "{:>8} {:>10.4} {:>10.4} {:>12.4}", r.value, r.total_s, r.tasks_s, r.controller_s)?;
    }
    if let Some(f) = bench::fit_averages(&rows) {
        writeln!(stdout, "fit: total_s = {:.6} * {} + {:.6} (R2 {:.4})", f.slope, a.axis, f.intercept, f.r2)?;
    }
    match &a.out {
        Some(path) => bench::write_csv(&rows, fs::File::create(path)?)?,
        None => bench::write_csv(&rows, &mut *stdout)?,
    }
    Ok(())
}

fn dump_state(file: &Path, stdout: &mut dyn Write) -> Result<(), Failure> {
    let state = codec::decode_state(&fs::read(file)?)?;
    writeln!(stdout, "beliefs:")?;
    for (k, v) in state.beliefs.iter() {
        writeln!(stdout, "  {k} = {v}")?;
    }
    match &state.planner {
        None => writeln!(stdout, "planner: none")?,
        Some(p) => {
            writeln!(stdout, "planner: status {:?}, cursor {}/{}", p.status(), p.cursor(), p.plan().len())?;
            for (i, b) in p.plan().iter().enumerate() {
                let names: Vec<_> = b.iter().map(|a| a.name.as_str()).collect();
                writeln!(stdout, "  block {i} {:?}: {}", b.label.as_deref().unwrap_or(""), names.join(", "))?;
            }
        }
    }
    Ok(())
}
