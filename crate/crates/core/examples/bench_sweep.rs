// A small agent-count sweep with a per-task delay, printed as CSV with a
// linear fit.

use std::time::Duration;

use goalsim::bench::{self, Axis, BenchConfig};
use goalsim::executor::ExecutorConfig;

pub fn run(values: &[usize]) -> Result<bench::LinearFit, Box<dyn std::error::Error>> {
    let mut exec = ExecutorConfig::with_workers(4);
    exec.task_delay = Some(Duration::from_millis(2));
    let cfg = BenchConfig {
        exec,
        steps: 2,
        ..BenchConfig::default()
    };
    let rows = bench::bench_sweep(Axis::Agents, values, 2, &cfg)?;
    bench::write_csv(&rows, std::io::stdout())?;
    let fit = bench::fit_averages(&rows).ok_or("not enough points")?;
    println!("slope {:.5} s/agent, R2 {:.3}", fit.slope, fit.r2);
    Ok(fit)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(&[8, 16, 32, 64])?;
    Ok(())
}
