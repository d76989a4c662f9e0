// The worker pool on its own: results in submission order, panics
// contained, and a barrier that waits for the slowest job.

use std::thread;
use std::time::{Duration, Instant};

use goalsim::executor::WorkerPool;

pub fn run() -> Result<(Vec<u64>, Duration), Box<dyn std::error::Error>> {
    let pool = WorkerPool::new(4)?;
    let jobs: Vec<Box<dyn FnOnce() -> u64 + Send>> = (0..8u64)
        .map(|i| {
            Box::new(move || {
                thread::sleep(Duration::from_millis(20 * (8 - i)));
                if i == 5 {
                    panic!("job {i} gives up");
                }
                i * i
            }) as Box<dyn FnOnce() -> u64 + Send>
        })
        .collect();
    let start = Instant::now();
    let results = pool.run_all(jobs)?;
    let elapsed = start.elapsed();
    let mut ok = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => {
                println!("job {i}: {v}");
                ok.push(v);
            }
            Err(_) => println!("job {i}: panicked"),
        }
    }
    println!("{} workers, barrier released after {elapsed:?}", pool.workers());
    Ok((ok, elapsed))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()?;
    Ok(())
}
