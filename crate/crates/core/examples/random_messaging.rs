// 100 agents messaging random peers; checks sent(t) = received(t + 1).

use goalsim::executor::ExecutorConfig;
use goalsim::scenarios::random_messaging::{self, conservation_violations};

pub fn run(steps: u64) -> Result<usize, Box<dyn std::error::Error>> {
    let mut c = random_messaging::build(random_messaging::AGENTS, ExecutorConfig::default())?;
    c.set_seed(2024);
    c.run(steps)?;
    let h = &c.environment().history;
    for (i, t) in h.iter().enumerate().take(5) {
        println!("step {}: sent {} received {}", i + 1, t.sent, t.received);
    }
    let bad = conservation_violations(h);
    println!("{} steps, {} violation(s)", h.len(), bad.len());
    Ok(bad.len())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(100)?;
    Ok(())
}
