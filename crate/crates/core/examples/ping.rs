// Ping scenario with the block trace switched on. Shows the append-merged
// "Got Message" blocks.

use goalsim::executor::ExecutorConfig;
use goalsim::scenarios::ping;

pub fn run() -> Result<usize, Box<dyn std::error::Error>> {
    let mut c = ping::build(ExecutorConfig::with_workers(2))?;
    c.set_seed(11);
    c.record_blocks(true);
    c.keep_log(true);
    c.run(100)?;
    for r in c.block_trace().iter().take(12) {
        let origins: Vec<_> = r.block.origins.iter().map(|o| o.as_deref().unwrap_or("-")).collect();
        println!("step {:>2} {}: {:?} {:?}", r.step, r.agent, r.block.label, origins);
    }
    for (agent, state) in c.retired() {
        println!("{} retired with counter {:?}", agent.name, state.beliefs.get_i64("counter"));
    }
    println!("env counter {:?}", c.environment().get_i64("counter"));
    println!("{} live agent(s) left after {} steps", c.get_count(), c.step_count());
    Ok(c.get_count())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()?;
    Ok(())
}
