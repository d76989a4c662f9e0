// Three agents with a one-action default block, no planner.

use goalsim::executor::ExecutorConfig;
use goalsim::scenarios::incrementation;

pub fn run() -> Result<Vec<i64>, Box<dyn std::error::Error>> {
    let mut c = incrementation::build(ExecutorConfig::with_workers(2))?;
    c.run(10)?;
    let ids: Vec<_> = c.ids().collect();
    let mut counters = Vec::new();
    for id in ids {
        let counter = c.state(id).and_then(|s| s.beliefs.get_i64("counter")).unwrap_or(-1);
        let mb = c.mailbox(id).expect("live agent");
        println!("{id}: counter {counter}, mailbox holds {} item(s)", mb.len());
        counters.push(counter);
    }
    Ok(counters)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()?;
    Ok(())
}
