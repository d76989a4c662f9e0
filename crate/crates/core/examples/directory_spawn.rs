// Yellow-pages lookup and run-time agent creation. A recruiter asks the
// controller for helpers, which register a service the recruiter then
// finds in the directory.

use goalsim::actions::{Action, ActionBlock, Outgoing};
use goalsim::beliefs::BeliefSet;
use goalsim::controller::{AgentSpec, Controller};
use goalsim::directory::directory_lookup;
use goalsim::executor::ExecutorConfig;
use goalsim::message::Performative;
use goalsim::registry::Registry;

pub fn run() -> Result<usize, Box<dyn std::error::Error>> {
    let mut r = Registry::new();
    r.actions.register_message("demo.recruit", |ctx, _, dir, _, _| {
        let helpers = directory_lookup(dir, "helping");
        ctx.log(format!("{} helper(s) listed", helpers.len()));
        if helpers.len() >= 2 {
            return Ok(vec![Outgoing::to_controller(Performative::Finished, BeliefSet::new())]);
        }
        let spec = BeliefSet::new()
            .with("name", format!("helper {}", ctx.step()))
            .with("services", vec!["helping"])
            .with("beliefs", BeliefSet::new().with("counter", 0))
            .with("default_block", "demo.help");
        Ok(vec![Outgoing::to_controller(Performative::Agent, spec)])
    });
    r.actions.register_internal("demo.count", |_, b, _, _| {
        b.set("counter", b.get_i64("counter").unwrap_or(0) + 1);
        Ok(())
    });
    r.register_block("demo.help", ActionBlock::new().then(Action::internal("demo.count")));

    let mut c = Controller::with_executor(r, (), ExecutorConfig::with_workers(2))?;
    c.keep_log(true);
    c.generate_agent(
        AgentSpec::new("recruiter")
            .services(["recruiting"])
            .default_block(ActionBlock::new().then(Action::message("demo.recruit"))),
    );
    c.run(5)?;
    for line in c.log_lines() {
        println!("{line}");
    }
    for e in c.directory().entries() {
        println!("{} {:?} offers {:?}", e.id, e.name, e.services);
    }
    Ok(c.directory().lookup("helping").len())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()?;
    Ok(())
}
