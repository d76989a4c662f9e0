//! Three agents, each adding one to its `counter` every step.

use crate::actions::{Action, ActionBlock};
use crate::beliefs::BeliefSet;
use crate::controller::{AgentSpec, Controller};
use crate::executor::{ExecutorConfig, ExecutorError};
use crate::registry::Registry;

pub const INCREMENT: &str = "incrementation.increment";
pub const AGENTS: usize = 3;

pub fn registry() -> Registry<()> {
    let mut r = Registry::new();
    r.actions.register_internal(INCREMENT, |_, beliefs, _, _| {
        let c = beliefs.get_i64("counter").unwrap_or(0);
        beliefs.set("counter", c + 1);
        Ok(())
    });
    r
}

pub fn build(exec: ExecutorConfig) -> Result<Controller<()>, ExecutorError> {
    let mut c = Controller::with_executor(registry(), (), exec)?;
    for i in 0..AGENTS {
        c.generate_agent(
            AgentSpec::new(format!("incrementer {i}"))
                .beliefs(BeliefSet::new().with("counter", 0))
                .default_block(ActionBlock::new().then(Action::internal(INCREMENT))),
        );
    }
    Ok(c)
}
