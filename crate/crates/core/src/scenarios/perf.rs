//! Synthetic workload for timing sweeps: every agent sends `n_msgs`
//! messages carrying `msg_size` zeros and bumps a step counter.

use crate::actions::{Action, ActionBlock, Outgoing};
use crate::agent::State;
use crate::behavior::{Behavior, HookError};
use crate::beliefs::{BeliefSet, BeliefValue};
use crate::controller::{AgentSpec, Controller};
use crate::ctx::StepCtx;
use crate::executor::{ExecutorConfig, ExecutorError};
use crate::htn::{HtnPlanner, Method, PrimitiveTask, TaskNetwork};
use crate::message::{Message, Performative};
use crate::registry::Registry;

use super::random_peer;

pub const BEHAVIOR: &str = "perf.agent";
const SEND: &str = "perf.send";
const TICK: &str = "perf.tick";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PerfParams {
    pub agents: usize,
    pub msgs: usize,
    pub msg_size: usize,
}

impl Default for PerfParams {
    fn default() -> Self {
        PerfParams {
            agents: 100,
            msgs: 10,
            msg_size: 0,
        }
    }
}

pub struct Worker;

impl Behavior<()> for Worker {
    fn process(&self, _ctx: &mut StepCtx<'_>, _msg: &Message, state: &mut State) -> Result<Option<Message>, HookError> {
        let b = &mut state.beliefs;
        b.set("counter", b.get_i64("counter").unwrap_or(0) + 1);
        Ok(None)
    }
}

pub fn registry() -> Registry<()> {
    let mut r = Registry::new();
    r.register_behavior(BEHAVIOR, Worker);
    r.actions
        .register_message(SEND, |ctx, _, dir, _, kw| {
            let n = kw.get("n").and_then(BeliefValue::as_i64).unwrap_or(0);
            let size = kw.get("size").and_then(BeliefValue::as_i64).unwrap_or(0) as usize;
            let mut out = Vec::new();
            for _ in 0..n {
                let Some(peer) = random_peer(ctx, dir) else { break };
                let data = BeliefSet::new().with("data", vec![BeliefValue::Int(0); size]);
                out.push(Outgoing::new(peer, Performative::Inform, data));
            }
            Ok(out)
        })
        .register_internal(TICK, |_, b, _, _| {
            b.set("step", b.get_i64("step").unwrap_or(0) + 1);
            Ok(())
        });
    r
}

pub fn planner(p: PerfParams) -> HtnPlanner {
    let mut n = TaskNetwork::new();
    let root = n.add_compound("Work");
    let block = ActionBlock::new()
        .then(Action::message(SEND).kwarg("n", p.msgs).kwarg("size", p.msg_size))
        .then(Action::internal(TICK));
    let t = n.add_primitive(PrimitiveTask::new("Work", block));
    n.add_method(root, Method::new("Work").subtask(t), None).expect("root exists");
    HtnPlanner::new(n, root)
}

pub fn build(p: PerfParams, exec: ExecutorConfig) -> Result<Controller<()>, ExecutorError> {
    let mut c = Controller::with_executor(registry(), (), exec)?;
    for i in 0..p.agents {
        c.generate_agent(
            AgentSpec::new(format!("worker {i}"))
                .behavior(BEHAVIOR)
                .beliefs(BeliefSet::new().with("step", 0).with("counter", 0))
                .planner(planner(p)),
        );
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_are_conserved() {
        let p = PerfParams { agents: 8, msgs: 3, msg_size: 4 };
        let mut c = build(p, ExecutorConfig::with_workers(2)).unwrap();
        c.run(4).unwrap();
        let ids: Vec<_> = c.ids().collect();
        let steps: i64 = ids.iter().map(|id| c.state(*id).unwrap().beliefs.get_i64("step").unwrap()).sum();
        let counted: i64 = ids.iter().map(|id| c.state(*id).unwrap().beliefs.get_i64("counter").unwrap()).sum();
        assert_eq!(steps, 8 * 4);
        // the last step's messages are still in the mailboxes
        let pending: usize = ids.iter().map(|id| c.mailbox(*id).unwrap().message_count()).sum();
        assert_eq!(counted as usize + pending, 8 * 3 * 4);
        assert_eq!(pending, 8 * 3);
    }
}
