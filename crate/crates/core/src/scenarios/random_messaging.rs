//! Agents sending a random number of messages to random peers. The
//! environment tallies what was sent and received in each step, so the
//! tally for step `t` can be compared with the one for `t + 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::actions::{Action, ActionBlock, ActionError, Outgoing};
use crate::agent::State;
use crate::behavior::{Behavior, HookError};
use crate::beliefs::BeliefSet;
use crate::controller::{AgentSpec, Controller};
use crate::ctx::StepCtx;
use crate::environment::Environment;
use crate::executor::{ExecutorConfig, ExecutorError};
use crate::htn::{HtnPlanner, Method, PrimitiveTask, TaskNetwork};
use crate::message::{Message, Performative};
use crate::registry::Registry;

use super::random_peer;

pub const BEHAVIOR: &str = "random_messaging.agent";
pub const AGENTS: usize = 100;
pub const MIN_MSGS: i64 = 5;
pub const MAX_MSGS: i64 = 20;

const DECIDE: &str = "random_messaging.decide";
const SEND: &str = "random_messaging.send";
const WRITE: &str = "random_messaging.write";
const CLEANUP: &str = "random_messaging.cleanup";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub sent: u64,
    pub received: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub current: Tally,
    /// One entry per finished step, starting with step 1.
    pub history: Vec<Tally>,
}

impl Environment for Counters {}

pub struct Messenger;

impl Behavior<Counters> for Messenger {
    fn process(&self, _ctx: &mut StepCtx<'_>, _msg: &Message, state: &mut State) -> Result<Option<Message>, HookError> {
        let b = &mut state.beliefs;
        b.set("received", b.get_i64("received").unwrap_or(0) + 1);
        Ok(None)
    }
}

fn count(req: &crate::actions::ExternalActionRequest, key: &str) -> Result<u64, ActionError> {
    u64::try_from(req.kwarg_i64(key)?).map_err(|_| ActionError::failed(format!("negative {key}")))
}

pub fn registry() -> Registry<Counters> {
    let mut r = Registry::new();
    r.register_behavior(BEHAVIOR, Messenger);
    r.actions
        .register_internal(DECIDE, |ctx, b, _, _| {
            b.set("to_send", ctx.rng().gen_range(MIN_MSGS..=MAX_MSGS));
            Ok(())
        })
        .register_message(SEND, |ctx, b, dir, _, _| {
            let n = b.get_i64("to_send").unwrap_or(0);
            (0..n)
                .map(|_| {
                    let peer = random_peer(ctx, dir).ok_or_else(|| ActionError::failed("no peers"))?;
                    Ok(Outgoing::new(peer, Performative::Inform, BeliefSet::new()))
                })
                .collect()
        })
        .register_internal(CLEANUP, |_, b, _, _| {
            b.set("to_send", 0);
            b.set("received", 0);
            Ok(())
        });
    r.register_external(WRITE, |env: &mut Counters, req| {
        env.current.sent += count(req, "to_send")?;
        env.current.received += count(req, "received")?;
        Ok(())
    });
    r
}

pub fn planner() -> HtnPlanner {
    let mut n = TaskNetwork::new();
    let root = n.add_compound("Communicate");
    let mut block = ActionBlock::new()
        .then(Action::internal(DECIDE).named("Decide"))
        .then(Action::message(SEND).named("Send"));
    block
        .push(Action::external(WRITE).named("Write").forward(["to_send", "received"]).expect("external"))
        .expect("valid action");
    block.push(Action::internal(CLEANUP).named("Cleanup")).expect("valid action");
    let p = n.add_primitive(PrimitiveTask::new("Exchange", block));
    n.add_method(root, Method::new("Exchange").subtask(p), None).expect("root exists");
    HtnPlanner::new(n, root)
}

pub fn build(agents: usize, exec: ExecutorConfig) -> Result<Controller<Counters>, ExecutorError> {
    let mut c = Controller::with_executor(registry(), Counters::default(), exec)?;
    c.set_pre_step(Some(Box::new(|env: &mut Counters, _| env.current = Tally::default())));
    c.set_post_step(Some(Box::new(|env: &mut Counters, _| {
        let t = env.current;
        env.history.push(t);
    })));
    for i in 0..agents {
        c.generate_agent(
            AgentSpec::new(format!("messenger {i}"))
                .behavior(BEHAVIOR)
                .beliefs(BeliefSet::new().with("to_send", 0).with("received", 0))
                .planner(planner()),
        );
    }
    Ok(c)
}

/// Steps `t` (1-based) where `sent(t) != received(t + 1)`.
pub fn conservation_violations(history: &[Tally]) -> Vec<usize> {
    history
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].sent != w[1].received)
        .map(|(i, _)| i + 1)
        .collect()
}
