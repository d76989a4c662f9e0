//! Three agents pinging each other until each has seen three pongs.
//!
//! An agent keeps at most one ping outstanding. `awaiting` counts down the
//! steps left before an unanswered ping is given up (the peer may have
//! left in the meantime).

use crate::actions::{Action, ActionBlock, ActionError, Outgoing};
use crate::behavior::{Behavior, HookError};
use crate::beliefs::{BeliefSet, BeliefValue, ConditionSpec, Conditions};
use crate::controller::{AgentSpec, Controller};
use crate::ctx::StepCtx;
use crate::executor::{ExecutorConfig, ExecutorError};
use crate::htn::{Effect, EffectOp, HtnPlanner, Method, PrimitiveTask, TaskNetwork};
use crate::message::{Message, Performative};
use crate::registry::Registry;

use super::random_peer;

pub const BEHAVIOR: &str = "ping.agent";
pub const GOT_MESSAGE: &str = "Got Message";
pub const AGENTS: usize = 3;
pub const TARGET: i64 = 3;
/// Steps a ping stays outstanding: sent, answered, pong read.
const PATIENCE: i64 = 2;

const PING: &str = "ping.ping";
const AWAIT: &str = "ping.await";
const REPLY: &str = "ping.reply";
const UPDATE_ENV: &str = "ping.update_env";
const CLEANUP: &str = "ping.cleanup";
const FINISH: &str = "ping.finish";

pub struct PingAgent;

impl Behavior<BeliefSet> for PingAgent {
    fn perceive(
        &self,
        _ctx: &mut StepCtx<'_>,
        _env: &BeliefSet,
        mut beliefs: BeliefSet,
    ) -> Result<BeliefSet, HookError> {
        let awaiting = beliefs.get_i64("awaiting").unwrap_or(0);
        if awaiting > 0 {
            beliefs.set("awaiting", awaiting - 1);
        }
        Ok(beliefs)
    }

    fn process(
        &self,
        ctx: &mut StepCtx<'_>,
        msg: &Message,
        state: &mut crate::agent::State,
    ) -> Result<Option<Message>, HookError> {
        let b = &mut state.beliefs;
        let sender = msg.sender.agent().ok_or_else(|| HookError::failed("ping from controller"))?;
        match msg.content.get_str("kind") {
            Some("ping") => {
                let mut senders = b.get_list("message").map(<[_]>::to_vec).unwrap_or_default();
                senders.push(BeliefValue::Int(sender.0 as i64));
                b.set("message", senders);
                b.set("reply_count", b.get_i64("reply_count").unwrap_or(0) + 1);
            }
            Some("pong") => {
                b.set("counter", b.get_i64("counter").unwrap_or(0) + 1);
                b.set("to_env", b.get_i64("to_env").unwrap_or(0) + 1);
                b.set("awaiting", 0);
            }
            other => ctx.log(format!("ignoring message kind {other:?}")),
        }
        b.set("got_msgs", true);
        Ok(None)
    }
}

pub fn registry() -> Registry<BeliefSet> {
    let mut r = Registry::new();
    r.register_behavior(BEHAVIOR, PingAgent);
    r.actions
        .register_message(PING, |ctx, _, dir, _, _| {
            Ok(match random_peer(ctx, dir) {
                Some(peer) => vec![Outgoing::new(peer, Performative::Request, BeliefSet::new().with("kind", "ping"))],
                None => vec![Outgoing::to_controller(Performative::Stop, BeliefSet::new())],
            })
        })
        .register_message(REPLY, |_, beliefs, _, _, _| {
            let senders = beliefs.get_list("message").unwrap_or_default();
            senders
                .iter()
                .map(|v| {
                    let id = v.as_i64().ok_or_else(|| ActionError::failed("bad sender id"))?;
                    Ok(Outgoing::new(
                        crate::agent::AgentId(id as u64),
                        Performative::Inform,
                        BeliefSet::new().with("kind", "pong"),
                    ))
                })
                .collect()
        })
        .register_message(FINISH, |_, _, _, _, _| {
            Ok(vec![Outgoing::to_controller(Performative::Finished, BeliefSet::new())])
        })
        .register_internal(AWAIT, |_, beliefs, _, _| {
            beliefs.set("awaiting", PATIENCE);
            Ok(())
        })
        .register_internal(CLEANUP, |_, beliefs, _, _| {
            beliefs.set("got_msgs", false);
            beliefs.set("reply_count", 0);
            beliefs.set("message", Vec::<BeliefValue>::new());
            beliefs.set("to_env", 0);
            Ok(())
        });
    r.register_external(UPDATE_ENV, |env: &mut BeliefSet, req| {
        let add = req.kwarg_i64("to_env")?;
        env.set("counter", env.get_i64("counter").unwrap_or(0) + add);
        Ok(())
    });
    r
}

pub fn initial_beliefs() -> BeliefSet {
    BeliefSet::new()
        .with("got_msgs", false)
        .with("reply_count", 0)
        .with("message", Vec::<BeliefValue>::new())
        .with("counter", 0)
        .with("to_env", 0)
        .with("awaiting", 0)
}

pub fn planner() -> HtnPlanner {
    let mut n = TaskNetwork::new();
    let root = n.add_compound("Ping");
    let finish = n.add_primitive(PrimitiveTask::new(
        "Finish",
        ActionBlock::new().then(Action::message(FINISH)),
    ));
    let reply = n.add_primitive(PrimitiveTask::new("Reply", ActionBlock::new().then(Action::message(REPLY))));
    let mut update = ActionBlock::new();
    update.add_external(UPDATE_ENV, ["to_env"]);
    let update = n.add_primitive(PrimitiveTask::new("UpdateEnv", update));
    let cleanup = n.add_primitive(
        PrimitiveTask::new("Cleanup", ActionBlock::new().then(Action::internal(CLEANUP)))
            .effect(Effect::new("got_msgs", EffectOp::Rep, false))
            .effect(Effect::new("to_env", EffectOp::Rep, 0)),
    );
    let ping = n.add_primitive(
        PrimitiveTask::new(
            "Ping",
            ActionBlock::new().then(Action::internal(AWAIT)).then(Action::message(PING)),
        )
        .effect(Effect::new("awaiting", EffectOp::Rep, PATIENCE)),
    );
    let methods = [
        Method::new("Finish")
            .when(Conditions::new().with("counter", ConditionSpec::at_least(TARGET as f64)))
            .subtask(finish),
        Method::new(GOT_MESSAGE)
            .when(Conditions::new().with("got_msgs", ConditionSpec::exact(true)))
            .subtask(reply)
            .subtask(update)
            .subtask(cleanup)
            .appending(),
        Method::new("No Message")
            .when(
                Conditions::new()
                    .with("got_msgs", ConditionSpec::exact(false))
                    .with("awaiting", ConditionSpec::at_most(0.0)),
            )
            .subtask(ping),
        Method::new("Wait"),
    ];
    for m in methods {
        n.add_method(root, m, None).expect("root exists");
    }
    HtnPlanner::new(n, root)
}

pub fn build(exec: ExecutorConfig) -> Result<Controller<BeliefSet>, ExecutorError> {
    let mut c = Controller::with_executor(registry(), BeliefSet::new().with("counter", 0), exec)?;
    for i in 0..AGENTS {
        c.generate_agent(
            AgentSpec::new(format!("pinger {i}"))
                .behavior(BEHAVIOR)
                .beliefs(initial_beliefs())
                .planner(planner()),
        );
    }
    Ok(c)
}
