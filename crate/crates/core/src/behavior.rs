//! The agent deliberation cycle.
//!
//! One step runs, in this order: perceive, process (once per message),
//! goal_check, reason, execute, role_check. Every hook has a default, so an
//! agent that overrides nothing simply executes its plan or default block.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::{execute_block, ActionBlock, ActionError, BlockOutcome, ExternalActionRequest};
use crate::agent::{Agent, State};
use crate::beliefs::BeliefSet;
use crate::ctx::StepCtx;
use crate::directory::Directory;
use crate::htn::MethodRef;
use crate::message::{Mail, Message};
use crate::registry::Registry;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HookError {
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Action(#[from] ActionError),
}

impl HookError {
    pub fn failed(msg: impl std::fmt::Display) -> Self {
        HookError::Failed(msg.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("stateless contract violated: expected exactly one state in the inbox, found {0}")]
    StatelessContract(usize),
    #[error("no behavior registered as {0:?}")]
    UnknownBehavior(String),
}

/// Everything a step task may look at besides the agent's own inbox.
pub struct World<'a, E> {
    pub registry: &'a Registry<E>,
    pub directory: &'a Directory,
    pub env: &'a E,
}

impl<E> Clone for World<'_, E> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<E> Copy for World<'_, E> {}

/// The block executed in a step, kept for tracing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutedBlock {
    pub label: Option<String>,
    pub parent: Option<MethodRef>,
    /// Origin tag of each action, in execution order.
    pub origins: Vec<Option<String>>,
}

impl From<&ActionBlock> for ExecutedBlock {
    fn from(b: &ActionBlock) -> Self {
        ExecutedBlock {
            label: b.label.clone(),
            parent: b.parent,
            origins: b.iter().map(|a| a.origin.clone()).collect(),
        }
    }
}

/// Result of one step task.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepOutput {
    pub new_state: State,
    pub outgoing: Vec<Message>,
    pub external: Vec<ExternalActionRequest>,
    pub log: String,
    pub finished: bool,
    /// Name of the behavior to switch to before the next step.
    pub role_change: Option<String>,
    pub executed: Option<ExecutedBlock>,
    /// Set when a hook or action failed; outputs up to that point are kept.
    pub error: Option<String>,
    /// Wall time spent inside the task.
    pub elapsed: Duration,
}

impl StepOutput {
    /// Output for a task that could not run: the input state comes back
    /// untouched.
    pub fn failure(state: State, error: impl Into<String>) -> Self {
        let error = error.into();
        StepOutput {
            new_state: state,
            log: format!("step failed: {error}\n"),
            error: Some(error),
            ..Self::default()
        }
    }
}

/// What `execute` produced.
#[derive(Debug, Default)]
pub struct Executed {
    pub outcome: BlockOutcome,
    pub block: Option<ExecutedBlock>,
}

/// Hooks of the deliberation cycle. Override the ones a scenario needs.
pub trait Behavior<E>: Send + Sync {
    /// Updates beliefs from the environment snapshot.
    fn perceive(
        &self,
        _ctx: &mut StepCtx<'_>,
        _env: &E,
        beliefs: BeliefSet,
    ) -> Result<BeliefSet, HookError> {
        Ok(beliefs)
    }

    /// Handles one incoming message. A returned message is sent along with
    /// the execute-phase traffic.
    fn process(
        &self,
        _ctx: &mut StepCtx<'_>,
        _msg: &Message,
        _state: &mut State,
    ) -> Result<Option<Message>, HookError> {
        Ok(None)
    }

    /// May change goals, for instance by swapping the planner root.
    fn goal_check(&self, _ctx: &mut StepCtx<'_>, _state: &mut State) -> Result<(), HookError> {
        Ok(())
    }

    /// Replans when the current plan is empty, finished or failed.
    fn reason(
        &self,
        ctx: &mut StepCtx<'_>,
        world: World<'_, E>,
        state: &mut State,
    ) -> Result<(), HookError> {
        default_reason(ctx, world, state);
        Ok(())
    }

    /// Runs the next block of the plan, or the agent's default block.
    fn execute(
        &self,
        ctx: &mut StepCtx<'_>,
        world: World<'_, E>,
        state: &mut State,
    ) -> Result<Executed, HookError> {
        Ok(default_execute(ctx, world, state))
    }

    /// Returns the name of a behavior to switch to, if any.
    fn role_check(
        &self,
        _ctx: &mut StepCtx<'_>,
        _beliefs: &BeliefSet,
    ) -> Result<Option<String>, HookError> {
        Ok(None)
    }
}

/// The behavior that overrides nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultBehavior;

impl<E> Behavior<E> for DefaultBehavior {}

pub fn default_reason<E>(ctx: &mut StepCtx<'_>, world: World<'_, E>, state: &mut State) {
    let Some(planner) = state.planner.as_mut() else {
        return;
    };
    if !planner.needs_replan() {
        return;
    }
    let report = planner.replan(&state.beliefs, &world.registry.effects);
    for line in &report.lines {
        if planner.verbose || report.error.is_some() {
            ctx.log(line);
        }
    }
}

pub fn default_execute<E>(ctx: &mut StepCtx<'_>, world: World<'_, E>, state: &mut State) -> Executed {
    let block = match state.planner.as_mut() {
        Some(planner) => planner.next_block(),
        None => ctx.agent().default_block.clone(),
    };
    let Some(block) = block else {
        return Executed::default();
    };
    let outcome = execute_block(
        ctx,
        &world.registry.actions,
        &block,
        &mut state.beliefs,
        world.directory,
    );
    Executed {
        outcome,
        block: Some(ExecutedBlock::from(&block)),
    }
}

/// Knobs shared by every task of one barrier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepParams {
    pub step: u64,
    pub run_seed: u64,
    pub verbose: bool,
}

fn take_state(inbox: Vec<Mail>) -> Result<(State, Vec<Message>), StepError> {
    let mut state = None;
    let mut found = 0;
    let mut messages = Vec::new();
    for mail in inbox {
        match mail {
            Mail::State(s) => {
                found += 1;
                state = Some(*s);
            }
            Mail::Message(m) => messages.push(m),
        }
    }
    match (found, state) {
        (1, Some(s)) => Ok((s, messages)),
        _ => Err(StepError::StatelessContract(found)),
    }
}

struct Cycle<'c, 'a> {
    ctx: StepCtx<'a>,
    state: State,
    out: &'c mut StepOutput,
}

impl Cycle<'_, '_> {
    fn absorb(&mut self, outcome: BlockOutcome) -> Result<(), HookError> {
        self.out.outgoing.extend(outcome.outgoing);
        self.out.external.extend(outcome.external);
        match outcome.error {
            Some(e) => Err(e.into()),
            None => Ok(()),
        }
    }
}

/// Runs one deliberation cycle.
///
/// `inbox` must hold exactly one [`Mail::State`]; user messages are handled
/// in inbox order. A failing hook marks the plan failed and ends the cycle
/// early, keeping whatever was produced so far.
pub fn step<E>(
    world: World<'_, E>,
    agent: &Agent,
    inbox: Vec<Mail>,
    params: StepParams,
) -> Result<StepOutput, StepError> {
    let (state, messages) = take_state(inbox)?;
    let behavior = world
        .registry
        .behavior(&agent.behavior)
        .ok_or_else(|| StepError::UnknownBehavior(agent.behavior.clone()))?;
    let ctx = StepCtx::new(agent, params.step, params.run_seed).with_verbose(params.verbose);
    let mut out = StepOutput::default();
    let mut c = Cycle {
        ctx,
        state,
        out: &mut out,
    };

    let result = (|| -> Result<(), HookError> {
        let beliefs = std::mem::take(&mut c.state.beliefs);
        c.state.beliefs = behavior.perceive(&mut c.ctx, world.env, beliefs)?;
        for msg in &messages {
            if let Some(reply) = behavior.process(&mut c.ctx, msg, &mut c.state)? {
                c.out.outgoing.push(reply);
            }
        }
        behavior.goal_check(&mut c.ctx, &mut c.state)?;
        behavior.reason(&mut c.ctx, world, &mut c.state)?;
        let executed = behavior.execute(&mut c.ctx, world, &mut c.state)?;
        c.out.executed = executed.block;
        c.absorb(executed.outcome)?;
        c.out.role_change = behavior.role_check(&mut c.ctx, &c.state.beliefs)?;
        Ok(())
    })();

    if let Err(e) = result {
        if let Some(p) = c.state.planner.as_mut() {
            p.mark_failed();
        }
        c.ctx.log(format_args!("error: {e}"));
        c.out.error = Some(e.to_string());
    }
    let Cycle { ctx, state, .. } = c;
    let (log, finished) = ctx.into_parts();
    out.new_state = state;
    out.log = log;
    out.finished = finished;
    Ok(out)
}

/// Runs `init_block` (or nothing) once, before the first simulation step.
pub fn initialisation<E>(
    world: World<'_, E>,
    agent: &Agent,
    inbox: Vec<Mail>,
    init_block: Option<&ActionBlock>,
    params: StepParams,
) -> Result<StepOutput, StepError> {
    let (mut state, _) = take_state(inbox)?;
    let mut ctx = StepCtx::new(agent, params.step, params.run_seed).with_verbose(params.verbose);
    let mut out = StepOutput::default();
    if let Some(block) = init_block {
        let outcome = execute_block(
            &mut ctx,
            &world.registry.actions,
            block,
            &mut state.beliefs,
            world.directory,
        );
        out.executed = Some(ExecutedBlock::from(block));
        out.outgoing = outcome.outgoing;
        out.external = outcome.external;
        if let Some(e) = outcome.error {
            if let Some(p) = state.planner.as_mut() {
                p.mark_failed();
            }
            out.error = Some(e.to_string());
        }
    }
    let (log, finished) = ctx.into_parts();
    out.new_state = state;
    out.log = log;
    out.finished = finished;
    Ok(out)
}
