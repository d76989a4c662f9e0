//! Actions, action blocks and block execution.
//!
//! Action bodies are never stored in an [`Action`]; an action names its body
//! by a registry key (`scenario.action` by convention) so that blocks, plans
//! and whole agent states stay encodable.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::AgentId;
use crate::beliefs::{BeliefSet, BeliefValue};
use crate::ctx::StepCtx;
use crate::directory::Directory;
use crate::htn::MethodRef;
use crate::message::{Address, Message, Performative};
use crate::registry::ActionTable;

pub type Kwargs = BTreeMap<String, BeliefValue>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    /// Runs inside the step task and rewrites the agent's beliefs.
    Internal,
    /// Deferred: handed to the controller, which applies it to the environment.
    External,
    /// Runs inside the step task and produces outgoing messages.
    Message,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionKind::Internal => "internal",
            ActionKind::External => "external",
            ActionKind::Message => "message",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error("beliefs_to_forward is only allowed on external actions (got {0})")]
    ForwardOnNonExternal(ActionKind),
    #[error("no {kind} action body registered as {name:?}")]
    UnknownBody { kind: ActionKind, name: String },
    #[error("missing belief {0:?}")]
    MissingBelief(String),
    #[error("missing argument {0:?}")]
    MissingArgument(String),
    #[error("{key:?} has type {found}, expected {expected}")]
    TypeMismatch {
        key: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("action failed: {0}")]
    Failed(String),
}

impl ActionError {
    pub fn failed(msg: impl fmt::Display) -> Self {
        ActionError::Failed(msg.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    /// Display name used in logs.
    pub name: String,
    /// Registry key of the body.
    pub body: String,
    pub args: Vec<BeliefValue>,
    pub kwargs: Kwargs,
    /// Belief keys copied into `kwargs` when an external action is queued.
    pub beliefs_to_forward: Option<Vec<String>>,
    /// Name of the primitive task that contributed this action, if any.
    pub origin: Option<String>,
}

impl Action {
    fn of(kind: ActionKind, body: impl Into<String>) -> Self {
        let body = body.into();
        Action {
            kind,
            name: body.clone(),
            body,
            args: Vec::new(),
            kwargs: Kwargs::new(),
            beliefs_to_forward: None,
            origin: None,
        }
    }

    pub fn internal(body: impl Into<String>) -> Self {
        Self::of(ActionKind::Internal, body)
    }

    pub fn message(body: impl Into<String>) -> Self {
        Self::of(ActionKind::Message, body)
    }

    pub fn external(body: impl Into<String>) -> Self {
        Self::of(ActionKind::External, body)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn arg(mut self, value: impl Into<BeliefValue>) -> Self {
        self.args.push(value.into());
        self
    }

    pub fn kwarg(mut self, key: impl Into<String>, value: impl Into<BeliefValue>) -> Self {
        self.kwargs.insert(key.into(), value.into());
        self
    }

    /// Forwards `keys` from the agent's beliefs. Only valid on external actions.
    pub fn forward<S: Into<String>>(
        mut self,
        keys: impl IntoIterator<Item = S>,
    ) -> Result<Self, ActionError> {
        if self.kind != ActionKind::External {
            return Err(ActionError::ForwardOnNonExternal(self.kind));
        }
        self.beliefs_to_forward = Some(keys.into_iter().map(Into::into).collect());
        Ok(self)
    }

    fn validate(&self) -> Result<(), ActionError> {
        if self.beliefs_to_forward.is_some() && self.kind != ActionKind::External {
            return Err(ActionError::ForwardOnNonExternal(self.kind));
        }
        Ok(())
    }
}

/// Ordered list of actions executed together in one step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionBlock {
    pub actions: Vec<Action>,
    /// The HTN method this block was planned under.
    pub parent: Option<MethodRef>,
    /// Identifies the block in logs: the primitive task name, or the method
    /// name for blocks merged under an append method.
    pub label: Option<String>,
}

impl ActionBlock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn labelled(label: impl Into<String>) -> Self {
        ActionBlock {
            label: Some(label.into()),
            ..Self::default()
        }
    }

    /// Appends an action of the given kind at the tail.
    pub fn add(
        &mut self,
        kind: ActionKind,
        body: impl Into<String>,
        name: impl Into<String>,
        args: Vec<BeliefValue>,
        kwargs: Kwargs,
        beliefs_to_forward: Option<Vec<String>>,
    ) -> Result<(), ActionError> {
        let mut action = Action::of(kind, body).named(name);
        action.args = args;
        action.kwargs = kwargs;
        action.beliefs_to_forward = beliefs_to_forward;
        self.push(action)
    }

    pub fn push(&mut self, action: Action) -> Result<(), ActionError> {
        action.validate()?;
        self.actions.push(action);
        Ok(())
    }

    /// Builder form of [`ActionBlock::push`] for actions already known valid.
    pub fn then(mut self, action: Action) -> Self {
        self.push(action).expect("invalid action");
        self
    }

    pub fn add_internal(&mut self, body: impl Into<String>) -> &mut Self {
        self.actions.push(Action::internal(body));
        self
    }

    pub fn add_message(&mut self, body: impl Into<String>) -> &mut Self {
        self.actions.push(Action::message(body));
        self
    }

    pub fn add_external<S: Into<String>>(
        &mut self,
        body: impl Into<String>,
        beliefs: impl IntoIterator<Item = S>,
    ) -> &mut Self {
        let mut a = Action::external(body);
        let keys: Vec<String> = beliefs.into_iter().map(Into::into).collect();
        if !keys.is_empty() {
            a.beliefs_to_forward = Some(keys);
        }
        self.actions.push(a);
        self
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Action> {
        self.actions.iter()
    }
}

impl<'a> IntoIterator for &'a ActionBlock {
    type Item = &'a Action;
    type IntoIter = std::slice::Iter<'a, Action>;

    fn into_iter(self) -> Self::IntoIter {
        self.actions.iter()
    }
}

/// An external action queued for the controller, with forwarded beliefs
/// already resolved into its kwargs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalActionRequest {
    pub sender: AgentId,
    pub action: Action,
}

impl ExternalActionRequest {
    pub fn args(&self) -> &[BeliefValue] {
        &self.action.args
    }

    pub fn kwarg(&self, key: &str) -> Result<&BeliefValue, ActionError> {
        self.action
            .kwargs
            .get(key)
            .ok_or_else(|| ActionError::MissingArgument(key.to_owned()))
    }

    pub fn kwarg_f64(&self, key: &str) -> Result<f64, ActionError> {
        let v = self.kwarg(key)?;
        v.as_f64().ok_or_else(|| ActionError::TypeMismatch {
            key: key.to_owned(),
            expected: "number",
            found: v.type_name(),
        })
    }

    pub fn kwarg_i64(&self, key: &str) -> Result<i64, ActionError> {
        let v = self.kwarg(key)?;
        v.as_i64().ok_or_else(|| ActionError::TypeMismatch {
            key: key.to_owned(),
            expected: "int",
            found: v.type_name(),
        })
    }
}

/// One message produced by a message-action body.
#[derive(Clone, Debug, PartialEq)]
pub struct Outgoing {
    pub receiver: Address,
    pub performative: Performative,
    pub content: BeliefSet,
    pub priority: bool,
}

impl Outgoing {
    pub fn new(receiver: impl Into<Address>, performative: Performative, content: BeliefSet) -> Self {
        Outgoing {
            receiver: receiver.into(),
            performative,
            content,
            priority: false,
        }
    }

    pub fn to_controller(performative: Performative, content: BeliefSet) -> Self {
        Self::new(Address::Controller, performative, content)
    }

    pub fn prioritised(mut self) -> Self {
        self.priority = true;
        self
    }
}

/// What running one block produced. Beliefs are updated in place.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockOutcome {
    pub outgoing: Vec<Message>,
    pub external: Vec<ExternalActionRequest>,
    /// Set when an action body failed; later actions in the block were skipped.
    pub error: Option<ActionError>,
}

/// Runs `block` in order against `beliefs`.
///
/// Internal and message bodies run immediately. External actions are only
/// queued, with their forwarded beliefs resolved at the point they appear in
/// the block. The first failing body stops the block; whatever was produced
/// before it is kept.
pub fn execute_block(
    ctx: &mut StepCtx<'_>,
    table: &ActionTable,
    block: &ActionBlock,
    beliefs: &mut BeliefSet,
    directory: &Directory,
) -> BlockOutcome {
    let mut out = BlockOutcome::default();
    for action in block {
        if let Err(e) = run_action(ctx, table, action, beliefs, directory, &mut out) {
            ctx.log(format_args!("action {:?} failed: {e}", action.name));
            out.error = Some(e);
            break;
        }
    }
    out
}

fn run_action(
    ctx: &mut StepCtx<'_>,
    table: &ActionTable,
    action: &Action,
    beliefs: &mut BeliefSet,
    directory: &Directory,
    out: &mut BlockOutcome,
) -> Result<(), ActionError> {
    let unknown = || ActionError::UnknownBody {
        kind: action.kind,
        name: action.body.clone(),
    };
    match action.kind {
        ActionKind::Internal => {
            let body = table.internal(&action.body).ok_or_else(unknown)?;
            body(ctx, beliefs, &action.args, &action.kwargs)
        }
        ActionKind::Message => {
            let body = table.message(&action.body).ok_or_else(unknown)?;
            let produced = body(ctx, beliefs, directory, &action.args, &action.kwargs)?;
            let sender = ctx.id();
            for o in produced {
                if let Address::Agent(id) = o.receiver {
                    if !directory.contains(id) {
                        ctx.log(format_args!(
                            "warning: dropping {} message to unknown agent {id}",
                            o.performative
                        ));
                        continue;
                    }
                }
                out.outgoing.push(Message {
                    sender: Address::Agent(sender),
                    receiver: o.receiver,
                    performative: o.performative,
                    content: o.content,
                    priority: o.priority,
                });
            }
            Ok(())
        }
        ActionKind::External => {
            let mut resolved = action.clone();
            if let Some(keys) = &action.beliefs_to_forward {
                for key in keys {
                    let value = beliefs
                        .get(key)
                        .ok_or_else(|| ActionError::MissingBelief(key.clone()))?;
                    resolved.kwargs.insert(key.clone(), value.clone());
                }
            }
            out.external.push(ExternalActionRequest {
                sender: ctx.id(),
                action: resolved,
            });
            Ok(())
        }
    }
}
