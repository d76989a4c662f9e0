//! Agent identity and the detachable agent state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::actions::ActionBlock;
use crate::beliefs::BeliefSet;
use crate::htn::HtnPlanner;

/// Unique agent identifier, assigned by the controller and never reused
/// within one simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub u64);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Static description of an agent. Everything mutable lives in [`State`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    /// Free-form name; not necessarily unique.
    pub name: String,
    /// Registry key of the agent's behavior.
    pub behavior: String,
    /// Executed every step when the agent has no planner.
    pub default_block: Option<ActionBlock>,
}

/// The part of an agent that travels between steps: its beliefs and, if it
/// plans, the planner together with its current plan.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub beliefs: BeliefSet,
    pub planner: Option<HtnPlanner>,
}

impl State {
    pub fn new(beliefs: BeliefSet, planner: Option<HtnPlanner>) -> Self {
        State { beliefs, planner }
    }
}
