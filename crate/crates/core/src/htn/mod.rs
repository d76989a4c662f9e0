//! Hierarchical task network planning.
//!
//! A [`TaskNetwork`] holds compound tasks (ordered methods, no code) and
//! primitive tasks (preconditions, simulated effects and an action block).
//! [`HtnPlanner`] decomposes a root compound task into a plan of blocks.

mod effect;
mod network;
mod planner;

pub use effect::{apply_all, Effect, EffectError, EffectOp};
pub use network::{
    CompoundId, CompoundTask, Method, MethodRef, NetworkError, PrimitiveId, PrimitiveTask,
    TaskNetwork, TaskRef,
};
pub use planner::{HtnPlanner, PlanError, PlanStatus, ReplanReport, DEFAULT_EXPANSION_LIMIT};
