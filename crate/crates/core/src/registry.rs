//! Name-keyed tables of host code: action bodies, custom effects,
//! behaviors, and the templates used to spawn agents at run time.
//!
//! Everything that travels between steps refers to code by name only.
//! Keys follow the `scenario.action` convention.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::actions::{ActionBlock, ActionError, ExternalActionRequest, Kwargs, Outgoing};
use crate::behavior::{Behavior, DefaultBehavior};
use crate::beliefs::{BeliefSet, BeliefValue};
use crate::ctx::StepCtx;
use crate::directory::Directory;
use crate::htn::HtnPlanner;

pub type InternalFn = Arc<
    dyn Fn(&mut StepCtx<'_>, &mut BeliefSet, &[BeliefValue], &Kwargs) -> Result<(), ActionError>
        + Send
        + Sync,
>;

pub type MessageFn = Arc<
    dyn Fn(
            &mut StepCtx<'_>,
            &BeliefSet,
            &Directory,
            &[BeliefValue],
            &Kwargs,
        ) -> Result<Vec<Outgoing>, ActionError>
        + Send
        + Sync,
>;

pub type CustomEffectFn =
    Arc<dyn Fn(&mut BeliefSet, Option<&BeliefValue>) -> Result<(), String> + Send + Sync>;

pub type ExternalFn<E> =
    Arc<dyn Fn(&mut E, &ExternalActionRequest) -> Result<(), ActionError> + Send + Sync>;

pub type PlannerTemplate = Arc<dyn Fn() -> HtnPlanner + Send + Sync>;

/// Bodies of internal and message actions. This is all an action block
/// needs to run inside a step task.
#[derive(Clone, Default)]
pub struct ActionTable {
    internal: BTreeMap<String, InternalFn>,
    message: BTreeMap<String, MessageFn>,
}

impl ActionTable {
    pub fn register_internal<F>(&mut self, name: impl Into<String>, body: F) -> &mut Self
    where
        F: Fn(&mut StepCtx<'_>, &mut BeliefSet, &[BeliefValue], &Kwargs) -> Result<(), ActionError>
            + Send
            + Sync
            + 'static,
    {
        self.internal.insert(name.into(), Arc::new(body));
        self
    }

    pub fn register_message<F>(&mut self, name: impl Into<String>, body: F) -> &mut Self
    where
        F: Fn(
                &mut StepCtx<'_>,
                &BeliefSet,
                &Directory,
                &[BeliefValue],
                &Kwargs,
            ) -> Result<Vec<Outgoing>, ActionError>
            + Send
            + Sync
            + 'static,
    {
        self.message.insert(name.into(), Arc::new(body));
        self
    }

    pub fn internal(&self, name: &str) -> Option<&InternalFn> {
        self.internal.get(name)
    }

    pub fn message(&self, name: &str) -> Option<&MessageFn> {
        self.message.get(name)
    }
}

impl fmt::Debug for ActionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ActionTable")
            .field("internal", &self.internal.keys().collect::<Vec<_>>())
            .field("message", &self.message.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Custom effect functions used by the planner while simulating beliefs.
#[derive(Clone, Default)]
pub struct EffectTable {
    custom: BTreeMap<String, CustomEffectFn>,
}

impl EffectTable {
    pub fn register<F>(&mut self, name: impl Into<String>, f: F) -> &mut Self
    where
        F: Fn(&mut BeliefSet, Option<&BeliefValue>) -> Result<(), String> + Send + Sync + 'static,
    {
        self.custom.insert(name.into(), Arc::new(f));
        self
    }

    pub fn get(&self, name: &str) -> Option<&CustomEffectFn> {
        self.custom.get(name)
    }
}

impl fmt::Debug for EffectTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.custom.keys()).finish()
    }
}

/// The complete set of host code a scenario makes available.
///
/// The name `default` always resolves to [`DefaultBehavior`] unless a
/// scenario overrides it.
pub struct Registry<E> {
    pub actions: ActionTable,
    pub effects: EffectTable,
    behaviors: BTreeMap<String, Arc<dyn Behavior<E>>>,
    external: BTreeMap<String, ExternalFn<E>>,
    planners: BTreeMap<String, PlannerTemplate>,
    blocks: BTreeMap<String, ActionBlock>,
}

pub const DEFAULT_BEHAVIOR: &str = "default";

impl<E: 'static> Default for Registry<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E: 'static> Registry<E> {
    pub fn new() -> Self {
        let mut r = Registry {
            actions: ActionTable::default(),
            effects: EffectTable::default(),
            behaviors: BTreeMap::new(),
            external: BTreeMap::new(),
            planners: BTreeMap::new(),
            blocks: BTreeMap::new(),
        };
        r.behaviors
            .insert(DEFAULT_BEHAVIOR.to_owned(), Arc::new(DefaultBehavior));
        r
    }
}

impl<E> Registry<E> {
    pub fn register_behavior(
        &mut self,
        name: impl Into<String>,
        behavior: impl Behavior<E> + 'static,
    ) -> &mut Self {
        self.behaviors.insert(name.into(), Arc::new(behavior));
        self
    }

    pub fn behavior(&self, name: &str) -> Option<&Arc<dyn Behavior<E>>> {
        self.behaviors.get(name)
    }

    pub fn has_behavior(&self, name: &str) -> bool {
        self.behaviors.contains_key(name)
    }

    pub fn register_external<F>(&mut self, name: impl Into<String>, body: F) -> &mut Self
    where
        F: Fn(&mut E, &ExternalActionRequest) -> Result<(), ActionError> + Send + Sync + 'static,
    {
        self.external.insert(name.into(), Arc::new(body));
        self
    }

    pub fn external(&self, name: &str) -> Option<&ExternalFn<E>> {
        self.external.get(name)
    }

    pub fn register_planner<F>(&mut self, name: impl Into<String>, make: F) -> &mut Self
    where
        F: Fn() -> HtnPlanner + Send + Sync + 'static,
    {
        self.planners.insert(name.into(), Arc::new(make));
        self
    }

    pub fn planner(&self, name: &str) -> Option<HtnPlanner> {
        self.planners.get(name).map(|make| make())
    }

    pub fn register_block(&mut self, name: impl Into<String>, block: ActionBlock) -> &mut Self {
        self.blocks.insert(name.into(), block);
        self
    }

    pub fn block(&self, name: &str) -> Option<&ActionBlock> {
        self.blocks.get(name)
    }
}

impl<E> fmt::Debug for Registry<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("actions", &self.actions)
            .field("effects", &self.effects)
            .field("behaviors", &self.behaviors.keys().collect::<Vec<_>>())
            .field("external", &self.external.keys().collect::<Vec<_>>())
            .field("planners", &self.planners.keys().collect::<Vec<_>>())
            .field("blocks", &self.blocks.keys().collect::<Vec<_>>())
            .finish()
    }
}
