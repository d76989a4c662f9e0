//! The shared world agents perceive and external actions change.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::beliefs::BeliefSet;

/// A scenario environment.
///
/// Only the controller thread mutates it: in the pre-step hook, when
/// applying external actions, and in the post-step hook. Step tasks receive
/// a [`snapshot`](Environment::snapshot) taken before the barrier.
pub trait Environment: Clone + Serialize + DeserializeOwned + Send + Sync + 'static {
    fn snapshot(&self) -> Self {
        self.clone()
    }
}

impl Environment for () {}

impl Environment for BeliefSet {}
