//! Built-in scenarios. Each `build` function returns a wired controller
//! ready for `run`.

pub mod incrementation;
pub mod perf;
pub mod ping;
pub mod random_messaging;
pub mod river;

use std::fmt;
use std::str::FromStr;

use rand::seq::IteratorRandom;

use crate::agent::AgentId;
use crate::ctx::StepCtx;
use crate::directory::Directory;

/// Names accepted by the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioName {
    Incrementation,
    Ping,
    RandomMessaging,
    Perf,
    River,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        ScenarioName::Incrementation,
        ScenarioName::Ping,
        ScenarioName::RandomMessaging,
        ScenarioName::Perf,
        ScenarioName::River,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Incrementation => "incrementation",
            ScenarioName::Ping => "ping",
            ScenarioName::RandomMessaging => "random-messaging",
            ScenarioName::Perf => "perf",
            ScenarioName::River => "river",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scenario {0:?}")]
pub struct UnknownScenario(pub String);

impl FromStr for ScenarioName {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| UnknownScenario(s.to_owned()))
    }
}

/// A uniformly chosen directory entry other than the calling agent.
pub(crate) fn random_peer(ctx: &mut StepCtx<'_>, directory: &Directory) -> Option<AgentId> {
    let me = ctx.id();
    directory.ids().filter(|id| *id != me).choose(ctx.rng())
}
