//! Per-step context handed to behavior hooks and action bodies.

use std::fmt::{self, Write as _};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{Agent, AgentId};

/// Mixes a run seed, an agent id and a step index into a per-task seed.
///
/// Uses the SplitMix64 finaliser so the result is stable across platforms
/// and compiler versions.
pub fn derive_seed(run_seed: u64, agent: AgentId, step: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(run_seed) ^ agent.0) ^ step)
}

/// What a step task knows about itself: the agent, the step index, a seeded
/// generator and the log buffer that is flushed to the controller.
pub struct StepCtx<'a> {
    agent: &'a Agent,
    step: u64,
    rng: ChaCha8Rng,
    log: String,
    finished: bool,
    verbose: bool,
}

impl<'a> StepCtx<'a> {
    pub fn new(agent: &'a Agent, step: u64, run_seed: u64) -> Self {
        StepCtx {
            agent,
            step,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(run_seed, agent.id, step)),
            log: String::new(),
            finished: false,
            verbose: false,
        }
    }

    pub fn with_verbose(mut self, verbose: bool) -> Self {
        self.verbose = verbose;
        self
    }

    pub fn agent(&self) -> &'a Agent {
        self.agent
    }

    pub fn id(&self) -> AgentId {
        self.agent.id
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn verbose(&self) -> bool {
        self.verbose
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Appends one line to the step log.
    pub fn log(&mut self, line: impl fmt::Display) {
        let _ = writeln!(self.log, "{line}");
    }

    /// Raises the finished flag; the controller retires the agent at the
    /// next barrier.
    pub fn finish(&mut self) {
        self.finished = true;
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn log_text(&self) -> &str {
        &self.log
    }

    pub(crate) fn into_parts(self) -> (String, bool) {
        (self.log, self.finished)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_by_agent_and_step() {
        let a = derive_seed(7, AgentId(1), 1);
        assert_ne!(a, derive_seed(7, AgentId(2), 1));
        assert_ne!(a, derive_seed(7, AgentId(1), 2));
        assert_ne!(a, derive_seed(8, AgentId(1), 1));
        assert_eq!(a, derive_seed(7, AgentId(1), 1));
    }
}
