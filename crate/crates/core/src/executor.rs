//! A fixed pool of worker threads that runs one barrier of agent step tasks
//! at a time.
//!
//! Each task is encoded to bytes before submission and its output encoded
//! on the way back, so a task can only see what it was handed. The
//! directory and environment snapshots are encoded once per barrier and
//! shared between tasks.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crossbeam_channel::{unbounded, Sender};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::ActionBlock;
use crate::agent::{Agent, State};
use crate::behavior::{initialisation, step, StepOutput, StepParams, World};
use crate::codec::{self, CodecError, Kind};
use crate::directory::Directory;
use crate::environment::Environment;
use crate::message::Mail;
use crate::registry::Registry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutorConfig {
    pub workers: usize,
    /// Sleep added to every step task (not to initialisation tasks).
    pub task_delay: Option<Duration>,
    /// Encode task inputs and outputs. Turning this off is meant for tests.
    pub serialize: bool,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        ExecutorConfig {
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
            task_delay: None,
            serialize: true,
        }
    }
}

impl ExecutorConfig {
    pub fn with_workers(workers: usize) -> Self {
        ExecutorConfig {
            workers: workers.max(1),
            ..Self::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum ExecutorError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("worker pool shut down")]
    Disconnected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TaskKind {
    Init(Option<ActionBlock>),
    Step,
}

/// Everything one agent task needs apart from the shared snapshots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskInput {
    pub kind: TaskKind,
    pub agent: Agent,
    pub inbox: Vec<Mail>,
    pub params: StepParams,
}

impl TaskInput {
    fn state(&self) -> State {
        self.inbox
            .iter()
            .find_map(|m| match m {
                Mail::State(s) => Some((**s).clone()),
                Mail::Message(_) => None,
            })
            .unwrap_or_default()
    }
}

type Job = Box<dyn FnOnce() + Send + 'static>;

/// A job returning `T`, as submitted to [`WorkerPool::run_all`].
pub type Task<T> = Box<dyn FnOnce() -> T + Send>;

/// Long-lived worker threads fed from one queue.
pub struct WorkerPool {
    tx: Option<Sender<Job>>,
    handles: Vec<JoinHandle<()>>,
}

impl WorkerPool {
    pub fn new(workers: usize) -> Result<Self, ExecutorError> {
        if workers == 0 {
            return Err(ExecutorError::NoWorkers);
        }
        let (tx, rx) = unbounded::<Job>();
        let handles = (0..workers)
            .map(|i| {
                let rx = rx.clone();
                thread::Builder::new()
                    .name(format!("goalsim-worker-{i}"))
                    .spawn(move || {
                        for job in rx {
                            job();
                        }
                    })
                    .expect("spawn worker thread")
            })
            .collect();
        Ok(WorkerPool {
            tx: Some(tx),
            handles,
        })
    }

    pub fn workers(&self) -> usize {
        self.handles.len()
    }

    /// Runs every job and waits for all of them. Results come back in
    /// submission order; a panicking job yields `Err` with its payload.
    pub fn run_all<T: Send + 'static>(
        &self,
        jobs: Vec<Task<T>>,
    ) -> Result<Vec<thread::Result<T>>, ExecutorError> {
        let n = jobs.len();
        let (rtx, rrx) = unbounded();
        let tx = self.tx.as_ref().ok_or(ExecutorError::Disconnected)?;
        for (i, job) in jobs.into_iter().enumerate() {
            let rtx = rtx.clone();
            tx.send(Box::new(move || {
                let r = catch_unwind(AssertUnwindSafe(job));
                let _ = rtx.send((i, r));
            }))
            .map_err(|_| ExecutorError::Disconnected)?;
        }
        drop(rtx);
        let mut slots: Vec<Option<thread::Result<T>>> = (0..n).map(|_| None).collect();
        for _ in 0..n {
            let (i, r) = rrx.recv().map_err(|_| ExecutorError::Disconnected)?;
            slots[i] = Some(r);
        }
        Ok(slots.into_iter().map(|s| s.expect("every job reported")).collect())
    }
}

impl Drop for WorkerPool {
    fn drop(&mut self) {
        self.tx.take();
        for h in self.handles.drain(..) {
            let _ = h.join();
        }
    }
}

fn panic_text(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "task panicked".to_owned())
}

fn run_task<E>(
    registry: &Registry<E>,
    directory: &Directory,
    env: &E,
    input: TaskInput,
    delay: Option<Duration>,
) -> StepOutput {
    let fallback = input.state();
    let world = World {
        registry,
        directory,
        env,
    };
    let TaskInput {
        kind,
        agent,
        inbox,
        params,
    } = input;
    let result = match kind {
        TaskKind::Init(block) => initialisation(world, &agent, inbox, block.as_ref(), params),
        TaskKind::Step => {
            if let Some(d) = delay {
                thread::sleep(d);
            }
            step(world, &agent, inbox, params)
        }
    };
    result.unwrap_or_else(|e| StepOutput::failure(fallback, e.to_string()))
}

/// Runs one barrier: every task exactly once, outputs in submission order.
pub fn submit_barrier<E: Environment>(
    pool: &WorkerPool,
    registry: &Arc<Registry<E>>,
    directory: &Directory,
    env: &E,
    tasks: Vec<TaskInput>,
    cfg: &ExecutorConfig,
) -> Result<Vec<StepOutput>, ExecutorError> {
    let fallbacks: Vec<State> = tasks.iter().map(TaskInput::state).collect();
    let delay = cfg.task_delay;
    let results = if cfg.serialize {
        let dir_bytes: Arc<[u8]> = codec::encode(Kind::Directory, directory)?.into();
        let env_bytes: Arc<[u8]> = codec::encode(Kind::Environment, env)?.into();
        let mut jobs: Vec<Task<Result<Vec<u8>, CodecError>>> = Vec::new();
        for t in &tasks {
            let bytes = codec::encode(Kind::TaskInput, t)?;
            let (registry, dir_bytes, env_bytes) = (registry.clone(), dir_bytes.clone(), env_bytes.clone());
            jobs.push(Box::new(move || {
                let start = Instant::now();
                let directory: Directory = codec::decode(Kind::Directory, &dir_bytes)?;
                let env: E = codec::decode(Kind::Environment, &env_bytes)?;
                let input: TaskInput = codec::decode(Kind::TaskInput, &bytes)?;
                let mut out = run_task(&registry, &directory, &env, input, delay);
                out.elapsed = start.elapsed();
                codec::encode(Kind::StepOutput, &out)
            }));
        }
        drop(tasks);
        pool.run_all(jobs)?
            .into_iter()
            .map(|r| match r {
                Ok(Ok(bytes)) => codec::decode::<StepOutput>(Kind::StepOutput, &bytes).map_err(|e| e.to_string()),
                Ok(Err(e)) => Err(e.to_string()),
                Err(p) => Err(panic_text(p.as_ref())),
            })
            .collect::<Vec<_>>()
    } else {
        let directory = Arc::new(directory.clone());
        let env = Arc::new(env.clone());
        let jobs: Vec<Task<StepOutput>> = tasks
            .into_iter()
            .map(|t| {
                let (registry, directory, env) = (registry.clone(), directory.clone(), env.clone());
                Box::new(move || {
                    let start = Instant::now();
                    let mut out = run_task(&registry, &directory, &env, t, delay);
                    out.elapsed = start.elapsed();
                    out
                }) as Task<StepOutput>
            })
            .collect();
        pool.run_all(jobs)?
            .into_iter()
            .map(|r| r.map_err(|p| panic_text(p.as_ref())))
            .collect()
    };
    Ok(results
        .into_iter()
        .zip(fallbacks)
        .map(|(r, state)| r.unwrap_or_else(|e| StepOutput::failure(state, e)))
        .collect())
}

/// As [`submit_barrier`], also returning the summed in-task wall time.
pub fn measure<E: Environment>(
    pool: &WorkerPool,
    registry: &Arc<Registry<E>>,
    directory: &Directory,
    env: &E,
    tasks: Vec<TaskInput>,
    cfg: &ExecutorConfig,
) -> Result<(Vec<StepOutput>, Duration), ExecutorError> {
    let outputs = submit_barrier(pool, registry, directory, env, tasks, cfg)?;
    let total = outputs.iter().map(|o| o.elapsed).sum();
    Ok((outputs, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{Action, ActionError};
    use crate::agent::AgentId;
    use crate::beliefs::BeliefSet;

    fn registry() -> Arc<Registry<BeliefSet>> {
        let mut r = Registry::new();
        r.actions.register_internal("t.inc", |_, b, _, _| {
            let c = b.get_i64("counter").unwrap_or(0);
            b.set("counter", c + 1);
            Ok(())
        });
        r.actions.register_internal("t.panic", |_, _, _, _| -> Result<(), ActionError> {
            panic!("boom")
        });
        Arc::new(r)
    }

    fn task(id: u64, body: &str, counter: i64) -> TaskInput {
        TaskInput {
            kind: TaskKind::Step,
            agent: Agent {
                id: AgentId(id),
                name: format!("a{id}"),
                behavior: "default".into(),
                default_block: Some(ActionBlock::new().then(Action::internal(body))),
            },
            inbox: vec![Mail::State(Box::new(State::new(
                BeliefSet::new().with("counter", counter),
                None,
            )))],
            params: StepParams::default(),
        }
    }

    #[test]
    fn results_in_submission_order() {
        let pool = WorkerPool::new(4).unwrap();
        for serialize in [true, false] {
            let cfg = ExecutorConfig {
                workers: 4,
                task_delay: None,
                serialize,
            };
            let tasks: Vec<_> = (0..20).map(|i| task(i, "t.inc", i as i64)).collect();
            let outs = submit_barrier(&pool, &registry(), &Directory::new(), &BeliefSet::new(), tasks, &cfg)
                .unwrap();
            let counters: Vec<_> = outs.iter().map(|o| o.new_state.beliefs.get_i64("counter").unwrap()).collect();
            assert_eq!(counters, (1..=20).collect::<Vec<_>>());
        }
    }

    #[test]
    fn one_task_many_workers() {
        let pool = WorkerPool::new(4).unwrap();
        let outs = submit_barrier(
            &pool,
            &registry(),
            &Directory::new(),
            &BeliefSet::new(),
            vec![task(1, "t.inc", 0)],
            &ExecutorConfig::with_workers(4),
        )
        .unwrap();
        assert_eq!(outs.len(), 1);
    }

    #[test]
    fn panic_becomes_failure_record() {
        let pool = WorkerPool::new(2).unwrap();
        let tasks = vec![task(1, "t.inc", 0), task(2, "t.panic", 5), task(3, "t.inc", 0)];
        let outs = submit_barrier(
            &pool,
            &registry(),
            &Directory::new(),
            &BeliefSet::new(),
            tasks,
            &ExecutorConfig::with_workers(2),
        )
        .unwrap();
        assert!(outs[0].error.is_none());
        assert!(outs[1].error.as_deref().unwrap().contains("boom"));
        assert_eq!(outs[1].new_state.beliefs.get_i64("counter"), Some(5));
        assert_eq!(outs[2].new_state.beliefs.get_i64("counter"), Some(1));
        // the pool survives
        assert_eq!(pool.workers(), 2);
    }

    #[test]
    fn zero_tasks_zero_time() {
        let pool = WorkerPool::new(1).unwrap();
        let (outs, t) = measure(
            &pool,
            &registry(),
            &Directory::new(),
            &BeliefSet::new(),
            vec![],
            &ExecutorConfig::with_workers(1),
        )
        .unwrap();
        assert!(outs.is_empty());
        assert_eq!(t, Duration::ZERO);
    }

    #[test]
    fn task_time_covers_the_slowest_task() {
        let pool = WorkerPool::new(2).unwrap();
        let cfg = ExecutorConfig {
            workers: 2,
            task_delay: Some(Duration::from_millis(5)),
            serialize: true,
        };
        let (outs, total) = measure(
            &pool,
            &registry(),
            &Directory::new(),
            &BeliefSet::new(),
            (0..4).map(|i| task(i, "t.inc", 0)).collect(),
            &cfg,
        )
        .unwrap();
        let max = outs.iter().map(|o| o.elapsed).max().unwrap();
        assert!(total >= max);
        assert!(max >= Duration::from_millis(5));
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(matches!(WorkerPool::new(0), Err(ExecutorError::NoWorkers)));
    }
}
