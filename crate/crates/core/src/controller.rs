//! The simulation driver.
//!
//! Each step: pre-step hook, one barrier of agent tasks, message dispatch
//! (controller requests are intercepted here), external actions in sender
//! order, post-step hook, then role changes, spawns and retirements.
//!
//! Step 0 is the initialisation pass; simulation steps count from 1.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::ActionBlock;
use crate::agent::{Agent, AgentId, State};
use crate::behavior::{ExecutedBlock, StepOutput, StepParams};
use crate::beliefs::{BeliefSet, BeliefValue};
use crate::directory::{Directory, DirectoryEntry};
use crate::environment::Environment;
use crate::executor::{measure, ExecutorConfig, ExecutorError, TaskInput, TaskKind, WorkerPool};
use crate::htn::HtnPlanner;
use crate::message::{Address, Mailbox, Message, Performative};
use crate::registry::{Registry, DEFAULT_BEHAVIOR};

pub type StepHook<E> = Box<dyn FnMut(&mut E, u64)>;
pub type MsgHandler = Box<dyn FnMut(Message) -> Option<Message>>;
pub type PrintSink = Box<dyn FnMut(&str)>;

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error(transparent)]
    Executor(#[from] ExecutorError),
    #[error("log: {0}")]
    Log(#[from] io::Error),
    #[error("metrics: {0}")]
    Csv(#[from] csv::Error),
}

/// Parameters for a new agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSpec {
    pub name: String,
    pub behavior: String,
    pub beliefs: BeliefSet,
    pub init_block: Option<ActionBlock>,
    /// Takes precedence over `default_block` when both are given.
    pub planner: Option<HtnPlanner>,
    pub default_block: Option<ActionBlock>,
    pub services: Vec<String>,
    pub register: bool,
}

impl AgentSpec {
    pub fn new(name: impl Into<String>) -> Self {
        AgentSpec {
            name: name.into(),
            behavior: DEFAULT_BEHAVIOR.to_owned(),
            beliefs: BeliefSet::new(),
            init_block: None,
            planner: None,
            default_block: None,
            services: Vec::new(),
            register: true,
        }
    }

    pub fn behavior(mut self, name: impl Into<String>) -> Self {
        self.behavior = name.into();
        self
    }

    pub fn beliefs(mut self, beliefs: BeliefSet) -> Self {
        self.beliefs = beliefs;
        self
    }

    pub fn init_block(mut self, block: ActionBlock) -> Self {
        self.init_block = Some(block);
        self
    }

    pub fn planner(mut self, planner: HtnPlanner) -> Self {
        self.planner = Some(planner);
        self
    }

    pub fn default_block(mut self, block: ActionBlock) -> Self {
        self.default_block = Some(block);
        self
    }

    pub fn services<S: Into<String>>(mut self, services: impl IntoIterator<Item = S>) -> Self {
        self.services = services.into_iter().map(Into::into).collect();
        self
    }

    pub fn unregistered(mut self) -> Self {
        self.register = false;
        self
    }
}

/// Counters and timings for one step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub live_agents: usize,
    /// Messages emitted by agents, controller requests included.
    pub msgs_sent: usize,
    pub delivered: usize,
    pub dropped: usize,
    pub task_time: Duration,
    pub controller_time: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Sum of in-task wall time.
    pub agent_time: Duration,
    /// Time the controller spent outside the barrier.
    pub controller_time: Duration,
    pub total_time: Duration,
    pub steps: Vec<StepRecord>,
}

impl RunMetrics {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "live_agents", "msgs_sent", "task_time_s", "controller_time_s"])?;
        for s in &self.steps {
            out.write_record([
                s.step.to_string(),
                s.live_agents.to_string(),
                s.msgs_sent.to_string(),
                format!("{:.6}", s.task_time.as_secs_f64()),
                format!("{:.6}", s.controller_time.as_secs_f64()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    fn absorb(&mut self, other: RunMetrics) {
        self.agent_time += other.agent_time;
        self.controller_time += other.controller_time;
        self.total_time += other.total_time;
        self.steps.extend(other.steps);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockRecord {
    pub step: u64,
    pub agent: AgentId,
    pub block: ExecutedBlock,
}

struct Slot {
    agent: Agent,
    mailbox: Mailbox,
    init_block: Option<ActionBlock>,
    initialised: bool,
    finished: bool,
}

pub struct Controller<E: Environment> {
    registry: Arc<Registry<E>>,
    env: E,
    slots: BTreeMap<AgentId, Slot>,
    retired: BTreeMap<AgentId, (Agent, State)>,
    directory: Directory,
    next_id: u64,
    pre_step: Option<StepHook<E>>,
    post_step: Option<StepHook<E>>,
    msg_handler: Option<MsgHandler>,
    print_sink: PrintSink,
    log: Option<Box<dyn Write>>,
    kept_log: Option<Vec<String>>,
    block_trace: Option<Vec<BlockRecord>>,
    message_trace: Option<Vec<(u64, Message)>>,
    run_seed: u64,
    verbose: bool,
    stopped: bool,
    step: u64,
    exec: ExecutorConfig,
    pool: WorkerPool,
    pending_roles: Vec<(AgentId, String)>,
    pending_spawns: Vec<BeliefSet>,
    metrics: RunMetrics,
}

impl<E: Environment> Controller<E> {
    pub fn new(registry: Registry<E>, env: E) -> Self {
        Self::with_executor(registry, env, ExecutorConfig::default())
            .expect("default executor config is valid")
    }

    pub fn with_executor(registry: Registry<E>, env: E, exec: ExecutorConfig) -> Result<Self, ExecutorError> {
        Ok(Controller {
            registry: Arc::new(registry),
            env,
            slots: BTreeMap::new(),
            retired: BTreeMap::new(),
            directory: Directory::new(),
            next_id: 1,
            pre_step: None,
            post_step: None,
            msg_handler: None,
            print_sink: Box::new(|s| println!("{s}")),
            log: None,
            kept_log: None,
            block_trace: None,
            message_trace: None,
            run_seed: 0,
            verbose: false,
            stopped: false,
            step: 0,
            pool: WorkerPool::new(exec.workers)?,
            exec,
            pending_roles: Vec::new(),
            pending_spawns: Vec::new(),
            metrics: RunMetrics::default(),
        })
    }

    pub fn set_executor(&mut self, exec: ExecutorConfig) -> Result<(), ExecutorError> {
        if exec.workers != self.pool.workers() {
            self.pool = WorkerPool::new(exec.workers)?;
        }
        self.exec = exec;
        Ok(())
    }

    pub fn executor(&self) -> &ExecutorConfig {
        &self.exec
    }

    pub fn registry(&self) -> &Registry<E> {
        &self.registry
    }

    pub fn set_environment(&mut self, env: E) {
        self.env = env;
    }

    pub fn environment(&self) -> &E {
        &self.env
    }

    pub fn environment_mut(&mut self) -> &mut E {
        &mut self.env
    }

    pub fn set_pre_step(&mut self, hook: Option<StepHook<E>>) {
        self.pre_step = hook;
    }

    pub fn set_post_step(&mut self, hook: Option<StepHook<E>>) {
        self.post_step = hook;
    }

    /// Every outgoing message passes through `handler`; returning `None`
    /// drops it.
    pub fn set_msg_handler(&mut self, handler: Option<MsgHandler>) {
        self.msg_handler = handler;
    }

    /// Where `print` requests go. Standard output by default.
    pub fn set_print_sink(&mut self, sink: PrintSink) {
        self.print_sink = sink;
    }

    pub fn set_verbose(&mut self, verbose: bool) {
        self.verbose = verbose;
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.run_seed = seed;
    }

    pub fn seed(&self) -> u64 {
        self.run_seed
    }

    pub fn set_log_writer(&mut self, w: impl Write + 'static) {
        self.log = Some(Box::new(w));
    }

    pub fn set_log_file(&mut self, path: impl AsRef<Path>) -> io::Result<()> {
        self.set_log_writer(BufWriter::new(File::create(path)?));
        Ok(())
    }

    /// Keeps every log line in memory as well.
    pub fn keep_log(&mut self, keep: bool) {
        self.kept_log = keep.then(Vec::new);
    }

    pub fn log_lines(&self) -> &[String] {
        self.kept_log.as_deref().unwrap_or_default()
    }

    pub fn record_blocks(&mut self, on: bool) {
        self.block_trace = on.then(Vec::new);
    }

    pub fn block_trace(&self) -> &[BlockRecord] {
        self.block_trace.as_deref().unwrap_or_default()
    }

    pub fn record_messages(&mut self, on: bool) {
        self.message_trace = on.then(Vec::new);
    }

    /// Messages accepted for dispatch, tagged with the step they were sent in.
    pub fn message_trace(&self) -> &[(u64, Message)] {
        self.message_trace.as_deref().unwrap_or_default()
    }

    /// Number of live agents.
    pub fn get_count(&self) -> usize {
        self.slots.values().filter(|s| !s.finished).count()
    }

    pub fn ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.slots.keys().copied()
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        self.slots
            .get(&id)
            .map(|s| &s.agent)
            .or_else(|| self.retired.get(&id).map(|(a, _)| a))
    }

    /// Current state of a live or retired agent.
    pub fn state(&self, id: AgentId) -> Option<&State> {
        match self.slots.get(&id) {
            Some(s) => s.mailbox.state(),
            None => self.retired.get(&id).map(|(_, s)| s),
        }
    }

    pub fn mailbox(&self, id: AgentId) -> Option<&Mailbox> {
        self.slots.get(&id).map(|s| &s.mailbox)
    }

    pub fn retired(&self) -> impl Iterator<Item = (&Agent, &State)> {
        self.retired.values().map(|(a, s)| (a, s))
    }

    pub fn directory(&self) -> &Directory {
        &self.directory
    }

    /// Number of completed simulation steps.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    /// Metrics accumulated over every `run` call so far.
    pub fn metrics(&self) -> &RunMetrics {
        &self.metrics
    }

    /// Creates an agent with a fresh id and, unless the spec says
    /// otherwise, registers it.
    pub fn generate_agent(&mut self, spec: AgentSpec) -> Agent {
        let id = AgentId(self.next_id);
        self.next_id += 1;
        let agent = Agent {
            id,
            name: spec.name,
            behavior: spec.behavior,
            default_block: if spec.planner.is_some() {
                None
            } else {
                spec.default_block
            },
        };
        if spec.register {
            self.register_agent(
                agent.clone(),
                spec.beliefs,
                spec.init_block,
                spec.planner,
                spec.services,
            );
        }
        agent
    }

    /// Adds an existing agent to the simulation and the directory.
    pub fn register_agent(
        &mut self,
        agent: Agent,
        beliefs: BeliefSet,
        init_block: Option<ActionBlock>,
        planner: Option<HtnPlanner>,
        services: Vec<String>,
    ) {
        let id = agent.id;
        self.next_id = self.next_id.max(id.0 + 1);
        let _ = self.directory.register(DirectoryEntry {
            id,
            name: agent.name.clone(),
            services,
        });
        let mut mailbox = Mailbox::new();
        mailbox.put_state(State::new(beliefs, planner));
        self.slots.insert(
            id,
            Slot {
                agent,
                mailbox,
                init_block,
                initialised: false,
                finished: false,
            },
        );
    }

    /// Runs the initialisation pass for agents that have not had one, then
    /// up to `num_iter` steps. Stops early on a `stop` request.
    pub fn run(&mut self, num_iter: u64) -> Result<RunMetrics, ControllerError> {
        let start = Instant::now();
        let mut m = RunMetrics::default();
        if self.slots.values().any(|s| !s.initialised) {
            let rec = self.initialise()?;
            m.agent_time += rec.task_time;
            m.controller_time += rec.controller_time;
        }
        for _ in 0..num_iter {
            if self.stopped {
                break;
            }
            let rec = self.step_once()?;
            m.agent_time += rec.task_time;
            m.controller_time += rec.controller_time;
            m.steps.push(rec);
        }
        if let Some(log) = self.log.as_mut() {
            log.flush()?;
        }
        m.total_time = start.elapsed();
        self.metrics.absorb(m.clone());
        Ok(m)
    }

    fn params(&self) -> StepParams {
        StepParams {
            step: self.step,
            run_seed: self.run_seed,
            verbose: self.verbose,
        }
    }

    fn initialise(&mut self) -> Result<StepRecord, ControllerError> {
        let t0 = Instant::now();
        let params = self.params();
        let mut ids = Vec::new();
        let mut tasks = Vec::new();
        for (id, slot) in self.slots.iter_mut().filter(|(_, s)| !s.initialised && !s.finished) {
            slot.initialised = true;
            ids.push(*id);
            tasks.push(TaskInput {
                kind: TaskKind::Init(slot.init_block.take()),
                agent: slot.agent.clone(),
                inbox: slot.mailbox.drain(),
                params,
            });
        }
        self.barrier(ids, tasks, t0, false)
    }

    fn step_once(&mut self) -> Result<StepRecord, ControllerError> {
        let t0 = Instant::now();
        self.step += 1;
        let t = self.step;
        if let Some(h) = self.pre_step.as_mut() {
            h(&mut self.env, t);
        }
        let params = self.params();
        let mut ids = Vec::new();
        let mut tasks = Vec::new();
        for (id, slot) in self.slots.iter_mut().filter(|(_, s)| !s.finished) {
            ids.push(*id);
            tasks.push(TaskInput {
                kind: TaskKind::Step,
                agent: slot.agent.clone(),
                inbox: slot.mailbox.drain(),
                params,
            });
        }
        self.barrier(ids, tasks, t0, true)
    }

    fn barrier(
        &mut self,
        ids: Vec<AgentId>,
        tasks: Vec<TaskInput>,
        t0: Instant,
        hooks: bool,
    ) -> Result<StepRecord, ControllerError> {
        let t = self.step;
        let snapshot = self.env.snapshot();
        let before = t0.elapsed();
        let (outputs, task_time) = measure(&self.pool, &self.registry, &self.directory, &snapshot, tasks, &self.exec)?;
        drop(snapshot);
        let t1 = Instant::now();
        let mut rec = StepRecord {
            step: t,
            live_agents: ids.len(),
            task_time,
            ..StepRecord::default()
        };
        self.dispatch(ids, outputs, &mut rec)?;
        if hooks {
            if let Some(h) = self.post_step.as_mut() {
                h(&mut self.env, t);
            }
        }
        self.apply_changes()?;
        rec.controller_time = before + t1.elapsed();
        Ok(rec)
    }

    fn write_log(&mut self, who: &dyn std::fmt::Display, line: &str) -> io::Result<()> {
        let text = format!("{}:{}:{}", self.step, who, line);
        if let Some(log) = self.log.as_mut() {
            writeln!(log, "{text}")?;
        }
        if let Some(kept) = self.kept_log.as_mut() {
            kept.push(text);
        }
        Ok(())
    }

    fn dispatch(&mut self, ids: Vec<AgentId>, outputs: Vec<StepOutput>, rec: &mut StepRecord) -> Result<(), ControllerError> {
        let mut outgoing = Vec::new();
        let mut external = Vec::new();
        for (id, out) in ids.into_iter().zip(outputs) {
            for line in out.log.lines() {
                self.write_log(&id, line)?;
            }
            if let Some(trace) = self.block_trace.as_mut() {
                if let Some(block) = out.executed {
                    trace.push(BlockRecord {
                        step: self.step,
                        agent: id,
                        block,
                    });
                }
            }
            if let Some(role) = out.role_change {
                self.pending_roles.push((id, role));
            }
            let slot = self.slots.get_mut(&id).expect("task ids are live agents");
            slot.mailbox.put_state(out.new_state);
            slot.finished |= out.finished;
            outgoing.extend(out.outgoing);
            external.extend(out.external);
        }
        rec.msgs_sent = outgoing.len();

        let mut requests = Vec::new();
        let mut mail = Vec::new();
        for msg in outgoing {
            let msg = match self.msg_handler.as_mut() {
                Some(h) => match h(msg) {
                    Some(m) => m,
                    None => {
                        rec.dropped += 1;
                        continue;
                    }
                },
                None => msg,
            };
            if let Some(trace) = self.message_trace.as_mut() {
                trace.push((self.step, msg.clone()));
            }
            match msg.receiver {
                Address::Controller => requests.push(msg),
                Address::Agent(_) => mail.push(msg),
            }
        }
        for msg in requests {
            self.handle_request(msg)?;
        }
        for msg in mail {
            let Address::Agent(to) = msg.receiver else { unreachable!() };
            match self.slots.get_mut(&to) {
                Some(slot) if !slot.finished => {
                    slot.mailbox.deliver(msg);
                    rec.delivered += 1;
                }
                _ => {
                    rec.dropped += 1;
                    let line = format!("dropped {} message from {} to unknown or finished agent {to}", msg.performative, msg.sender);
                    self.write_log(&"controller", &line)?;
                }
            }
        }

        external.sort_by_key(|r| r.sender);
        for req in external {
            let result = match self.registry.external(&req.action.body) {
                Some(body) => body(&mut self.env, &req).map_err(|e| e.to_string()),
                None => Err(format!("no external action registered as {:?}", req.action.body)),
            };
            if let Err(e) = result {
                let line = format!("external action {:?} from {} failed: {e}", req.action.name, req.sender);
                self.write_log(&"controller", &line)?;
            }
        }
        Ok(())
    }

    fn handle_request(&mut self, msg: Message) -> Result<(), ControllerError> {
        match msg.performative {
            Performative::Finished => {
                if let Some(slot) = msg.sender.agent().and_then(|id| self.slots.get_mut(&id)) {
                    slot.finished = true;
                }
            }
            Performative::Print => {
                let text = match msg.content.get("print") {
                    Some(BeliefValue::Text(s)) => s.clone(),
                    Some(v) => v.to_string(),
                    None => msg.content.to_string(),
                };
                (self.print_sink)(&text);
            }
            Performative::Stop => self.stopped = true,
            Performative::Agent => self.pending_spawns.push(msg.content),
            other => {
                let line = format!("ignoring {other} message from {} addressed to the controller", msg.sender);
                self.write_log(&"controller", &line)?;
            }
        }
        Ok(())
    }

    fn spawn_spec(&self, content: &BeliefSet) -> Result<AgentSpec, String> {
        let mut spec = AgentSpec::new(content.get_str("name").unwrap_or("agent"));
        if let Some(b) = content.get_str("behavior") {
            if !self.registry.has_behavior(b) {
                return Err(format!("unknown behavior {b:?}"));
            }
            spec.behavior = b.to_owned();
        }
        if let Some(v) = content.get("beliefs") {
            spec.beliefs = v.as_map().ok_or("beliefs must be a map")?.clone();
        }
        if let Some(list) = content.get_list("services") {
            spec.services = list
                .iter()
                .map(|v| v.as_str().map(str::to_owned).ok_or("services must be text"))
                .collect::<Result<_, _>>()?;
        }
        if let Some(name) = content.get_str("default_block") {
            spec.default_block = Some(
                self.registry
                    .block(name)
                    .cloned()
                    .ok_or_else(|| format!("unknown block template {name:?}"))?,
            );
        }
        if let Some(name) = content.get_str("planner") {
            spec.planner = Some(
                self.registry
                    .planner(name)
                    .ok_or_else(|| format!("unknown planner template {name:?}"))?,
            );
        }
        Ok(spec)
    }

    fn apply_changes(&mut self) -> Result<(), ControllerError> {
        for (id, role) in std::mem::take(&mut self.pending_roles) {
            if !self.registry.has_behavior(&role) {
                self.write_log(&id, &format!("role change to unknown behavior {role:?} ignored"))?;
            } else if let Some(slot) = self.slots.get_mut(&id) {
                slot.agent.behavior = role;
            }
        }
        for content in std::mem::take(&mut self.pending_spawns) {
            match self.spawn_spec(&content) {
                Ok(spec) => {
                    let agent = self.generate_agent(spec);
                    // Spawned agents start at the next step without an init pass.
                    if let Some(slot) = self.slots.get_mut(&agent.id) {
                        slot.initialised = true;
                    }
                }
                Err(e) => self.write_log(&"controller", &format!("spawn request rejected: {e}"))?,
            }
        }
        let done: Vec<AgentId> = self
            .slots
            .iter()
            .filter(|(_, s)| s.finished)
            .map(|(id, _)| *id)
            .collect();
        for id in done {
            let mut slot = self.slots.remove(&id).expect("listed above");
            self.directory.unregister(id);
            let state = slot
                .mailbox
                .drain()
                .into_iter()
                .find_map(|m| match m {
                    crate::message::Mail::State(s) => Some(*s),
                    crate::message::Mail::Message(_) => None,
                })
                .unwrap_or_default();
            self.retired.insert(id, (slot.agent, state));
        }
        Ok(())
    }
}
