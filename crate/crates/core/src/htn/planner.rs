//! Depth-first decomposition with chronological backtracking, and the plan
//! cursor used by the execute phase.

use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::ActionBlock;
use crate::beliefs::BeliefSet;
use crate::registry::EffectTable;

use super::effect::apply_all;
use super::network::{CompoundId, MethodRef, NetworkError, PrimitiveId, TaskNetwork, TaskRef};

pub const DEFAULT_EXPANSION_LIMIT: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanStatus {
    Empty,
    Running,
    Finished,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("gave up after {0} expansions; the task network is probably recursive")]
    ExpansionLimit(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// What a replan did, beyond the plan itself.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplanReport {
    /// Beliefs after simulating every planned primitive's effects.
    pub beliefs: BeliefSet,
    /// Primitive tasks in plan order, before blocks were merged.
    pub trace: Vec<PrimitiveId>,
    pub expansions: usize,
    /// Decomposition trace, filled only when the planner is verbose.
    pub lines: Vec<String>,
    pub error: Option<PlanError>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HtnPlanner {
    network: TaskNetwork,
    root: CompoundId,
    plan: Vec<ActionBlock>,
    cursor: usize,
    status: PlanStatus,
    pub verbose: bool,
    pub expansion_limit: usize,
}

#[derive(Clone, Copy, Debug)]
struct Group {
    id: u32,
    method: MethodRef,
}

#[derive(Clone, Copy, Debug)]
struct Pending {
    task: TaskRef,
    parent: Option<MethodRef>,
    group: Option<Group>,
}

// Persistent stack so that choice points can share the remaining agenda.
struct Node {
    item: Pending,
    next: Agenda,
}

type Agenda = Option<Rc<Node>>;

fn push(agenda: Agenda, item: Pending) -> Agenda {
    Some(Rc::new(Node { item, next: agenda }))
}

struct Planned {
    primitive: PrimitiveId,
    parent: Option<MethodRef>,
    group: Option<Group>,
}

struct Choice {
    compound: CompoundId,
    item: Pending,
    next_method: usize,
    plan_len: usize,
    beliefs: BeliefSet,
    agenda: Agenda,
}

struct Search<'a> {
    net: &'a TaskNetwork,
    effects: &'a EffectTable,
    verbose: bool,
    agenda: Agenda,
    planned: Vec<Planned>,
    beliefs: BeliefSet,
    choices: Vec<Choice>,
    next_group: u32,
    expansions: usize,
    lines: Vec<String>,
}

impl Search<'_> {
    fn note(&mut self, line: impl FnOnce() -> String) {
        if self.verbose {
            self.lines.push(line());
        }
    }

    /// Selects the first applicable method of `c` at or after `from` and
    /// pushes its subtasks. Returns false if none applies.
    fn expand(&mut self, c: CompoundId, item: Pending, from: usize) -> Result<bool, PlanError> {
        let ct = self.net.compound(c)?;
        for (i, m) in ct.methods.iter().enumerate().skip(from) {
            if !m.conditions.check(&self.beliefs) {
                self.note(|| format!("  method {:?} of {:?}: conditions fail", m.name, ct.name));
                continue;
            }
            self.note(|| format!("  method {:?} of {:?}: selected", m.name, ct.name));
            let mref = MethodRef { compound: c, index: i };
            self.choices.push(Choice {
                compound: c,
                item,
                next_method: i + 1,
                plan_len: self.planned.len(),
                beliefs: self.beliefs.clone(),
                agenda: self.agenda.clone(),
            });
            let group = match item.group {
                Some(g) => Some(g),
                None if m.append => {
                    self.next_group += 1;
                    Some(Group {
                        id: self.next_group,
                        method: mref,
                    })
                }
                None => None,
            };
            for &task in m.subtasks.iter().rev() {
                self.agenda = push(
                    self.agenda.take(),
                    Pending {
                        task,
                        parent: Some(mref),
                        group,
                    },
                );
            }
            return Ok(true);
        }
        Ok(false)
    }

    /// Undoes the latest choice and tries its next alternative. Returns
    /// false when every alternative has been exhausted.
    fn backtrack(&mut self) -> Result<bool, PlanError> {
        while let Some(choice) = self.choices.pop() {
            self.tick();
            self.planned.truncate(choice.plan_len);
            self.beliefs = choice.beliefs;
            self.agenda = choice.agenda;
            let name = &self.net.compound(choice.compound)?.name;
            self.note(|| format!("rollback to {name:?}"));
            if self.expand(choice.compound, choice.item, choice.next_method)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn tick(&mut self) {
        self.expansions += 1;
    }

    fn run(&mut self, limit: usize) -> Result<bool, PlanError> {
        while let Some(node) = self.agenda.take() {
            self.agenda = node.next.clone();
            let item = node.item;
            let ok = match item.task {
                TaskRef::Compound(c) => {
                    self.tick();
                    if self.expansions > limit {
                        return Err(PlanError::ExpansionLimit(limit));
                    }
                    self.note(|| format!("expand {:?}", self.net.compound(c).map(|t| t.name.as_str()).unwrap_or("?")));
                    self.expand(c, item, 0)?
                }
                TaskRef::Primitive(p) => {
                    let pt = self.net.primitive(p)?;
                    if !pt.preconditions.check(&self.beliefs) {
                        self.note(|| format!("primitive {:?}: preconditions fail", pt.name));
                        false
                    } else {
                        let mut next = self.beliefs.clone();
                        match apply_all(&pt.effects, &mut next, self.effects) {
                            Ok(()) => {
                                self.note(|| format!("primitive {:?}: planned", pt.name));
                                self.beliefs = next;
                                self.planned.push(Planned {
                                    primitive: p,
                                    parent: item.parent,
                                    group: item.group,
                                });
                                true
                            }
                            Err(e) => {
                                self.note(|| format!("primitive {:?}: effect failed: {e}", pt.name));
                                false
                            }
                        }
                    }
                }
            };
            if !ok && !self.backtrack()? {
                return Ok(false);
            }
            if self.expansions > limit {
                return Err(PlanError::ExpansionLimit(limit));
            }
        }
        Ok(true)
    }
}

impl HtnPlanner {
    pub fn new(network: TaskNetwork, root: CompoundId) -> Self {
        HtnPlanner {
            network,
            root,
            plan: Vec::new(),
            cursor: 0,
            status: PlanStatus::Empty,
            verbose: false,
            expansion_limit: DEFAULT_EXPANSION_LIMIT,
        }
    }

    pub fn network(&self) -> &TaskNetwork {
        &self.network
    }

    pub fn network_mut(&mut self) -> &mut TaskNetwork {
        &mut self.network
    }

    pub fn root(&self) -> CompoundId {
        self.root
    }

    /// Switches goal. The current plan is dropped so the next reasoning
    /// phase replans from the new root.
    pub fn set_root(&mut self, root: CompoundId) {
        self.root = root;
        self.plan.clear();
        self.cursor = 0;
        self.status = PlanStatus::Empty;
    }

    pub fn plan(&self) -> &[ActionBlock] {
        &self.plan
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn status(&self) -> PlanStatus {
        self.status
    }

    /// True when the reasoning phase should replan.
    pub fn needs_replan(&self) -> bool {
        matches!(
            self.status,
            PlanStatus::Empty | PlanStatus::Finished | PlanStatus::Failed
        )
    }

    pub fn mark_failed(&mut self) {
        self.status = PlanStatus::Failed;
    }

    pub fn next_block(&mut self) -> Option<ActionBlock> {
        if self.status != PlanStatus::Running {
            return None;
        }
        let block = self.plan.get(self.cursor).cloned();
        self.cursor += 1;
        if self.cursor >= self.plan.len() {
            self.status = PlanStatus::Finished;
        }
        block
    }

    /// Clears the plan and decomposes the root again over a copy of
    /// `beliefs`.
    ///
    /// If no decomposition succeeds the plan is left empty. Exceeding the
    /// expansion limit leaves it empty too, with status `Failed`.
    pub fn replan(&mut self, beliefs: &BeliefSet, effects: &EffectTable) -> ReplanReport {
        self.plan.clear();
        self.cursor = 0;
        let mut s = Search {
            net: &self.network,
            effects,
            verbose: self.verbose,
            agenda: push(
                None,
                Pending {
                    task: TaskRef::Compound(self.root),
                    parent: None,
                    group: None,
                },
            ),
            planned: Vec::new(),
            beliefs: beliefs.clone(),
            choices: Vec::new(),
            next_group: 0,
            expansions: 0,
            lines: Vec::new(),
        };
        let outcome = s.run(self.expansion_limit);
        let mut report = ReplanReport {
            beliefs: beliefs.clone(),
            trace: Vec::new(),
            expansions: s.expansions,
            lines: std::mem::take(&mut s.lines),
            error: None,
        };
        match outcome {
            Ok(true) => {
                report.trace = s.planned.iter().map(|p| p.primitive).collect();
                report.beliefs = std::mem::take(&mut s.beliefs);
                let planned = std::mem::take(&mut s.planned);
                self.plan = self.assemble(&planned);
                self.status = if self.plan.is_empty() {
                    PlanStatus::Empty
                } else {
                    PlanStatus::Running
                };
            }
            Ok(false) => {
                report.lines.push("no decomposition found".to_owned());
                self.status = PlanStatus::Empty;
            }
            Err(e) => {
                report.lines.push(format!("replan failed: {e}"));
                report.error = Some(e);
                self.status = PlanStatus::Failed;
            }
        }
        report
    }

    fn assemble(&self, planned: &[Planned]) -> Vec<ActionBlock> {
        let mut plan: Vec<ActionBlock> = Vec::new();
        let mut last_group = None;
        for p in planned {
            let pt = self
                .network
                .primitive(p.primitive)
                .expect("planned primitive exists");
            let actions = pt.block.actions.iter().cloned().map(|mut a| {
                a.origin = Some(pt.name.clone());
                a
            });
            match p.group {
                Some(g) if last_group == Some(g.id) => {
                    plan.last_mut().expect("group has a block").actions.extend(actions);
                }
                Some(g) => {
                    let name = self.network.method(g.method).map(|m| m.name.clone()).ok();
                    plan.push(ActionBlock {
                        actions: actions.collect(),
                        parent: Some(g.method),
                        label: name,
                    });
                }
                None => plan.push(ActionBlock {
                    actions: actions.collect(),
                    parent: p.parent,
                    label: Some(pt.name.clone()),
                }),
            }
            last_group = p.group.map(|g| g.id);
        }
        plan
    }
}
