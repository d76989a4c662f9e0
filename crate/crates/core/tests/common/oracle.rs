// Random task networks and a brute-force planner to check the real one
// against. The oracle keeps its own tiny belief model (ints and bools) and
// its own condition/effect evaluation, and searches by plain recursion over
// the agenda.

use std::collections::BTreeMap;

use goalsim::actions::{Action, ActionBlock};
use goalsim::beliefs::{BeliefSet, BeliefValue, ConditionSpec, Conditions};
use goalsim::htn::{
    apply_all, CompoundId, Effect, EffectOp, HtnPlanner, Method, MethodRef, PlanStatus, PrimitiveId, PrimitiveTask,
    TaskNetwork, TaskRef,
};
use goalsim::registry::EffectTable;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const KEYS: [&str; 4] = ["x", "y", "f", "z"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Val {
    I(i64),
    B(bool),
}

pub type Beliefs = BTreeMap<&'static str, Val>;

#[derive(Clone, Copy, Debug)]
pub enum Cond {
    Eq(Val),
    Ge(i64),
    Le(i64),
}

#[derive(Clone, Copy, Debug)]
pub enum Eff {
    Add(i64),
    Sub(i64),
    Mul(i64),
    Rep(Val),
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum T {
    C(usize),
    P(usize),
}

#[derive(Clone, Debug)]
pub struct MethodSpec {
    pub name: String,
    pub conds: Vec<(&'static str, Cond)>,
    pub subtasks: Vec<T>,
    pub append: bool,
}

#[derive(Clone, Debug)]
pub struct PrimSpec {
    pub name: String,
    pub pre: Vec<(&'static str, Cond)>,
    pub effects: Vec<(&'static str, Eff)>,
    pub actions: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Case {
    pub compounds: Vec<Vec<MethodSpec>>,
    pub prims: Vec<PrimSpec>,
    pub beliefs: Beliefs,
}

fn val(rng: &mut ChaCha8Rng, key: &str) -> Val {
    if key == "f" {
        Val::B(rng.gen())
    } else {
        Val::I(rng.gen_range(-2..=3))
    }
}

fn cond(rng: &mut ChaCha8Rng) -> (&'static str, Cond) {
    let key = *KEYS.choose(rng).expect("keys");
    let c = match rng.gen_range(0..4) {
        0 | 1 => Cond::Eq(val(rng, key)),
        2 => Cond::Ge(rng.gen_range(-2..=3)),
        _ => Cond::Le(rng.gen_range(-2..=3)),
    };
    (key, c)
}

fn eff(rng: &mut ChaCha8Rng) -> (&'static str, Eff) {
    let key = *KEYS.choose(rng).expect("keys");
    let e = match rng.gen_range(0..6) {
        0 => Eff::Add(rng.gen_range(-2..=2)),
        1 => Eff::Sub(rng.gen_range(-2..=2)),
        2 => Eff::Mul(rng.gen_range(-1..=2)),
        3 | 4 => Eff::Rep(val(rng, key)),
        _ => Eff::Not,
    };
    (key, e)
}

impl Case {
    /// Up to six tasks; compound `i` only refers to compounds after it, so
    /// the network is acyclic.
    pub fn random(seed: u64) -> Case {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = rng.gen_range(2..=6);
        let nc = rng.gen_range(1..total);
        let np = total - nc;
        let prims = (0..np)
            .map(|i| PrimSpec {
                name: format!("p{i}"),
                pre: (0..rng.gen_range(0..=2)).map(|_| cond(&mut rng)).collect(),
                effects: (0..rng.gen_range(0..=2)).map(|_| eff(&mut rng)).collect(),
                actions: (0..rng.gen_range(1..=2)).map(|k| format!("t.p{i}_{k}")).collect(),
            })
            .collect();
        let compounds = (0..nc)
            .map(|c| {
                (0..rng.gen_range(1..=3))
                    .map(|m| {
                        let subtasks = (0..rng.gen_range(0..=3))
                            .map(|_| {
                                let later = nc - c - 1;
                                if later > 0 && rng.gen_bool(0.35) {
                                    T::C(rng.gen_range(c + 1..nc))
                                } else {
                                    T::P(rng.gen_range(0..np))
                                }
                            })
                            .collect();
                        MethodSpec {
                            name: format!("c{c}m{m}"),
                            conds: (0..rng.gen_range(0..=2)).map(|_| cond(&mut rng)).collect(),
                            subtasks,
                            append: rng.gen_bool(0.4),
                        }
                    })
                    .collect()
            })
            .collect();
        let mut beliefs = Beliefs::new();
        for k in KEYS {
            if k != "z" || rng.gen_bool(0.5) {
                beliefs.insert(k, val(&mut rng, k));
            }
        }
        Case {
            compounds,
            prims,
            beliefs,
        }
    }

    pub fn belief_set(&self) -> BeliefSet {
        to_belief_set(&self.beliefs)
    }

    pub fn planner(&self) -> HtnPlanner {
        let mut n = TaskNetwork::new();
        let cids: Vec<CompoundId> = (0..self.compounds.len()).map(|i| n.add_compound(format!("c{i}"))).collect();
        let pids: Vec<PrimitiveId> = self
            .prims
            .iter()
            .map(|p| {
                let block = p
                    .actions
                    .iter()
                    .fold(ActionBlock::new(), |b, a| b.then(Action::internal(a.clone())));
                let mut t = PrimitiveTask::new(p.name.clone(), block).when(conditions(&p.pre));
                for (k, e) in &p.effects {
                    t = t.effect(effect(k, *e));
                }
                n.add_primitive(t)
            })
            .collect();
        for (c, methods) in self.compounds.iter().enumerate() {
            for m in methods {
                let mut spec = Method::new(m.name.clone()).when(conditions(&m.conds));
                for t in &m.subtasks {
                    spec = spec.subtask(match *t {
                        T::C(i) => TaskRef::from(cids[i]),
                        T::P(i) => TaskRef::from(pids[i]),
                    });
                }
                if m.append {
                    spec = spec.appending();
                }
                n.add_method(cids[c], spec, None).expect("compound exists");
            }
        }
        HtnPlanner::new(n, cids[0])
    }
}

fn to_value(v: Val) -> BeliefValue {
    match v {
        Val::I(i) => BeliefValue::Int(i),
        Val::B(b) => BeliefValue::Bool(b),
    }
}

pub fn to_belief_set(b: &Beliefs) -> BeliefSet {
    b.iter().fold(BeliefSet::new(), |s, (k, v)| s.with(*k, to_value(*v)))
}

fn conditions(cs: &[(&'static str, Cond)]) -> Conditions {
    // later entries for the same key replace earlier ones, as in the oracle
    cs.iter().fold(Conditions::new(), |acc, (k, c)| {
        acc.with(
            *k,
            match *c {
                Cond::Eq(v) => ConditionSpec::exact(to_value(v)),
                Cond::Ge(x) => ConditionSpec::at_least(x as f64),
                Cond::Le(x) => ConditionSpec::at_most(x as f64),
            },
        )
    })
}

fn effect(k: &str, e: Eff) -> Effect {
    match e {
        Eff::Add(x) => Effect::new(k, EffectOp::Add, x),
        Eff::Sub(x) => Effect::new(k, EffectOp::Sub, x),
        Eff::Mul(x) => Effect::new(k, EffectOp::Mul, x),
        Eff::Rep(v) => Effect::new(k, EffectOp::Rep, to_value(v)),
        Eff::Not => Effect::not(k),
    }
}

// ---- the oracle ----

fn holds(b: &Beliefs, cs: &[(&'static str, Cond)]) -> bool {
    let mut last: BTreeMap<&str, Cond> = BTreeMap::new();
    for (k, c) in cs {
        last.insert(k, *c);
    }
    last.iter().all(|(k, c)| match (b.get(k), c) {
        (Some(v), Cond::Eq(want)) => v == want,
        (Some(Val::I(v)), Cond::Ge(x)) => v >= x,
        (Some(Val::I(v)), Cond::Le(x)) => v <= x,
        _ => false,
    })
}

/// `None` when an effect cannot apply.
pub fn apply(b: &Beliefs, effects: &[(&'static str, Eff)]) -> Option<Beliefs> {
    let mut out = b.clone();
    for (k, e) in effects {
        let new = match (*e, out.get(k).copied()) {
            (Eff::Rep(v), _) => v,
            (Eff::Not, Some(Val::B(x))) => Val::B(!x),
            (Eff::Add(x), Some(Val::I(v))) => Val::I(v.checked_add(x)?),
            (Eff::Sub(x), Some(Val::I(v))) => Val::I(v.checked_sub(x)?),
            (Eff::Mul(x), Some(Val::I(v))) => Val::I(v.checked_mul(x)?),
            _ => return None,
        };
        out.insert(k, new);
    }
    Some(out)
}

/// A planned primitive: index, the method that listed it, and the append
/// group it belongs to (instance number and owning method).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub prim: usize,
    pub parent: Option<(usize, usize)>,
    pub group: Option<(u32, (usize, usize))>,
}

#[derive(Clone, Copy)]
struct Item {
    task: T,
    parent: Option<(usize, usize)>,
    group: Option<(u32, (usize, usize))>,
}

struct Search<'a> {
    case: &'a Case,
    groups: u32,
}

impl Search<'_> {
    fn solve(&mut self, agenda: &[Item], b: &Beliefs, acc: &mut Vec<Step>) -> Option<Beliefs> {
        let Some((first, rest)) = agenda.split_first() else {
            return Some(b.clone());
        };
        match first.task {
            T::P(p) => {
                let spec = &self.case.prims[p];
                if !holds(b, &spec.pre) {
                    return None;
                }
                let next = apply(b, &spec.effects)?;
                acc.push(Step {
                    prim: p,
                    parent: first.parent,
                    group: first.group,
                });
                let r = self.solve(rest, &next, acc);
                if r.is_none() {
                    acc.pop();
                }
                r
            }
            T::C(c) => {
                for (i, m) in self.case.compounds[c].iter().enumerate() {
                    if !holds(b, &m.conds) {
                        continue;
                    }
                    let group = first.group.or_else(|| {
                        m.append.then(|| {
                            self.groups += 1;
                            (self.groups, (c, i))
                        })
                    });
                    let mut next: Vec<Item> = m
                        .subtasks
                        .iter()
                        .map(|&task| Item {
                            task,
                            parent: Some((c, i)),
                            group,
                        })
                        .collect();
                    next.extend_from_slice(rest);
                    let mark = acc.len();
                    if let Some(r) = self.solve(&next, b, acc) {
                        return Some(r);
                    }
                    acc.truncate(mark);
                }
                None
            }
        }
    }
}

/// First decomposition of compound 0 in depth-first, method-order search,
/// with the beliefs it ends in.
pub fn oracle_plan(case: &Case) -> Option<(Vec<Step>, Beliefs)> {
    let mut s = Search { case, groups: 0 };
    let mut acc = Vec::new();
    let root = Item {
        task: T::C(0),
        parent: None,
        group: None,
    };
    let end = s.solve(&[root], &case.beliefs, &mut acc)?;
    Some((acc, end))
}

/// Expected block: label, parent method and per-action (name, origin).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockShape {
    pub label: String,
    pub parent: Option<(usize, usize)>,
    pub actions: Vec<(String, String)>,
}

pub fn merge(case: &Case, steps: &[Step]) -> Vec<BlockShape> {
    let mut out: Vec<BlockShape> = Vec::new();
    let mut last_group = None;
    for s in steps {
        let p = &case.prims[s.prim];
        let actions = p.actions.iter().map(|a| (a.clone(), p.name.clone()));
        match s.group {
            Some((g, _)) if last_group == Some(g) => out.last_mut().expect("open block").actions.extend(actions),
            Some((_, (c, m))) => out.push(BlockShape {
                label: case.compounds[c][m].name.clone(),
                parent: Some((c, m)),
                actions: actions.collect(),
            }),
            None => out.push(BlockShape {
                label: p.name.clone(),
                parent: s.parent,
                actions: actions.collect(),
            }),
        }
        last_group = s.group.map(|(g, _)| g);
    }
    out
}

pub fn shape_of(block: &ActionBlock) -> BlockShape {
    BlockShape {
        label: block.label.clone().unwrap_or_default(),
        parent: block.parent.map(|m: MethodRef| (m.compound.0 as usize, m.index)),
        actions: block
            .actions
            .iter()
            .map(|a| (a.body.clone(), a.origin.clone().unwrap_or_default()))
            .collect(),
    }
}

/// Checks one random network against the oracle. Returns a description of
/// the first disagreement.
pub fn check(seed: u64) -> Result<(), String> {
    let case = Case::random(seed);
    let mut planner = case.planner();
    let start = case.belief_set();
    let report = planner.replan(&start, &EffectTable::default());
    if let Some(e) = &report.error {
        return Err(format!("planner error {e}"));
    }
    match oracle_plan(&case) {
        None => {
            if planner.status() != PlanStatus::Empty || !planner.plan().is_empty() {
                return Err(format!("oracle found nothing, planner status {:?}", planner.status()));
            }
            if report.beliefs != start || !report.trace.is_empty() {
                return Err("failed search left traces".into());
            }
        }
        Some((steps, end)) => {
            let trace: Vec<PrimitiveId> = steps.iter().map(|s| PrimitiveId(s.prim as u32)).collect();
            if report.trace != trace {
                return Err(format!("trace {:?} != {:?}", report.trace, trace));
            }
            let want = merge(&case, &steps);
            let got: Vec<_> = planner.plan().iter().map(shape_of).collect();
            if got != want {
                return Err(format!("blocks {got:?} != {want:?}"));
            }
            let status = if want.is_empty() { PlanStatus::Empty } else { PlanStatus::Running };
            if planner.status() != status {
                return Err(format!("status {:?} != {status:?}", planner.status()));
            }
            if report.beliefs != to_belief_set(&end) {
                return Err(format!("beliefs {:?} != {end:?}", report.beliefs));
            }
        }
    }
    Ok(())
}

/// Replays the effects of the traced primitives from the starting beliefs.
pub fn replay(seed: u64) -> Result<(), String> {
    let case = Case::random(seed);
    let mut planner = case.planner();
    let start = case.belief_set();
    let report = planner.replan(&start, &EffectTable::default());
    let mut b = start.clone();
    for p in &report.trace {
        let task = planner.network().primitive(*p).map_err(|e| e.to_string())?;
        apply_all(&task.effects, &mut b, &EffectTable::default()).map_err(|e| e.to_string())?;
    }
    if b != report.beliefs {
        return Err(format!("replayed {b:?} != simulated {:?}", report.beliefs));
    }
    Ok(())
}
