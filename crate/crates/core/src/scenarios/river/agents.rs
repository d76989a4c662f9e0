//! Industry, treatment plant and household agents.

use std::sync::Arc;

use rand::Rng;

use crate::actions::{Action, ActionBlock, ActionError, ExternalActionRequest, Outgoing};
use crate::agent::{AgentId, State};
use crate::behavior::{Behavior, HookError};
use crate::beliefs::{BeliefSet, BeliefValue, ConditionSpec, Conditions};
use crate::ctx::StepCtx;
use crate::htn::{Effect, EffectOp, HtnPlanner, Method, PrimitiveTask, TaskNetwork};
use crate::message::{Message, Performative};
use crate::registry::Registry;

use super::config::{treatment_price, HouseholdParams, IndustryParams, WwtpParams};
use super::environment::RiverEnv;
use super::water::{Concentrations, WaterMass};

pub const INDUSTRY: &str = "river.industry";
pub const WWTP: &str = "river.wwtp";
pub const HOUSEHOLD: &str = "river.household";

const TO_SEWER: &str = "river.to_sewer";
const SETTLE: &str = "river.industry.settle";
const PRODUCE: &str = "river.industry.produce";
const PROPOSE: &str = "river.industry.propose";
const AWAIT: &str = "river.industry.await";
const REPORT: &str = "river.industry.report";
const RESET: &str = "river.industry.reset";
const TREAT: &str = "river.wwtp.treat";
const QUOTE: &str = "river.wwtp.quote";
const CLEAR: &str = "river.wwtp.clear";
const INFORM: &str = "river.household.inform";

/// Smallest volume worth moving, m³.
const EPS: f64 = 1e-9;

fn conc_value(c: &Concentrations) -> BeliefValue {
    c.to_vec().into()
}

fn conc_from(v: &BeliefValue) -> Option<Concentrations> {
    let list = v.as_list()?;
    let mut c = [0.0; 5];
    if list.len() != c.len() {
        return None;
    }
    for (slot, x) in c.iter_mut().zip(list) {
        *slot = x.as_f64()?;
    }
    Some(c)
}

fn mass_of(b: &BeliefSet, volume_key: &str) -> Result<WaterMass, ActionError> {
    let volume = b.get_f64(volume_key).ok_or(ActionError::MissingBelief(volume_key.into()))?;
    let conc = b.get("conc").and_then(conc_from).ok_or(ActionError::MissingBelief("conc".into()))?;
    Ok(WaterMass::new(volume, conc))
}

fn index(req: &ExternalActionRequest, key: &str) -> Result<usize, ActionError> {
    usize::try_from(req.kwarg_i64(key)?).map_err(|_| ActionError::failed(format!("negative {key}")))
}

fn num(b: &BeliefSet, key: &str) -> f64 {
    b.get_f64(key).unwrap_or(0.0)
}

/// Where a discharger's water goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Connection {
    pub plant: usize,
    pub distance: usize,
    pub wwtp: AgentId,
}

impl Connection {
    fn beliefs(self) -> BeliefSet {
        BeliefSet::new()
            .with("plant", self.plant)
            .with("distance", self.distance)
            .with("wwtp", self.wwtp.0 as i64)
    }
}

pub fn industry_beliefs(p: &IndustryParams, link: Connection) -> BeliefSet {
    let mut b = link.beliefs();
    for (k, v) in [
        ("storage", 0.0),
        ("capacity", p.storage_capacity),
        ("max_production", p.max_production),
        ("vpt_min", p.volume_per_tn.0),
        ("vpt_max", p.volume_per_tn.1),
        ("revenue", p.revenue_per_tn),
        ("balance", 0.0),
        ("permitted", 0.0),
        ("price", 0.0),
        ("discharged", 0.0),
    ] {
        b.set(k, v);
    }
    b.set("conc", conc_value(&p.conc));
    b.set("location", p.location);
    b.set("awaiting", false);
    b.set("stocked", false);
    b
}

pub fn wwtp_beliefs(plant: usize) -> BeliefSet {
    BeliefSet::new()
        .with("plant", plant)
        .with("free", 0.0)
        .with("proposals", Vec::<BeliefValue>::new())
        .with("household_inflow", 0.0)
}

pub fn household_beliefs(p: &HouseholdParams, link: Connection) -> BeliefSet {
    link.beliefs()
        .with("discharged", p.discharge.volume)
        .with("conc", conc_value(&p.discharge.conc))
}

pub struct Industry;

impl Behavior<RiverEnv> for Industry {
    fn process(&self, ctx: &mut StepCtx<'_>, msg: &Message, state: &mut State) -> Result<Option<Message>, HookError> {
        let b = &mut state.beliefs;
        match msg.performative {
            Performative::AcceptProposal => {
                b.set("permitted", num(&msg.content, "volume"));
                b.set("price", num(&msg.content, "price"));
                b.set("awaiting", false);
            }
            Performative::RejectProposal => {
                // this round's water stays in the tank
                b.set("awaiting", false);
            }
            p => ctx.log(format!("industry ignores {p}")),
        }
        Ok(None)
    }
}

pub struct Wwtp {
    params: Arc<Vec<WwtpParams>>,
}

impl Behavior<RiverEnv> for Wwtp {
    fn perceive(&self, ctx: &mut StepCtx<'_>, env: &RiverEnv, mut b: BeliefSet) -> Result<BeliefSet, HookError> {
        let i = b.get_i64("plant").unwrap_or(0) as usize;
        let (Some(p), Some(w)) = (env.plants.get(i), self.params.get(i)) else {
            return Err(HookError::failed(format!("no plant {i}")));
        };
        let treating = p.treating();
        let free = (w.entrance_capacity - p.entrance.volume) + (w.treatment_capacity - treating) - p.in_transit();
        b.set("entrance", p.entrance.volume);
        b.set("treating", treating);
        b.set("in_transit", p.in_transit());
        b.set("free", free);
        if treating < w.operative_threshold * w.treatment_capacity {
            ctx.log(format!("{}: below operative threshold ({treating:.1} m3 in treatment)", w.name));
        }
        if ctx.verbose() {
            ctx.log(format!(
                "{}: entrance SS {:.1} g/m3, exit SS {:.1} g/m3",
                w.name, p.entrance.conc[0], p.last_exit.conc[0]
            ));
        }
        Ok(b)
    }

    fn process(&self, ctx: &mut StepCtx<'_>, msg: &Message, state: &mut State) -> Result<Option<Message>, HookError> {
        let b = &mut state.beliefs;
        let Some(sender) = msg.sender.agent() else {
            return Ok(None);
        };
        match msg.performative {
            Performative::Propose => {
                let mut list = b.get_list("proposals").map(<[_]>::to_vec).unwrap_or_default();
                let mut p = msg.content.clone();
                p.set("sender", sender.0 as i64);
                list.push(p.into());
                b.set("proposals", list);
            }
            Performative::Inform => {
                b.set("household_inflow", num(b, "household_inflow") + num(&msg.content, "volume"));
            }
            p => ctx.log(format!("plant ignores {p}")),
        }
        Ok(None)
    }
}

pub fn registry(wwtps: Vec<WwtpParams>) -> Registry<RiverEnv> {
    let params = Arc::new(wwtps);
    let mut r = Registry::new();
    r.register_behavior(INDUSTRY, Industry);
    r.register_behavior(WWTP, Wwtp { params: params.clone() });
    r.actions
        .register_internal(SETTLE, |_, b, _, _| {
            let permitted = num(b, "permitted");
            let price = num(b, "price");
            let mut volume = permitted.min(num(b, "storage"));
            let mut cost = if permitted > 0.0 { price * volume / permitted } else { 0.0 };
            let balance = num(b, "balance");
            if cost > balance {
                // discharge what the balance pays for
                let scale = (balance / cost).max(0.0);
                volume *= scale;
                cost *= scale;
            }
            b.set("storage", num(b, "storage") - volume);
            b.set("balance", balance - cost);
            b.set("discharged", volume);
            b.set("permitted", 0.0);
            b.set("price", 0.0);
            Ok(())
        })
        .register_internal(PRODUCE, |ctx, b, _, _| {
            let (lo, hi) = (num(b, "vpt_min"), num(b, "vpt_max"));
            let vpt = if hi > lo { ctx.rng().gen_range(lo..=hi) } else { lo };
            let storage = num(b, "storage");
            let free = (num(b, "capacity") - storage).max(0.0);
            let tons = if vpt > 0.0 { (free / vpt).min(num(b, "max_production")) } else { 0.0 };
            let stored = (storage + tons * vpt).min(num(b, "capacity"));
            b.set("storage", stored);
            b.set("balance", num(b, "balance") + tons * num(b, "revenue"));
            b.set("stocked", stored > EPS);
            Ok(())
        })
        .register_message(PROPOSE, |_, b, _, _, _| {
            let wwtp = AgentId(b.get_i64("wwtp").ok_or(ActionError::MissingBelief("wwtp".into()))? as u64);
            let m = mass_of(b, "storage")?;
            let content = BeliefSet::new().with("volume", m.volume).with("conc", conc_value(&m.conc));
            Ok(vec![Outgoing::new(wwtp, Performative::Propose, content)])
        })
        .register_internal(AWAIT, |_, b, _, _| {
            b.set("awaiting", true);
            Ok(())
        })
        .register_internal(RESET, |_, b, _, _| {
            b.set("discharged", 0.0);
            Ok(())
        })
        .register_internal(CLEAR, |_, b, _, _| {
            b.set("proposals", Vec::<BeliefValue>::new());
            b.set("household_inflow", 0.0);
            Ok(())
        })
        .register_message(INFORM, |_, b, _, _, _| {
            let wwtp = AgentId(b.get_i64("wwtp").ok_or(ActionError::MissingBelief("wwtp".into()))? as u64);
            let content = BeliefSet::new().with("volume", num(b, "discharged"));
            Ok(vec![Outgoing::new(wwtp, Performative::Inform, content)])
        });
    let quote_params = params.clone();
    r.actions.register_message(QUOTE, move |_, b, _, _, _| {
        let i = b.get_i64("plant").unwrap_or(0) as usize;
        let w = quote_params.get(i).ok_or_else(|| ActionError::failed(format!("no plant {i}")))?;
        let mut free = num(b, "free") - num(b, "household_inflow");
        let mut out = Vec::new();
        for p in b.get_list("proposals").unwrap_or_default() {
            let p = p.as_map().ok_or_else(|| ActionError::failed("malformed proposal"))?;
            let sender = AgentId(p.get_i64("sender").unwrap_or(0) as u64);
            let mass = mass_of(p, "volume")?;
            match treatment_price(w, &mass, free) {
                Ok(price) => {
                    free -= mass.volume;
                    let content = BeliefSet::new().with("volume", mass.volume).with("price", price);
                    out.push(Outgoing::new(sender, Performative::AcceptProposal, content));
                }
                Err(_) => out.push(Outgoing::new(sender, Performative::RejectProposal, BeliefSet::new())),
            }
        }
        Ok(out)
    });
    r.register_external(TO_SEWER, |env: &mut RiverEnv, req| {
        let volume = req.kwarg_f64("discharged")?;
        if volume <= EPS {
            return Ok(());
        }
        let conc = conc_from(req.kwarg("conc")?).ok_or_else(|| ActionError::failed("bad conc"))?;
        env.to_sewer(index(req, "plant")?, index(req, "distance")?, WaterMass::new(volume, conc))
            .ok_or_else(|| ActionError::failed("no such plant"))
    });
    r.register_external(REPORT, |env: &mut RiverEnv, req| {
        let s = &mut env.current;
        s.industries += 1;
        s.storage += req.kwarg_f64("storage")?;
        s.discharged += req.kwarg_f64("discharged")?;
        s.profit += req.kwarg_f64("balance")?;
        Ok(())
    });
    r.register_external(TREAT, move |env: &mut RiverEnv, req| {
        let i = index(req, "plant")?;
        let w = params.get(i).ok_or_else(|| ActionError::failed(format!("no plant {i}")))?;
        env.treat(i, w).map(|_| ()).ok_or_else(|| ActionError::failed("no such plant"))
    });
    r
}

fn external(body: &str, keys: &[&str]) -> Action {
    Action::external(body).forward(keys.iter().copied()).expect("external action")
}

fn maybe(n: &mut TaskNetwork, name: &str, when: Conditions, task: crate::htn::PrimitiveId, skip: &str) -> crate::htn::CompoundId {
    let c = n.add_compound(format!("{name}?"));
    n.add_method(c, Method::new(name).when(when).subtask(task), None).expect("compound exists");
    n.add_method(c, Method::new(skip), None).expect("compound exists");
    c
}

pub fn industry_planner() -> HtnPlanner {
    let mut n = TaskNetwork::new();
    let root = n.add_compound("Industry");
    let discharge = n.add_primitive(
        PrimitiveTask::new(
            "Discharge",
            ActionBlock::new()
                .then(Action::internal(SETTLE))
                .then(external(TO_SEWER, &["discharged", "conc", "plant", "distance"])),
        )
        .effect(Effect::new("permitted", EffectOp::Rep, 0.0)),
    );
    let produce = n.add_primitive(
        PrimitiveTask::new("Produce", ActionBlock::new().then(Action::internal(PRODUCE)))
            .effect(Effect::new("stocked", EffectOp::Rep, true)),
    );
    let propose = n.add_primitive(
        PrimitiveTask::new(
            "Propose",
            ActionBlock::new().then(Action::message(PROPOSE)).then(Action::internal(AWAIT)),
        )
        .effect(Effect::new("awaiting", EffectOp::Rep, true)),
    );
    let report = n.add_primitive(PrimitiveTask::new(
        "Report",
        ActionBlock::new()
            .then(external(REPORT, &["storage", "discharged", "balance"]))
            .then(Action::internal(RESET)),
    ));
    let maybe_discharge = maybe(
        &mut n,
        "Discharge",
        Conditions::new().with("permitted", ConditionSpec::at_least(EPS)),
        discharge,
        "Keep",
    );
    let maybe_produce = maybe(
        &mut n,
        "Produce",
        Conditions::new().with("awaiting", ConditionSpec::exact(false)),
        produce,
        "Wait",
    );
    let maybe_propose = maybe(
        &mut n,
        "Propose",
        Conditions::new()
            .with("awaiting", ConditionSpec::exact(false))
            .with("stocked", ConditionSpec::exact(true)),
        propose,
        "Hold",
    );
    let operate = Method::new("Operate")
        .subtask(maybe_discharge)
        .subtask(maybe_produce)
        .subtask(maybe_propose)
        .subtask(report)
        .appending();
    n.add_method(root, operate, None).expect("root exists");
    HtnPlanner::new(n, root)
}

pub fn wwtp_planner() -> HtnPlanner {
    let mut n = TaskNetwork::new();
    let root = n.add_compound("WWTP");
    let treat = n.add_primitive(PrimitiveTask::new("Treat", ActionBlock::new().then(external(TREAT, &["plant"]))));
    let quote = n.add_primitive(PrimitiveTask::new("Quote", ActionBlock::new().then(Action::message(QUOTE))));
    let clear = n.add_primitive(PrimitiveTask::new("Clear", ActionBlock::new().then(Action::internal(CLEAR))));
    let m = Method::new("Operate").subtask(treat).subtask(quote).subtask(clear).appending();
    n.add_method(root, m, None).expect("root exists");
    HtnPlanner::new(n, root)
}

pub fn household_planner() -> HtnPlanner {
    let mut n = TaskNetwork::new();
    let root = n.add_compound("Household");
    let d = n.add_primitive(PrimitiveTask::new(
        "Discharge",
        ActionBlock::new()
            .then(external(TO_SEWER, &["discharged", "conc", "plant", "distance"]))
            .then(Action::message(INFORM)),
    ));
    n.add_method(root, Method::new("Discharge").subtask(d), None).expect("root exists");
    HtnPlanner::new(n, root)
}
