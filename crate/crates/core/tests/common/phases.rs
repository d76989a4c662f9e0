// A behavior that records every hook call, with step hooks and an external
// action recording into the same log. Used to check the step structure.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use goalsim::actions::{Action, ActionBlock, Outgoing};
use goalsim::agent::{AgentId, State};
use goalsim::behavior::{default_execute, default_reason, Behavior, Executed, HookError, World};
use goalsim::beliefs::BeliefSet;
use goalsim::controller::{AgentSpec, Controller};
use goalsim::ctx::StepCtx;
use goalsim::executor::ExecutorConfig;
use goalsim::message::{Message, Performative};
use goalsim::registry::Registry;
use rand::seq::IteratorRandom;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub step: u64,
    pub agent: Option<AgentId>,
    pub what: &'static str,
}

type Log = Arc<Mutex<Vec<Event>>>;

struct Recorder(Log);

impl Recorder {
    fn push(&self, ctx: &StepCtx<'_>, what: &'static str) {
        self.0.lock().unwrap().push(Event {
            step: ctx.step(),
            agent: Some(ctx.id()),
            what,
        });
    }
}

impl Behavior<()> for Recorder {
    fn perceive(&self, ctx: &mut StepCtx<'_>, _: &(), b: BeliefSet) -> Result<BeliefSet, HookError> {
        self.push(ctx, "perceive");
        Ok(b)
    }
    fn process(&self, ctx: &mut StepCtx<'_>, _: &Message, _: &mut State) -> Result<Option<Message>, HookError> {
        self.push(ctx, "process");
        Ok(None)
    }
    fn goal_check(&self, ctx: &mut StepCtx<'_>, _: &mut State) -> Result<(), HookError> {
        self.push(ctx, "goal_check");
        Ok(())
    }
    fn reason(&self, ctx: &mut StepCtx<'_>, w: World<'_, ()>, s: &mut State) -> Result<(), HookError> {
        self.push(ctx, "reason");
        default_reason(ctx, w, s);
        Ok(())
    }
    fn execute(&self, ctx: &mut StepCtx<'_>, w: World<'_, ()>, s: &mut State) -> Result<Executed, HookError> {
        self.push(ctx, "execute");
        Ok(default_execute(ctx, w, s))
    }
    fn role_check(&self, ctx: &mut StepCtx<'_>, _: &BeliefSet) -> Result<Option<String>, HookError> {
        self.push(ctx, "role_check");
        Ok(None)
    }
}

fn build(agents: usize, workers: usize, log: &Log) -> Controller<()> {
    let mut r = Registry::new();
    r.register_behavior("rec", Recorder(log.clone()));
    r.actions.register_message("rec.poke", |ctx, _, dir, _, _| {
        let me = ctx.id();
        let peers = dir.ids().filter(|p| *p != me).choose_multiple(ctx.rng(), 2);
        Ok(peers
            .into_iter()
            .map(|p| Outgoing::new(p, Performative::Inform, BeliefSet::new()))
            .collect())
    });
    let ext = log.clone();
    r.register_external("rec.ext", move |_: &mut (), req| {
        ext.lock().unwrap().push(Event {
            step: 0,
            agent: Some(req.sender),
            what: "external",
        });
        Ok(())
    });
    let mut c = Controller::with_executor(r, (), ExecutorConfig::with_workers(workers)).unwrap();
    let (pre, post) = (log.clone(), log.clone());
    c.set_pre_step(Some(Box::new(move |_, t| {
        pre.lock().unwrap().push(Event {
            step: t,
            agent: None,
            what: "pre",
        })
    })));
    c.set_post_step(Some(Box::new(move |_, t| {
        post.lock().unwrap().push(Event {
            step: t,
            agent: None,
            what: "post",
        })
    })));
    for i in 0..agents {
        let block = ActionBlock::new()
            .then(Action::message("rec.poke"))
            .then(Action::external("rec.ext"));
        c.generate_agent(AgentSpec::new(format!("r{i}")).behavior("rec").default_block(block));
    }
    c
}

fn check_agent(seq: &[&str]) -> Result<usize, String> {
    let n = seq.len();
    let ok = n >= 5
        && seq[0] == "perceive"
        && seq[1..n - 4].iter().all(|p| *p == "process")
        && seq[n - 4..] == ["goal_check", "reason", "execute", "role_check"];
    if ok {
        Ok(n - 5)
    } else {
        Err(format!("bad phase sequence {seq:?}"))
    }
}

/// Runs `steps` steps and checks, for every step: the pre-step hook runs
/// first; each agent goes perceive, process per delivered message,
/// goal check, reason, execute, role check; external actions follow all
/// agent work; the post-step hook runs last; and messages sent in one step
/// are processed in the next.
pub fn check_phase_order(agents: usize, steps: u64, workers: usize) -> Result<(), String> {
    let log: Log = Arc::default();
    let mut c = build(agents, workers, &log);
    let metrics = c.run(steps).map_err(|e| e.to_string())?;
    let events = log.lock().unwrap().clone();
    let mut pos = 0;
    let mut delivered_before = 0;
    for t in 1..=steps {
        if events.get(pos).map(|e| (e.agent, e.what)) != Some((None, "pre")) || events[pos].step != t {
            return Err(format!("step {t}: does not start with the pre-step hook"));
        }
        let end = events[pos..]
            .iter()
            .position(|e| e.what == "post")
            .map(|i| pos + i)
            .ok_or(format!("step {t}: no post-step hook"))?;
        let body = &events[pos + 1..end];
        let first_ext = body.iter().position(|e| e.what == "external").unwrap_or(body.len());
        let (work, ext) = body.split_at(first_ext);
        if ext.iter().any(|e| e.what != "external") || ext.len() != agents {
            return Err(format!("step {t}: agent work after external actions"));
        }
        let mut per: BTreeMap<AgentId, Vec<&str>> = BTreeMap::new();
        for e in work {
            if e.step != t {
                return Err(format!("step {t}: event from step {}", e.step));
            }
            per.entry(e.agent.ok_or("hook inside agent work")?).or_default().push(e.what);
        }
        if per.len() != agents {
            return Err(format!("step {t}: {} agents ran", per.len()));
        }
        let processed = per.values().map(|s| check_agent(s)).sum::<Result<usize, _>>()?;
        if processed != delivered_before {
            return Err(format!("step {t}: processed {processed}, delivered {delivered_before}"));
        }
        delivered_before = metrics.steps[t as usize - 1].delivered;
        pos = end + 1;
    }
    if pos != events.len() {
        return Err("events after the last step".into());
    }
    Ok(())
}
