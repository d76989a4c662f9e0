// A behavior that overrides every hook and prints the order in which the
// step task calls them. Also switches roles through `role_check`.

use std::sync::{Arc, Mutex};

use goalsim::actions::{Action, ActionBlock, Outgoing};
use goalsim::agent::State;
use goalsim::behavior::{default_execute, default_reason, Behavior, Executed, HookError, World};
use goalsim::beliefs::BeliefSet;
use goalsim::controller::{AgentSpec, Controller};
use goalsim::ctx::StepCtx;
use goalsim::executor::ExecutorConfig;
use goalsim::message::{Message, Performative};
use goalsim::registry::Registry;

type Calls = Arc<Mutex<Vec<(u64, &'static str)>>>;

struct Traced(Calls);

impl Traced {
    fn note(&self, ctx: &StepCtx<'_>, phase: &'static str) {
        self.0.lock().expect("not poisoned").push((ctx.step(), phase));
    }
}

impl Behavior<()> for Traced {
    fn perceive(&self, ctx: &mut StepCtx<'_>, _: &(), b: BeliefSet) -> Result<BeliefSet, HookError> {
        self.note(ctx, "perceive");
        Ok(b)
    }

    fn process(&self, ctx: &mut StepCtx<'_>, _: &Message, _: &mut State) -> Result<Option<Message>, HookError> {
        self.note(ctx, "process");
        Ok(None)
    }

    fn goal_check(&self, ctx: &mut StepCtx<'_>, _: &mut State) -> Result<(), HookError> {
        self.note(ctx, "goal_check");
        Ok(())
    }

    fn reason(&self, ctx: &mut StepCtx<'_>, w: World<'_, ()>, s: &mut State) -> Result<(), HookError> {
        self.note(ctx, "reason");
        default_reason(ctx, w, s);
        Ok(())
    }

    fn execute(&self, ctx: &mut StepCtx<'_>, w: World<'_, ()>, s: &mut State) -> Result<Executed, HookError> {
        self.note(ctx, "execute");
        Ok(default_execute(ctx, w, s))
    }

    fn role_check(&self, ctx: &mut StepCtx<'_>, b: &BeliefSet) -> Result<Option<String>, HookError> {
        self.note(ctx, "role_check");
        Ok((b.get_i64("heard").unwrap_or(0) >= 2).then(|| "quiet".to_owned()))
    }
}

pub fn run() -> Result<Vec<(u64, &'static str)>, Box<dyn std::error::Error>> {
    let calls: Calls = Arc::default();
    let mut r = Registry::new();
    r.register_behavior("traced", Traced(calls.clone()));
    r.actions.register_message("demo.hello", |ctx, _, dir, _, _| {
        Ok(dir
            .ids()
            .filter(|id| *id != ctx.id())
            .map(|id| Outgoing::new(id, Performative::Inform, BeliefSet::new()))
            .collect())
    });
    r.actions.register_internal("demo.count", |_, b, _, _| {
        b.set("heard", b.get_i64("heard").unwrap_or(0) + 1);
        Ok(())
    });
    let block = ActionBlock::new()
        .then(Action::message("demo.hello"))
        .then(Action::internal("demo.count"));
    let mut c = Controller::with_executor(r, (), ExecutorConfig::with_workers(1))?;
    c.generate_agent(AgentSpec::new("talker").behavior("traced").default_block(block));
    c.generate_agent(AgentSpec::new("listener").behavior("traced"));
    c.run(3)?;
    let calls = calls.lock().expect("not poisoned").clone();
    for (step, phase) in &calls {
        println!("step {step}: {phase}");
    }
    for id in c.ids().collect::<Vec<_>>() {
        println!("{id} now runs behavior {:?}", c.agent(id).map(|a| a.behavior.as_str()));
    }
    Ok(calls)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()?;
    Ok(())
}
