// A hand-built task network: method order, backtracking over a failed
// precondition, effects chaining into later conditions, and an
// append-merged method.

use goalsim::actions::{Action, ActionBlock};
use goalsim::beliefs::{BeliefSet, ConditionSpec, Conditions};
use goalsim::htn::{Effect, EffectOp, HtnPlanner, Method, PlanStatus, PrimitiveTask, TaskNetwork};
use goalsim::registry::EffectTable;

fn task(name: &str) -> PrimitiveTask {
    PrimitiveTask::new(name, ActionBlock::new().then(Action::internal(format!("demo.{name}"))))
}

pub fn run() -> Result<Vec<String>, Box<dyn std::error::Error>> {
    let mut n = TaskNetwork::new();
    let root = n.add_compound("Make tea");
    let boil = n.add_primitive(task("boil").effect(Effect::new("hot_water", EffectOp::Rep, true)));
    let buy = n.add_primitive(task("buy_tea").effect(Effect::new("tea", EffectOp::Add, 1)));
    let brew = n.add_primitive(
        task("brew")
            .when(
                Conditions::new()
                    .with("hot_water", ConditionSpec::exact(true))
                    .with("tea", ConditionSpec::at_least(1.0)),
            )
            .effect(Effect::new("tea", EffectOp::Sub, 1)),
    );
    let pour = n.add_primitive(task("pour"));
    // first method needs tea in the cupboard and fails on `brew`
    n.add_method(root, Method::new("From stock").subtask(boil).subtask(brew), None)?;
    let serve = n.add_compound("Serve");
    n.add_method(serve, Method::new("Brew and pour").subtask(brew).subtask(pour).appending(), None)?;
    n.add_method(root, Method::new("Shop first").subtask(buy).subtask(boil).subtask(serve), None)?;

    let mut planner = HtnPlanner::new(n, root);
    planner.verbose = true;
    let beliefs = BeliefSet::new().with("tea", 0).with("hot_water", false);
    let report = planner.replan(&beliefs, &EffectTable::default());
    for line in &report.lines {
        println!("  {line}");
    }
    assert_eq!(planner.status(), PlanStatus::Running);
    let mut labels = Vec::new();
    while let Some(block) = planner.next_block() {
        let names: Vec<_> = block.iter().map(|a| a.name.as_str()).collect();
        println!("block {:?}: {}", block.label, names.join(", "));
        labels.push(block.label.unwrap_or_default());
    }
    println!("simulated beliefs after planning: {}", report.beliefs);
    Ok(labels)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()?;
    Ok(())
}
