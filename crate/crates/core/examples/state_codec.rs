// Encodes an agent state (beliefs plus a planner mid-plan) to bytes,
// writes it to a file and reads it back.

use goalsim::actions::{Action, ActionBlock};
use goalsim::agent::State;
use goalsim::beliefs::BeliefSet;
use goalsim::codec::{self, Kind};
use goalsim::registry::EffectTable;
use goalsim::scenarios::ping;

pub fn run() -> Result<State, Box<dyn std::error::Error>> {
    let mut planner = ping::planner();
    let beliefs = ping::initial_beliefs();
    planner.replan(&beliefs, &EffectTable::default());
    let state = State::new(
        beliefs.with("nested", BeliefSet::new().with("ratio", 0.25).with("tags", vec!["a", "b"])),
        Some(planner),
    );
    let bytes = codec::encode_state(&state)?;
    println!("{} bytes, kind {:?}", bytes.len(), codec::peek_kind(&bytes)?);

    let dir = std::env::temp_dir().join(format!("goalsim-state-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("agent.state");
    std::fs::write(&path, &bytes)?;
    let back = codec::decode_state(&std::fs::read(&path)?)?;
    std::fs::remove_dir_all(&dir)?;
    assert_eq!(back, state);
    println!("round trip ok: {}", back.beliefs);

    let block = ActionBlock::new().then(Action::internal("x.y"));
    let wrong = codec::encode(Kind::Message, &block)?;
    println!("decoding a message as a state: {}", codec::decode_state(&wrong).unwrap_err());
    Ok(back)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()?;
    Ok(())
}
