// Loads river-basin parameters from TOML, with the two towns switched
// on, and runs a short simulation. Pass a path to use your own file.

use goalsim::executor::ExecutorConfig;
use goalsim::scenarios::river::{self, RiverConfig, Series};

pub fn run(path: Option<&str>) -> Result<Series, Box<dyn std::error::Error>> {
    let cfg = match path {
        Some(p) => RiverConfig::load(p)?,
        None => RiverConfig::from_toml(include_str!("../configs/river_towns.toml"))?,
    };
    println!(
        "{} sections, {} industries, {} households, {} plants",
        cfg.sections,
        river::industries(&cfg).len(),
        cfg.households.len(),
        cfg.wwtps.len()
    );
    let mut c = river::build(&cfg, ExecutorConfig::default())?;
    c.set_seed(3);
    c.run(12)?;
    let env = c.environment();
    for (w, p) in cfg.wwtps.iter().zip(&env.plants) {
        println!(
            "{}: received {:.1} m3, treated {:.1} m3, bypassed {:.1} m3",
            w.name, p.totals.arrived, p.totals.released, p.totals.bypassed
        );
    }
    river::write_csv(&env.history, std::io::stdout())?;
    Ok(Series::from_history(&env.history))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1);
    run(path.as_deref())?;
    Ok(())
}
