// Default river basin: 100 industries, two treatment plants.
//
// cargo run --example river_basin -- [steps] [out.csv]

use goalsim::executor::ExecutorConfig;
use goalsim::scenarios::river::{self, dominant_period, first_positive_step, RiverConfig, Series};

pub fn run(steps: u64, csv_path: Option<&str>) -> Result<Series, Box<dyn std::error::Error>> {
    let cfg = RiverConfig::default();
    let mut c = river::build(&cfg, ExecutorConfig::default())?;
    c.run(steps)?;
    let history = &c.environment().history;
    let s = Series::from_history(history);
    for (i, r) in history.iter().enumerate() {
        println!(
            "step {:>3}  storage {:>7.2}  discharge {:>7.2}  profit {:>10.1}",
            r.step, s.storage[i], s.discharge[i], s.profit[i]
        );
    }
    println!("first discharge at step {:?}", first_positive_step(&s.discharge));
    println!("dominant period {:?}", dominant_period(&s.discharge, steps as usize / 2));
    if let Some(path) = csv_path {
        river::write_csv(history, std::fs::File::create(path)?)?;
        println!("wrote {path}");
    }
    Ok(s)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let steps = args.first().map(|s| s.parse()).transpose()?.unwrap_or(40);
    run(steps, args.get(1).map(String::as_str))?;
    Ok(())
}
