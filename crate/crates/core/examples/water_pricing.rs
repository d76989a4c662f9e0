// Water masses, river transport and the treatment price, without agents.

use goalsim::scenarios::river::{
    mix, river_advance, treatment_price, CostPreset, Penalty, WaterMass, WwtpParams, CLEANING_RATES, POLLUTANTS,
};

pub fn run() -> Result<f64, Box<dyn std::error::Error>> {
    let river_water = WaterMass::fresh(5.0);
    let effluent = WaterMass::new(2.0, [422.0, 450.0, 986.0, 59.0, 22.0]);
    let merged = mix(river_water, effluent);
    println!("mixed: {:.3} m3, {:?}", merged.volume, merged.conc);

    let mut river = vec![WaterMass::fresh(5.0); 5];
    river[0] = merged;
    for step in 1..=4 {
        river_advance(&mut river, WaterMass::fresh(5.0), &CLEANING_RATES);
        println!("after {step}: section {} {} = {:.2} g/m3", step + 1, POLLUTANTS[0], river[step].conc[0]);
    }

    let mut plant = WwtpParams::new("demo", 1);
    let standard = treatment_price(&plant, &effluent, 150.0)?;
    plant.costs = CostPreset::Premium;
    let premium = treatment_price(&plant, &effluent, 150.0)?;
    plant.penalty = Penalty::Linear { base: 1.0, slope: 2.0 };
    let crowded = treatment_price(&plant, &effluent, 10.0)?;
    println!("price: standard {standard:.2}, premium {premium:.2}, premium when nearly full {crowded:.2}");
    match treatment_price(&plant, &effluent, 1.0) {
        Ok(p) => println!("unexpected price {p}"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(standard)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()?;
    Ok(())
}
