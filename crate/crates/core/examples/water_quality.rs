// Tracer transport on toy9: a reservoir source, travel times and the mass
// ledger, then the same run with decay.
//
// cargo run --example water_quality

use wdnflow::hydraulics::{simulate, SimulationOptions};
use wdnflow::quality::{mass_balance_error, simulate_quality, QualitySettings};
use wdnflow::scenario::bundled_network;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = wdnflow::inp::parse_inp(bundled_network("toy9").unwrap())?;
    let series = simulate(&net, SimulationOptions::new(86_400, 300), &[], &[])?;

    let mut settings = QualitySettings::default();
    settings.source_nodes.insert("R1".into(), 1.0);
    let states = simulate_quality(&series, &net, &settings)?;
    for id in ["J1", "J5", "J8"] {
        let i = net.node_index(id).unwrap();
        let arrival = states.iter().find(|s| s.node_concentration[i] > 0.99).map(|s| s.t);
        println!("{id}: reaches 0.99 mg/L at {arrival:?} s");
    }
    println!("mass ledger relative error {:.2e}", mass_balance_error(&states));

    settings.decay_rate_k = std::f64::consts::LN_2 / 3600.0;
    let decayed = simulate_quality(&series, &net, &settings)?;
    let last = decayed.last().unwrap();
    let j8 = net.node_index("J8").unwrap();
    println!(
        "with a one-hour half-life: J8 at {:.3} mg/L after a day, {:.1} g decayed",
        last.node_concentration[j8], last.decayed_mass
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("water_quality example failed");
}
