// Snapshot and extended-period hydraulics.
//
// cargo run --example simulate_hydraulics

use wdnflow::hydraulics::{
    hazen_williams_headloss, simulate, solve_snapshot, Controls, SimulationOptions, SolverSettings,
};
use wdnflow::network::NetworkBuilder;
use wdnflow::scenario::bundled_network;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Reservoir at 100 m feeding 0.1 m3/s through 1 km of 300 mm pipe.
    let net = NetworkBuilder::new()
        .reservoir("R", 100.0)
        .junction("J", 0.0, 0.1)
        .pipe("P", "R", "J", 1000.0, 0.3, 100.0)
        .build()?;
    let state = solve_snapshot(&net, &[0.1], &Controls::baseline(&net), SolverSettings::default())?;
    let j = net.node_index("J").unwrap();
    println!(
        "series pipe: head {:.3} m (closed form {:.3} m), flow {:.4} m3/s, {} iterations",
        state.head[j],
        100.0 - hazen_williams_headloss(0.1, 1000.0, 0.3, 100.0),
        state.flow[0],
        state.iterations
    );

    // One day on toy9 at 5-minute steps.
    let toy9 = wdnflow::inp::parse_inp(bundled_network("toy9").unwrap())?;
    let series = simulate(&toy9, SimulationOptions::new(86_400, 300), &[], &[])?;
    let model = &series.model;
    let mut worst_mass = 0.0f64;
    let mut worst_energy = 0.0f64;
    for s in &series.states {
        for (_, r) in model.mass_residuals(&s.flow, &s.actual_demand) {
            worst_mass = worst_mass.max(r.abs());
        }
        for (_, r) in model.pipe_energy_residuals(&s.flow, &s.head, &s.link_open) {
            worst_energy = worst_energy.max(r.abs());
        }
    }
    let j8 = toy9.node_index("J8").unwrap();
    let p: Vec<f64> = series.states.iter().map(|s| s.pressure_head[j8]).collect();
    println!(
        "toy9: {} states, J8 pressure {:.2}..{:.2} m, worst mass residual {:.1e} m3/s, worst energy residual {:.1e} m",
        series.len(),
        p.iter().cloned().fold(f64::INFINITY, f64::min),
        p.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        worst_mass,
        worst_energy
    );
    println!("digest {}", series.digest());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("simulate_hydraulics example failed");
}
