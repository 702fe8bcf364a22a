// Reset/step control loop on the pump-fed network: a naive schedule that
// switches the pump off at night, against always-on.
//
// cargo run --example control_env

use std::path::Path;

use wdnflow::env::{Action, ControlEnv};
use wdnflow::scenario::{load_network, Scenario, ScenarioConfig};

fn episode(policy: impl Fn(u64) -> Action) -> Result<(f64, usize), Box<dyn std::error::Error>> {
    let mut config = ScenarioConfig::new("bundled:pumped", 86_400, 300);
    config.sensors.pressure_nodes = vec!["J2".into(), "J3".into()];
    config.sensors.tank_level_tanks = vec!["T1".into()];
    let net = load_network(&config.network_path, Path::new("."))?;
    let mut env = ControlEnv::new(Scenario::new(config, net)?)?;
    let first = env.reset()?;
    assert_eq!(first.len(), 3);
    let mut total = 0.0;
    let mut steps = 0;
    let mut t = 0;
    loop {
        let out = env.step(&policy(t))?;
        total += out.reward;
        steps += 1;
        t = out.info.t;
        if out.done {
            break;
        }
    }
    Ok((total, steps))
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (always_on, steps) = episode(|_| Action::noop())?;
    let (night_off, _) = episode(|t| {
        let hour = (t / 3600) % 24;
        if hour < 5 {
            Action::pump_off("PU1")
        } else {
            Action::noop()
        }
    })?;
    println!("{steps} steps; return always-on {always_on:.1}, night-off {night_off:.1}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("control_env example failed");
}
