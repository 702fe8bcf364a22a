// Two weeks of SCADA data with two leaks and a sensor drift, and the
// sensor interpolation detector calibrated on the event-free first week.
//
// cargo run --release --example leak_detection

use std::path::Path;

use wdnflow::detection::{evaluate, SensorInterpolationDetector};
use wdnflow::scenario::Scenario;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/leak_detection.toml");
    let scenario = Scenario::load(&config)?;
    let output = scenario.run()?;
    let data = &output.scada;
    println!("{} rows x {} sensors", data.len(), data.columns().len());

    let split = data.len() / 2;
    let detector = SensorInterpolationDetector::fit(&data.rows()[..split])?;
    let result = detector.apply(&data.rows()[split..])?;
    let metrics = evaluate(&result, &data.ground_truth, &data.times()[split..]);
    print!("{}", metrics.report());
    for e in &metrics.events {
        let kind = data
            .ground_truth
            .iter()
            .find(|g| g.event_id == e.event_id)
            .unwrap()
            .kind;
        match e.delay_s {
            Some(d) => println!("{kind}: first alarm {d} s after onset"),
            None => println!("{kind}: not detected"),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("leak_detection example failed");
}
