// Sensor readings, their corruption and the CSV export.
//
// cargo run --example sensor_faults

use wdnflow::events::{CommunicationEvent, CommunicationKind, SensorFaultEvent, SensorFaultKind};
use wdnflow::hydraulics::{simulate, SimulationOptions};
use wdnflow::scada::{corrupt, extract_readings, SensorPlacement, SensorType};
use wdnflow::scenario::bundled_network;
use wdnflow::uncertainty::SeededStream;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = wdnflow::inp::parse_inp(bundled_network("toy9").unwrap())?;
    let series = simulate(&net, SimulationOptions::new(3 * 3600, 300), &[], &[])?;
    let placement = SensorPlacement {
        pressure_nodes: vec!["J5".into(), "J3".into()],
        flow_links: vec!["P1".into()],
        ..Default::default()
    };
    let truth = extract_readings(&series, None, &placement)?;

    let faults = vec![
        SensorFaultEvent::new(SensorFaultKind::Drift, SensorType::Pressure, "J3", 1.1, 3600, 7200),
        SensorFaultEvent::new(SensorFaultKind::StuckZero, SensorType::Flow, "P1", 0.0, 1800, 2700),
    ];
    let comms = vec![
        CommunicationEvent::on_sensor(CommunicationKind::Freeze, SensorType::Pressure, "J5", 600, 1500),
        CommunicationEvent::all_sensors(CommunicationKind::DataLoss, 9000, 9600),
    ];
    let scada = corrupt(&truth, &faults, &comms, &[], &SeededStream::new(1))?;
    print!("{}", scada.to_csv());

    let j3 = scada.column_index(SensorType::Pressure, "J3").unwrap();
    let at = |t: u64| scada.times().iter().position(|x| *x == t).unwrap();
    let k = at(7200 - 300);
    println!(
        "J3 drift after {} s: {:.3} m",
        7200 - 300 - 3600,
        scada.row(k)[j3].unwrap() - truth.row(k)[j3].unwrap()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("sensor_faults example failed");
}
