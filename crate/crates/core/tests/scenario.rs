use std::path::Path;

use proptest::prelude::*;

use wdnflow::hydraulics::simulate;
use wdnflow::scada::{extract_readings, ScadaData, SensorColumn, SensorPlacement, SensorType};
use wdnflow::scenario::{load_network, Scenario, ScenarioConfig};

fn scenario_file(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

#[test]
fn bundled_scenarios_round_trip_canonically() {
    for name in ["leak_detection.toml", "toy9_faults.toml"] {
        let config = ScenarioConfig::load(&scenario_file(name)).unwrap();
        let text = config.to_toml_string();
        let again = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(config, again, "{name}");
        assert_eq!(text, again.to_toml_string(), "{name}");
    }
}

#[test]
fn two_week_scenario_has_4032_rows() {
    let config = ScenarioConfig::load(&scenario_file("leak_detection.toml")).unwrap();
    assert_eq!(config.simulation_options().state_count().unwrap(), 4032);
    let kinds: Vec<&str> = config.ground_truth().iter().map(|g| g.kind.name()).collect();
    assert_eq!(kinds, ["abrupt_leakage", "incipient_leakage", "sensor_drift"]);
}

#[test]
fn duration_must_be_a_whole_number_of_steps() {
    let mut config = ScenarioConfig::new("bundled:toy9", 1000, 300);
    let net = load_network(&config.network_path, Path::new(".")).unwrap();
    assert!(config.validate(&net).is_err());
    config.simulation.duration_s = 900;
    config.sensors.pressure_nodes = vec!["nope".into()];
    assert!(config.validate(&net).is_err());
}

#[test]
fn event_free_run_is_the_plain_simulation() {
    let mut config = ScenarioConfig::new("bundled:toy9", 6 * 3600, 300);
    config.sensors.pressure_nodes = vec!["J8".into(), "J1".into()];
    config.sensors.flow_links = vec!["P10".into()];
    let net = load_network(&config.network_path, Path::new(".")).unwrap();
    let scenario = Scenario::new(config.clone(), net.clone()).unwrap();
    let out = scenario.run().unwrap();
    let series = simulate(&net, config.simulation_options(), &[], &[]).unwrap();
    let plain = extract_readings(&series, None, &config.sensors).unwrap();
    assert_eq!(out.scada.to_csv(), plain.to_csv());
    assert_eq!(out.truth.to_csv(), out.scada.to_csv());
    assert!(out.scada.ground_truth.is_empty());
}

#[test]
fn columns_are_ordered_by_type_then_id() {
    let placement = SensorPlacement {
        pressure_nodes: vec!["J5".into(), "J1".into()],
        flow_links: vec!["P9".into(), "P1".into()],
        quality_nodes: vec!["J2".into()],
        tank_level_tanks: Vec::new(),
    };
    let labels: Vec<String> = placement.columns().iter().map(SensorColumn::label).collect();
    assert_eq!(
        labels,
        ["pressure:J1", "pressure:J5", "flow:P1", "flow:P9", "quality:J2"]
    );
}

fn readings() -> impl Strategy<Value = Vec<Vec<Option<f64>>>> {
    (1usize..5).prop_flat_map(|w| {
        prop::collection::vec(
            prop::collection::vec(
                prop::option::weighted(0.9, prop::num::f64::NORMAL | prop::num::f64::ZERO),
                w,
            ),
            1..20,
        )
    })
}

proptest! {
    #[test]
    fn csv_round_trips_bit_for_bit(rows in readings()) {
        let w = rows[0].len();
        let columns: Vec<SensorColumn> = (0..w).map(|j| SensorColumn::new(SensorType::Pressure, &format!("N{j}"))).collect();
        let times: Vec<u64> = (0..rows.len() as u64).map(|i| i * 300).collect();
        let data = ScadaData::new(times, columns, rows);
        let csv = data.to_csv();
        let back = ScadaData::from_csv(&csv).unwrap();
        prop_assert_eq!(back.to_csv(), csv);
        for (a, b) in data.rows().iter().zip(back.rows()) {
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(x.map(f64::to_bits), y.map(f64::to_bits));
            }
        }
    }
}
