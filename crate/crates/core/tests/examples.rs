//! Every example must run to completion.

#[allow(dead_code)]
mod inspect_network {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/inspect_network.rs"));
}

#[test]
fn inspect_network_example_runs() {
    inspect_network::run_example().expect("inspect_network example failed");
}

#[allow(dead_code)]
mod simulate_hydraulics {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/simulate_hydraulics.rs"));
}

#[test]
fn simulate_hydraulics_example_runs() {
    simulate_hydraulics::run_example().expect("simulate_hydraulics example failed");
}

#[allow(dead_code)]
mod leak_detection {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/leak_detection.rs"));
}

#[test]
fn leak_detection_example_runs() {
    leak_detection::run_example().expect("leak_detection example failed");
}

#[allow(dead_code)]
mod water_quality {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/water_quality.rs"));
}

#[test]
fn water_quality_example_runs() {
    water_quality::run_example().expect("water_quality example failed");
}

#[allow(dead_code)]
mod sensor_faults {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sensor_faults.rs"));
}

#[test]
fn sensor_faults_example_runs() {
    sensor_faults::run_example().expect("sensor_faults example failed");
}

#[allow(dead_code)]
mod uncertainty {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/uncertainty.rs"));
}

#[test]
fn uncertainty_example_runs() {
    uncertainty::run_example().expect("uncertainty example failed");
}

#[allow(dead_code)]
mod control_env {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/control_env.rs"));
}

#[test]
fn control_env_example_runs() {
    control_env::run_example().expect("control_env example failed");
}

#[allow(dead_code)]
mod inp_roundtrip {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/inp_roundtrip.rs"));
}

#[test]
fn inp_roundtrip_example_runs() {
    inp_roundtrip::run_example().expect("inp_roundtrip example failed");
}

#[allow(dead_code)]
mod scenario_cli {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenario_cli.rs"));
}

#[test]
fn scenario_cli_example_runs() {
    scenario_cli::run_example().expect("scenario_cli example failed");
}
