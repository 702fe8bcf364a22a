// Driving the command-line front end in-process: run a scenario file,
// then detect on the CSV it wrote.
//
// cargo run --example scenario_cli

use std::path::Path;

use wdnflow::cli::run_cli;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/toy9_faults.toml");
    let out_dir = std::env::temp_dir().join(format!("wdnflow-example-{}", std::process::id()));
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(
        [
            "wdnflow".as_ref(),
            "run".as_ref(),
            "--config".as_ref(),
            config.as_os_str(),
            "--out-dir".as_ref(),
            out_dir.as_os_str(),
        ],
        &mut out,
        &mut err,
    );
    print!("{}", String::from_utf8_lossy(&out));
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));

    out.clear();
    let code = run_cli(
        [
            "wdnflow".as_ref(),
            "detect".as_ref(),
            out_dir.join("toy9_scada.csv").as_os_str(),
            "--truth".as_ref(),
            out_dir.join("toy9_truth.csv").as_os_str(),
        ],
        &mut out,
        &mut err,
    );
    let report = String::from_utf8_lossy(&out);
    for line in report.lines().filter(|l| !l.starts_with("flag ")) {
        println!("{line}");
    }
    assert_eq!(code, 0);
    std::fs::remove_dir_all(&out_dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("scenario_cli example failed");
}
