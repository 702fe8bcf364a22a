//! Command-line front end: `run`, `detect` and `inspect`.
//!
//! Exit codes: 0 on success, 2 for configuration or input errors, 3 when
//! the hydraulic or quality solver fails.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::detection::{evaluate, SensorInterpolationDetector};
use crate::inp::parse_inp_unvalidated;
use crate::network::validate;
use crate::scada::{ground_truth_from_csv, ground_truth_to_csv, ScadaData};
use crate::scenario::{bundled_network, Scenario, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wdnflow", version, about = "Water distribution network scenario simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate scenario files and write their SCADA and ground-truth CSVs.
    Run {
        /// Scenario TOML file; repeat to run several.
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Replace the seed given in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for outputs (default: next to each config file).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Scenarios simulated at the same time.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Fit the sensor interpolation detector on the first rows of a SCADA
    /// CSV and report suspicious time points in the rest.
    Detect {
        scada_csv: PathBuf,
        /// First test row (default: half the rows).
        #[arg(long)]
        split: Option<usize>,
        /// Ground-truth CSV for evaluation metrics.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Print element counts, validation problems and total demand of a
    /// network (an INP path or `bundled:<name>`).
    Inspect { network: String },
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match cli.command {
        Command::Run {
            configs,
            seed,
            out_dir,
            jobs,
        } => run(&configs, seed, out_dir.as_deref(), jobs.max(1), out, err),
        Command::Detect {
            scada_csv,
            split,
            truth,
        } => detect(&scada_csv, split, truth.as_deref(), out, err),
        Command::Inspect { network } => inspect(&network, out, err),
    }
}

/// Entry point of the `wdnflow` binary. Verbosity comes from `WDNFLOW_LOG`
/// (`error`, `warn`, `info`, `debug`, `trace`).
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WDNFLOW_LOG", "warn")).init();
    run_cli(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn exit_code(e: &ScenarioError) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_SOLVER
    }
}

/// Summary of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub steps: usize,
    /// Newton iterations per snapshot → number of snapshots.
    pub iterations: BTreeMap<usize, usize>,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

impl RunReport {
    fn render(&self) -> String {
        let hist: Vec<String> = self.iterations.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        let mut s = format!(
            "steps: {}\niterations: {}\nwall_time_s: {:.3}\n",
            self.steps,
            hist.join(" "),
            self.wall_time_s
        );
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        for p in &self.outputs {
            s.push_str(&format!("wrote: {}\n", p.display()));
        }
        s
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), ScenarioError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| ScenarioError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
    }
    std::fs::write(path, text).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Loads, simulates and writes one scenario.
pub fn run_scenario(config: &Path, seed: Option<u64>, out_dir: Option<&Path>) -> Result<RunReport, ScenarioError> {
    let started = Instant::now();
    let mut scenario = Scenario::load(config)?;
    if let Some(seed) = seed {
        scenario.config.seed = seed;
        scenario = Scenario::new(scenario.config, scenario.base_network)?;
    }
    log::info!("running {}", config.display());
    let output = scenario.run()?;
    let base = match out_dir {
        Some(d) => d.to_path_buf(),
        None => config.parent().unwrap_or(Path::new(".")).to_path_buf(),
    };
    let mut outputs = Vec::new();
    let scada_path = base.join(&scenario.config.outputs.scada_csv_path);
    write_file(&scada_path, &output.scada.to_csv())?;
    outputs.push(scada_path);
    if let Some(truth) = &scenario.config.outputs.truth_csv_path {
        let path = base.join(truth);
        write_file(&path, &ground_truth_to_csv(&output.scada.ground_truth))?;
        outputs.push(path);
    }
    let mut iterations = BTreeMap::new();
    for s in &output.series.states {
        *iterations.entry(s.iterations).or_insert(0) += 1;
    }
    let warnings = output
        .scada
        .columns()
        .iter()
        .enumerate()
        .filter(|(j, _)| output.scada.rows().iter().all(|r| r[*j].is_none()))
        .map(|(_, c)| format!("column {} has no readings", c.label()))
        .collect();
    Ok(RunReport {
        steps: output.series.len(),
        iterations,
        wall_time_s: started.elapsed().as_secs_f64(),
        warnings,
        outputs,
    })
}

fn run(
    configs: &[PathBuf],
    seed: Option<u64>,
    out_dir: Option<&Path>,
    jobs: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let results: Vec<Mutex<Option<Result<RunReport, ScenarioError>>>> =
        configs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(configs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(config) = configs.get(i) else { break };
                let r = run_scenario(config, seed, out_dir);
                *results[i].lock().expect("no panics while holding the lock") = Some(r);
            });
        }
    });
    let mut code = EXIT_OK;
    for (config, r) in configs.iter().zip(results) {
        match r.into_inner().expect("workers finished").expect("every config ran") {
            Ok(report) => {
                let _ = write!(out, "config: {}\n{}", config.display(), report.render());
            }
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", config.display());
                code = code.max(exit_code(&e));
            }
        }
    }
    code
}

fn detect(
    scada_csv: &Path,
    split: Option<usize>,
    truth: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let fail = |err: &mut dyn Write, msg: String| {
        let _ = writeln!(err, "error: {msg}");
        EXIT_CONFIG
    };
    let text = match std::fs::read_to_string(scada_csv) {
        Ok(t) => t,
        Err(e) => return fail(err, format!("{}: {e}", scada_csv.display())),
    };
    let data = match ScadaData::from_csv(&text) {
        Ok(d) => d,
        Err(e) => return fail(err, format!("{}: {e}", scada_csv.display())),
    };
    let split = split.unwrap_or(data.len() / 2);
    if split == 0 || split >= data.len() {
        return fail(err, format!("split {split} must lie in 1..{}", data.len()));
    }
    let detector = match SensorInterpolationDetector::fit(&data.rows()[..split]) {
        Ok(d) => d,
        Err(e) => return fail(err, e.to_string()),
    };
    let result = detector.apply(&data.rows()[split..]).expect("same columns as training");
    let times = &data.times()[split..];
    let _ = writeln!(out, "train_rows: {split}\ntest_rows: {}", times.len());
    let _ = writeln!(out, "flagged: {}", result.suspicious_time_indices.len());
    for &i in &result.suspicious_time_indices {
        let _ = writeln!(out, "flag time_s={}", times[i]);
    }
    if let Some(path) = truth {
        let events = match std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|t| ground_truth_from_csv(&t).map_err(|e| e.to_string()))
        {
            Ok(ev) => ev,
            Err(e) => return fail(err, format!("{}: {e}", path.display())),
        };
        let _ = write!(out, "{}", evaluate(&result, &events, times).report());
    }
    EXIT_OK
}

fn inspect(network: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match network.strip_prefix("bundled:") {
        Some(name) => match bundled_network(name) {
            Some(t) => t.to_string(),
            None => {
                let _ = writeln!(err, "error: no bundled network {name}");
                return EXIT_CONFIG;
            }
        },
        None => match std::fs::read_to_string(network) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(err, "error: {network}: {e}");
                return EXIT_CONFIG;
            }
        },
    };
    let parsed = match parse_inp_unvalidated(&text) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {network}: {e}");
            return EXIT_CONFIG;
        }
    };
    let n = &parsed.network;
    let violations = validate(n);
    let _ = writeln!(
        out,
        "nodes: {}, links: {}, violations: {}",
        n.node_count(),
        n.link_count(),
        violations.len()
    );
    let _ = writeln!(
        out,
        "junctions: {}, reservoirs: {}, tanks: {}\npipes: {}, pumps: {}, valves: {}",
        n.junctions().len(),
        n.reservoirs().len(),
        n.tanks().len(),
        n.pipes().len(),
        n.pumps().len(),
        n.valves().len()
    );
    let _ = writeln!(out, "total_base_demand_m3s: {}", n.total_base_demand());
    for v in &violations {
        let _ = writeln!(out, "violation: {v}");
    }
    for w in &parsed.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    EXIT_OK
}
