//! Batch command-line front end: reads a scenario document, runs one
//! computation and writes CSV files plus a `run.json` manifest into the
//! output directory.
//!
//! Failures print a single line `error: kind=<kind> message=<text>` on
//! stderr and exit with a nonzero status.

use atomfiber::analysis::{
    density_profile, fit_lifetime, loss_fraction, survival_series, velocity_profile, Bins, PathProjector,
};
use atomfiber::guideprops::{guide_scan, SCAN_HEADER};
use atomfiber::magnetics::{field_map_csv, grid_points};
use atomfiber::mcsim::{integrate, loss_csv, read_loss_csv, read_snapshot_csv, snapshot_csv};
use atomfiber::scenario::{tube_radius, ScenarioDocument};
use atomfiber::topdynamics::{adiabaticity_check, top_closed_form, top_report_row, AdiabaticityThresholds, TOP_REPORT_HEADER};
use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const THREADS_ENV: &str = "ATOMFIBER_THREADS";
const SNAPSHOT_INDEX: &str = "snapshots.csv";
const SNAPSHOT_INDEX_HEADER: &str = "index,t,file";
const LOSS_FILE: &str = "losses.csv";
/// Time at which the early-loss fraction is reported (s).
const EARLY_LOSS_TIME: f64 = 0.1;

#[derive(Parser, Debug)]
#[command(name = "atomfiber", version, about = "Atom-chip wire guide simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario document (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed; required by `simulate`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides ATOMFIBER_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
enum Command {
    /// |B| and its components on the scenario's field_map grid.
    FieldMap,
    /// Guide height, gradient and depth for each bias of the scan section.
    GuideScan,
    /// Closed-form TOP parameters and the adiabaticity check.
    TopParams,
    /// Monte-Carlo run: snapshots, loss log and profiles.
    Simulate,
    /// Survival curve and lifetime fit from a simulate output directory.
    LifetimeFit {
        /// Directory written by `simulate`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Density and velocity profiles from a simulate output directory.
    Profile {
        #[arg(long)]
        input: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::FieldMap => "field-map",
            Command::GuideScan => "guide-scan",
            Command::TopParams => "top-params",
            Command::Simulate => "simulate",
            Command::LifetimeFit { .. } => "lifetime-fit",
            Command::Profile { .. } => "profile",
        }
    }

    fn input(&self) -> Option<&Path> {
        match self {
            Command::LifetimeFit { input } | Command::Profile { input } => Some(input),
            _ => None,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(atomfiber::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

impl From<atomfiber::Error> for CliError {
    fn from(e: atomfiber::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Core(atomfiber::Error::Io(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Output directory plus the SHA-256 of every input read.
struct Run {
    out: PathBuf,
    hasher: Sha256,
}

impl Run {
    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(|e| io_err(&path, e))
    }

    fn read_input(&mut self, path: &Path) -> CliResult<String> {
        let text = read(path)?;
        self.hasher.update(text.as_bytes());
        Ok(text)
    }
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Usage("thread count must be at least 1".into()));
    }
    Ok(n)
}

fn run(cli: Cli) -> CliResult<()> {
    let scenario_path = cli
        .scenario
        .clone()
        .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
    let out = cli
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("--out is required".into()))?;
    if cli.command == Command::Simulate && cli.seed.is_none() {
        return Err(CliError::Usage("simulate requires --seed".into()));
    }
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }

    let (doc, text) = ScenarioDocument::from_file(&scenario_path)?;
    if cli.command == Command::GuideScan && doc.scan.as_ref().is_some_and(|s| s.biases.is_empty()) {
        return Err(CliError::Usage("scan.biases is empty".into()));
    }
    doc.validate()?;
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
    let mut run = Run { out, hasher };

    match cli.command {
        Command::FieldMap => field_map(&doc, &run)?,
        Command::GuideScan => scan(&doc, &run)?,
        Command::TopParams => top_params(&doc, &run)?,
        Command::Simulate => simulate(&doc, &run, cli.seed.expect("checked above"))?,
        Command::LifetimeFit { ref input } => lifetime(&doc, &mut run, input)?,
        Command::Profile { ref input } => profiles_from_dir(&doc, &mut run, input)?,
    }

    let manifest = serde_json::json!({
        "command": cli.command.name(),
        "scenario": doc.name,
        "inputs_sha256": hex::encode(run.hasher.clone().finalize()),
        "seed": cli.seed,
        "versions": {
            "atomfiber": env!("CARGO_PKG_VERSION"),
            "atomfiber-core": atomfiber::VERSION,
        },
        "input_dir": cli.command.input().map(|p| p.display().to_string()),
    });
    run.write("run.json", &(serde_json::to_string_pretty(&manifest).expect("json") + "\n"))
}

fn field_map(doc: &ScenarioDocument, run: &Run) -> CliResult<()> {
    let (model, _) = doc.field_model()?;
    let req = doc.field_map_request()?;
    let points = grid_points(req.lo, req.hi, req.counts);
    run.write("field_map.csv", &field_map_csv(&model, &points, &req.times))
}

fn scan(doc: &ScenarioDocument, run: &Run) -> CliResult<()> {
    let (model, path) = doc.field_model()?;
    let (biases, opts) = doc.scan_request()?;
    let table = guide_scan(&model, &path, &biases, &doc.state()?, &opts)?;
    for row in &table.rows {
        if let Err(e) = &row.section {
            log::warn!("bias {:.4} G: {e}", row.bias * 1e4);
        }
    }
    debug_assert!(table.to_csv(model.constants().k_b).starts_with(SCAN_HEADER));
    run.write("guide_scan.csv", &table.to_csv(model.constants().k_b))
}

fn top_params(doc: &ScenarioDocument, run: &Run) -> CliResult<()> {
    let cfg = doc.top_config()?;
    let params = top_closed_form(&cfg, &atomfiber::PhysicalConstants::CODATA2018)?;
    if !params.height_matches {
        log::warn!("bias does not place the guide at h = d");
    }
    let report = adiabaticity_check(&cfg, &params, &AdiabaticityThresholds::default());
    let csv = format!("{TOP_REPORT_HEADER}\n{}\n", top_report_row(&cfg, &params, &report));
    println!("Larmor frequency    {:.3} kHz", params.omega_larmor / TAU * 1e-3);
    println!("trap frequency      {:.3} kHz", params.omega_trap / TAU * 1e-3);
    println!("orbit radius r0     {:.3} um", params.r0 * 1e6);
    println!("guide height h      {:.3} um", params.h * 1e6);
    println!("w_mod / w_Lar       {:.4}", report.r1);
    println!("w_trap / w_mod      {:.4}", report.r2);
    println!("adiabaticity        {}", if report.pass { "pass" } else { "fail" });
    run.write("top_params.csv", &csv)
}

fn snapshot_file(k: usize) -> String {
    format!("snapshot_{k:03}.csv")
}

fn simulate(doc: &ScenarioDocument, run: &Run, seed: u64) -> CliResult<()> {
    let scenario = doc.scenario(seed)?;
    let result = integrate(&scenario)?;
    let mut index = format!("{SNAPSHOT_INDEX_HEADER}\n");
    for (k, snap) in result.snapshots.iter().enumerate() {
        let _ = writeln!(index, "{k},{:e},{}", snap.t, snapshot_file(k));
        run.write(&snapshot_file(k), &snapshot_csv(snap))?;
    }
    run.write(SNAPSHOT_INDEX, &index)?;
    run.write(LOSS_FILE, &loss_csv(&result.losses))?;
    let height = scenario.loading_section()?.height;
    write_profiles(doc, run, &scenario.path, height, &result.snapshots)?;
    let times = survival_times(doc, scenario.total_time)?;
    run.write(
        "survival.csv",
        &survival_csv(&survival_series(scenario.ensemble.count, &result.losses, &times)),
    )
}

fn write_profiles(
    doc: &ScenarioDocument,
    run: &Run,
    path: &atomfiber::chipgeom::GuidePath,
    height: f64,
    snapshots: &[atomfiber::mcsim::Snapshot],
) -> CliResult<()> {
    let settings = doc.output_settings()?;
    let projector = PathProjector::new(path, tube_radius(&settings, height))?;
    let s_bins = Bins::new(0.0, path.length(), settings.arclength_bins)?;
    for (k, snap) in snapshots.iter().enumerate() {
        run.write(&format!("density_{k:03}.csv"), &density_profile(snap, &projector, &s_bins).to_csv())?;
        run.write(
            &format!("velocity_{k:03}.csv"),
            &velocity_profile(snap, &projector, &settings.velocity_bins).to_csv(),
        )?;
    }
    Ok(())
}

fn survival_times(doc: &ScenarioDocument, total: f64) -> CliResult<Vec<f64>> {
    let dt = doc.output_settings()?.survival_interval.unwrap_or(total / 100.0);
    let n = (total / dt).round() as usize;
    Ok((0..=n).map(|k| (k as f64 * dt).min(total)).collect())
}

fn survival_csv(series: &[(f64, f64)]) -> String {
    let mut out = String::from("t,N\n");
    for (t, n) in series {
        let _ = writeln!(out, "{t:e},{n}");
    }
    out
}

fn lifetime(doc: &ScenarioDocument, run: &mut Run, input: &Path) -> CliResult<()> {
    let scenario = doc.scenario(0)?;
    let losses = read_loss_csv(&run.read_input(&input.join(LOSS_FILE))?)?;
    let settings = doc.output_settings()?;
    let n = scenario.ensemble.count;
    let series = survival_series(n, &losses, &survival_times(doc, scenario.total_time)?);
    run.write("survival.csv", &survival_csv(&series))?;
    let early = format!(
        "t,loss_fraction\n{EARLY_LOSS_TIME:e},{}\n",
        loss_fraction(n, &losses, EARLY_LOSS_TIME)
    );
    run.write("early_loss.csv", &early)?;
    let fit = fit_lifetime(&series, settings.fit_window)?;
    run.write("lifetime_fit.csv", &fit.to_csv())
}

fn profiles_from_dir(doc: &ScenarioDocument, run: &mut Run, input: &Path) -> CliResult<()> {
    let scenario = doc.scenario(0)?;
    let index = run.read_input(&input.join(SNAPSHOT_INDEX))?;
    let mut lines = index.lines();
    if lines.next() != Some(SNAPSHOT_INDEX_HEADER) {
        return Err(CliError::Core(atomfiber::Error::Io(format!(
            "{}: expected header {SNAPSHOT_INDEX_HEADER:?}",
            input.join(SNAPSHOT_INDEX).display()
        ))));
    }
    let mut snapshots = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        let (Some(t), Some(file)) = (cols.get(1).and_then(|t| t.parse().ok()), cols.get(2)) else {
            return Err(CliError::Core(atomfiber::Error::Io(format!("malformed index line {line:?}"))));
        };
        snapshots.push(read_snapshot_csv(&run.read_input(&input.join(file))?, t)?);
    }
    let height = scenario.loading_section()?.height;
    write_profiles(doc, run, &scenario.path, height, &snapshots)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: kind=usage message={first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.message().replace('\n', " ");
            eprintln!("error: kind={} message={message}", e.kind());
            ExitCode::FAILURE
        }
    }
}
