//! Command-line front end. Exit codes: 0 success, 1 runtime error,
//! 2 configuration error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::{self, RunConfig, SweepConfig, SweepMeta};
use crate::lorenz::{self, fmt_full, LorenzParams, ScalerSidecar};
use crate::metrics;
use crate::reservoir::Topology;
use crate::seed;

#[derive(Debug, Parser)]
#[command(name = "lorenz-reservoir", version, about = "Reservoir surrogates of the Lorenz-63 attractor")]
pub struct Cli {
    /// JSON file with default values for any flag (keys are flag names).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a rescaled Lorenz trajectory (CSV plus scaler JSON sidecar).
    Generate(GenerateArgs),
    /// Train and evaluate a single realization.
    Run(RunArgs),
    /// Sweep rho_R across topologies with many realizations.
    Sweep(SweepArgs),
    /// Re-aggregate an existing records.csv.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Experiment settings shared by `run` and `sweep`.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub input_scale: Option<f64>,
    #[arg(long)]
    pub washout: Option<usize>,
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long)]
    pub test: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub sync: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub topology: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Realization index under the seed (selects the Lorenz data).
    #[arg(long)]
    pub realization: Option<u64>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub emit_model: Option<PathBuf>,
    #[arg(long)]
    pub emit_timeseries: Option<PathBuf>,
    /// PSD of the predicted Z component; the target's PSD goes next to it
    /// with a `.target.csv` suffix.
    #[arg(long)]
    pub emit_psd: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated list, e.g. `uncoupled,ring,random`.
    #[arg(long)]
    pub topologies: Option<String>,
    #[arg(long)]
    pub rho_min: Option<f64>,
    #[arg(long)]
    pub rho_max: Option<f64>,
    #[arg(long)]
    pub rho_step: Option<f64>,
    #[arg(long)]
    pub realizations: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for records.csv, summary.csv and meta.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Output directory for the re-aggregated summary.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Values accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub topology: Option<String>,
    pub rho: Option<f64>,
    pub realization: Option<u64>,
    pub lambda: Option<f64>,
    pub nodes: Option<usize>,
    pub input_scale: Option<f64>,
    pub washout: Option<usize>,
    pub train: Option<usize>,
    pub test: Option<usize>,
    pub horizon: Option<usize>,
    pub sync: Option<usize>,
    pub emit_model: Option<PathBuf>,
    pub emit_timeseries: Option<PathBuf>,
    pub emit_psd: Option<PathBuf>,
    pub topologies: Option<String>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub rho_step: Option<f64>,
    pub realizations: Option<u64>,
    pub threads: Option<usize>,
    pub records: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T> {
    flag.or(file)
        .ok_or_else(|| Error::Config(format!("missing required option --{name}")))
}

fn parse_topologies(list: &str) -> Result<Vec<Topology>> {
    let out = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Topology>>>()?;
    if out.is_empty() {
        return Err(Error::Config("empty topology list".into()));
    }
    Ok(out)
}

impl ModelArgs {
    fn apply(self, file: &FileConfig, config: &mut RunConfig) {
        let d = RunConfig::default();
        config.lambda = self.lambda.or(file.lambda).unwrap_or(d.lambda);
        config.spec.nodes = self.nodes.or(file.nodes).unwrap_or(d.spec.nodes);
        config.spec.input_scale = self
            .input_scale
            .or(file.input_scale)
            .unwrap_or(d.spec.input_scale);
        config.washout = self.washout.or(file.washout).unwrap_or(d.washout);
        config.train = self.train.or(file.train).unwrap_or(d.train);
        config.test = self.test.or(file.test).unwrap_or(d.test);
        config.horizon = self.horizon.or(file.horizon).unwrap_or(d.horizon);
        config.sync_steps = self.sync.or(file.sync).unwrap_or(d.sync_steps);
    }
}

/// Parses arguments, runs, and maps errors onto exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap exits with 2 for usage errors and 0 for --help/--version
            e.exit();
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Generate(a) => generate(a, &file),
        Command::Run(a) => run(a, &file),
        Command::Sweep(a) => sweep(a, &file),
        Command::Analyze(a) => analyze(a, &file),
    }
}

fn generate(a: GenerateArgs, file: &FileConfig) -> Result<()> {
    let samples = required(a.samples, file.samples, "samples")?;
    let seed_value = required(a.seed, file.seed, "seed")?;
    let out = required(a.out, file.out.clone(), "out")?;
    if samples < 2 {
        return Err(Error::Config("--samples must be at least 2".into()));
    }
    let params = LorenzParams::default();
    let mut rng = seed::rng(seed_value);
    let initial = lorenz::random_initial_state(&mut rng);
    let raw = lorenz::generate_raw(&params, initial, samples, lorenz::DEFAULT_TRANSIENT)?;
    let scaler = lorenz::fit_scaler(&raw)?;
    lorenz::write_trajectory_csv(&out, &scaler.apply_all(&raw))?;
    let sidecar = ScalerSidecar {
        min: scaler.min,
        max: scaler.max,
        h: params.h,
        dt_sample: params.dt_sample,
        seed: seed_value,
        fit_on: "full generated trajectory".into(),
    };
    let side = sidecar_path(&out);
    harness::write_json(&side, &sidecar)?;
    eprintln!("wrote {} and {}", out.display(), side.display());
    Ok(())
}

/// `traj.csv` → `traj.scaler.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("scaler.json")
}

fn run(a: RunArgs, file: &FileConfig) -> Result<()> {
    let topology: Topology = required(a.topology, file.topology.clone(), "topology")?.parse()?;
    let rho = required(a.rho, file.rho, "rho")?;
    let master = required(a.seed, file.seed, "seed")?;
    let mut config = RunConfig::default();
    a.model.apply(file, &mut config);
    config.spec.topology = topology;
    config.spec.rho_r = rho;
    config.master_seed = master;
    config.realization_index = a.realization.or(file.realization).unwrap_or(0);
    // weights depend on the seed and realization but not on the topology
    config.spec.weight_seed = seed::derive(master, &[config.realization_index]);
    config.validate()?;

    let data = harness::RealizationData::generate(&config)?;
    let r = harness::simulate(&config, &data)?;
    let record = r.record(&config, 0);
    println!("{}", serde_json::to_string_pretty(&record).expect("record serialises"));

    if let Some(p) = a.emit_model.or(file.emit_model.clone()) {
        harness::write_json(&p, &r.model_file(&config))?;
    }
    if let Some(p) = a.emit_timeseries.or(file.emit_timeseries.clone()) {
        write_timeseries(&p, &r.target, &r.predicted)?;
    }
    if let Some(p) = a.emit_psd.or(file.emit_psd.clone()) {
        let dt = config.lorenz.dt_sample;
        let z_pred: Vec<f64> = r.predicted.iter().map(|s| s[2]).collect();
        let z_true: Vec<f64> = r.target.iter().map(|s| s[2]).collect();
        metrics::write_psd_csv(&p, &metrics::psd(&z_pred, dt)?)?;
        metrics::write_psd_csv(&p.with_extension("target.csv"), &metrics::psd(&z_true, dt)?)?;
    }
    Ok(())
}

/// `k,X,Y,Z,Xhat,Yhat,Zhat`; missing predictions (diverged runs) are NaN.
pub fn write_timeseries(path: &Path, target: &[lorenz::State], predicted: &[lorenz::State]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "k,X,Y,Z,Xhat,Yhat,Zhat")?;
        for (k, y) in target.iter().enumerate() {
            let p = predicted.get(k).copied().unwrap_or([f64::NAN; 3]);
            writeln!(
                w,
                "{k},{},{},{},{},{},{}",
                fmt_full(y[0]),
                fmt_full(y[1]),
                fmt_full(y[2]),
                fmt_full(p[0]),
                fmt_full(p[1]),
                fmt_full(p[2])
            )?;
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

fn sweep(a: SweepArgs, file: &FileConfig) -> Result<()> {
    let topologies = parse_topologies(
        &a.topologies
            .or(file.topologies.clone())
            .unwrap_or_else(|| "uncoupled,ring,random".into()),
    )?;
    let grid = harness::rho_grid(
        a.rho_min.or(file.rho_min).unwrap_or(0.0),
        a.rho_max.or(file.rho_max).unwrap_or(1.0),
        a.rho_step.or(file.rho_step).unwrap_or(0.025),
    )?;
    let realizations = a.realizations.or(file.realizations).unwrap_or(100);
    let master = required(a.seed, file.seed, "seed")?;
    let out = required(a.out, file.out.clone(), "out")?;
    let threads = a.threads.or(file.threads);

    let mut base = RunConfig::default();
    a.model.apply(file, &mut base);
    base.master_seed = master;
    let config = SweepConfig {
        topologies,
        rho_grid: grid,
        realizations,
        base,
    };
    config.validate()?;

    let result = harness::run_sweep(&config, threads)?;
    let reference = harness::reference_adev(
        &config.base.lorenz,
        master,
        config.base.horizon,
        config.base.adev_cube,
    )
    .ok();
    let meta = SweepMeta::new(&config, reference);
    let written = harness::export(&result.records, &result.summary, Some(&meta), &out)?;
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs, file: &FileConfig) -> Result<()> {
    let records_path = required(a.records, file.records.clone(), "records")?;
    let out = required(a.out, file.out.clone(), "out")?;
    let records = harness::read_records(&records_path)?;
    let summary = harness::aggregate(&records);
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let p = out.join("summary.csv");
    harness::write_summary(&p, &summary)?;
    eprintln!("wrote {}", p.display());
    Ok(())
}
