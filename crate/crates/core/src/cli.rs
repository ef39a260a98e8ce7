//! The `ulam` command-line tool.
//!
//! Exit codes: 0 on success, 2 when a check or property fails, 1 on usage
//! or configuration errors. Every output embeds the [`RunConfig`] that
//! produced it: JSON outputs under a `config` key, CSV outputs as a leading
//! `# {...}` comment line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{self, PartitionKind, SweepConfig};
use crate::interval_maps::{self, IntervalMap, MapSpec};
use crate::measures::{project, pushforward, random_monotonic_on};
use crate::partitions::Partition;
use crate::stationary::{self, Method, SolverOptions};
use crate::ulam_operator::{MatrixFile, UlamMatrix};

#[derive(Debug, Parser, Serialize)]
#[command(name = "ulam", version, about = "Ulam approximations of transfer operators for interval maps")]
pub struct Cli {
    /// Diagnostic verbosity on stderr (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    #[serde(skip)]
    pub log: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Assemble the transition matrix.
    Build(BuildArgs),
    /// Solve for the stationary distribution of a saved matrix.
    Stationary(StationaryArgs),
    /// Sweep the cell count for one Manneville–Pomeau exponent.
    Sweep(SweepArgs),
    /// Random trials: push-forward and projection keep measures monotonic.
    CheckMonotone(CheckMonotoneArgs),
    /// Stationary mass near the fixed point 1/2 of the counterexample map.
    Counterexample(CounterexampleArgs),
    /// Check a map against the piecewise-convex family hypotheses.
    VerifyFamily(VerifyFamilyArgs),
    /// Build, solve and summarize one configuration.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct MapArgs {
    /// Catalog map: mp, counterexample, doubling, identity.
    #[arg(long, default_value = "mp")]
    pub map: String,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// JSON description of a user map; overrides --map.
    #[arg(long)]
    pub map_file: Option<PathBuf>,
}

impl MapArgs {
    fn build(&self) -> Result<IntervalMap> {
        if let Some(path) = &self.map_file {
            let spec: MapSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            return spec.build();
        }
        match self.map.as_str() {
            "mp" => interval_maps::mp_map(self.alpha),
            "doubling" => interval_maps::mp_map(0.0),
            "counterexample" => Ok(interval_maps::counterexample_map()),
            "identity" => Ok(interval_maps::identity_map()),
            other => Err(Error::InvalidParameter(format!("unknown map {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionChoice {
    Uniform,
    Quasi,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct PartitionArgs {
    #[arg(long, default_value_t = 1024)]
    pub cells: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub partition: PartitionChoice,
    /// Cell-length ratio bound for quasi-uniform partitions.
    #[arg(long = "K", default_value_t = 2.0)]
    #[serde(rename = "K")]
    pub k: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl PartitionArgs {
    fn kind(&self) -> PartitionKind {
        match self.partition {
            PartitionChoice::Uniform => PartitionKind::Uniform,
            PartitionChoice::Quasi => PartitionKind::QuasiUniform { k: self.k, seed: self.seed },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Power,
    GaussSeidel,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "gauss-seidel")]
    pub method: MethodChoice,
    /// Average power iterates.
    #[arg(long)]
    pub cesaro: bool,
    /// Largest matrix power tried when certifying positivity.
    #[arg(long, default_value_t = 64)]
    pub n_max: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        let method = match self.method {
            MethodChoice::Power => Method::Power,
            MethodChoice::GaussSeidel => Method::GaussSeidel,
        };
        SolverOptions { method, tol: self.tol, max_iter: self.max_iter, cesaro: self.cesaro, n_max: self.n_max }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BuildArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub partition: PartitionArgs,
    /// JSON matrix file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write `i j p` triplets (1-based) to this file.
    #[arg(long)]
    pub triplets: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StationaryArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Comma-separated, strictly increasing cell counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub cells: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub z: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub partition: PartitionChoice,
    #[arg(long = "K", default_value_t = 2.0)]
    #[serde(rename = "K")]
    pub k: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckMonotoneArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output partition size.
    #[arg(long, default_value_t = 1024)]
    pub cells: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// JSON lines; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [12, 60, 120, 240, 480])]
    pub cells: Vec<usize>,
    #[arg(long, default_value_t = experiments::DEFAULT_WINDOW)]
    pub window: f64,
    /// Accept cell counts that are not multiples of 12.
    #[arg(long)]
    pub allow_unaligned: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyFamilyArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = interval_maps::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Expected local exponent at the origin; defaults to the map's `alpha`.
    #[arg(long)]
    pub local_alpha: Option<f64>,
    /// Expected local constant at the origin.
    #[arg(long, default_value_t = 1.0)]
    pub local_c: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub partition: PartitionArgs,
    #[arg(long, default_value_t = 0.1)]
    pub z: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(flatten)]
    pub command: &'a Command,
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = writer(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(path: Option<&Path>, config: &RunConfig, rows: &[T]) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "# {}", serde_json::to_string(config)?)?;
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

/// Outcome of a subcommand that ran to completion.
pub enum Outcome {
    Ok,
    PropertyFailed,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let _ = env_logger::Builder::new().parse_filters(&cli.log).try_init();
    if let Ok(threads) = std::env::var("ULAM_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("ULAM_THREADS ignored: {e}");
                }
            }
            _ => {
                eprintln!("error: ULAM_THREADS must be a positive integer, got {threads:?}");
                return 1;
            }
        }
    }
    match run(&cli.command) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::PropertyFailed) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Assembly { .. } | Error::NoConvergence { .. } | Error::Precondition(_) | Error::Fit(_) => 2,
                _ => 1,
            }
        }
    }
}

pub fn run(command: &Command) -> Result<Outcome> {
    let config = RunConfig { tool: "ulam", version: env!("CARGO_PKG_VERSION"), command };
    match command {
        Command::Build(a) => build(a, &config),
        Command::Stationary(a) => solve(a, &config),
        Command::Sweep(a) => sweep(a, &config),
        Command::CheckMonotone(a) => check_monotone(a, &config),
        Command::Counterexample(a) => counterexample(a, &config),
        Command::VerifyFamily(a) => verify_family(a, &config),
        Command::Pipeline(a) => pipeline(a, &config),
    }
}

fn build(a: &BuildArgs, config: &RunConfig) -> Result<Outcome> {
    let map = a.map.build()?;
    let partition = a.partition.kind().build(a.partition.cells)?;
    let matrix = UlamMatrix::build(&map, &partition)?;
    log::info!("assembled {} cells, {} nonzeros", matrix.n(), matrix.nnz());
    let mut file = matrix.to_file_format();
    file.config = Some(serde_json::to_value(config)?);
    write_json(a.out.as_deref(), &file)?;
    if let Some(path) = &a.triplets {
        matrix.write_triplets(BufWriter::new(File::create(path)?))?;
    }
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct StationaryOutput<'a> {
    config: &'a RunConfig<'a>,
    pi: Vec<f64>,
    residual: f64,
    iterations: usize,
    unique: bool,
    n_delta: Option<usize>,
}

fn solve(a: &StationaryArgs, config: &RunConfig) -> Result<Outcome> {
    let file: MatrixFile = serde_json::from_str(&std::fs::read_to_string(&a.input)?)?;
    let matrix = UlamMatrix::from_file_format(file)?;
    let r = stationary::stationary_distribution(&matrix, &a.solver.options())?;
    let unique = r.unique;
    let out = StationaryOutput {
        config,
        pi: r.pi,
        residual: r.residual,
        iterations: r.iterations,
        unique,
        n_delta: r.n_delta,
    };
    write_json(a.out.as_deref(), &out)?;
    Ok(if unique { Outcome::Ok } else { Outcome::PropertyFailed })
}

fn sweep(a: &SweepArgs, config: &RunConfig) -> Result<Outcome> {
    let partition = match a.partition {
        PartitionChoice::Uniform => PartitionKind::Uniform,
        PartitionChoice::Quasi => PartitionKind::QuasiUniform { k: a.k, seed: a.seed },
    };
    let sweep =
        SweepConfig { alpha: a.alpha, cell_counts: a.cells.clone(), partition, z: a.z, solver: a.solver.options() };
    let records = experiments::run_sweep(&sweep)?;
    for r in records.iter().filter(|r| !r.is_ok()) {
        log::error!("n={}: {}", r.n_cells, r.error.as_deref().unwrap_or_default());
    }
    write_csv(a.out.as_deref(), config, &records)?;
    Ok(if records.iter().all(|r| r.is_ok()) { Outcome::Ok } else { Outcome::PropertyFailed })
}

#[derive(Serialize)]
struct TrialLine {
    trial: usize,
    input_cells: usize,
    pushforward_monotonic: bool,
    pushforward_witness: Option<usize>,
    projection_monotonic: bool,
    projection_witness: Option<usize>,
}

#[derive(Serialize)]
struct TrialSummary<'a> {
    config: &'a RunConfig<'a>,
    trials: usize,
    passed: usize,
}

fn check_monotone(a: &CheckMonotoneArgs, config: &RunConfig) -> Result<Outcome> {
    let map = a.map.build()?;
    let output = Partition::uniform(a.cells)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut w = writer(a.out.as_deref())?;
    let mut passed = 0;
    for trial in 0..a.trials {
        let n = rng.gen_range(8..=256);
        let input = Partition::quasi_uniform(n, 2.0, rng.gen())?;
        let mu = random_monotonic_on(&mut rng, input, 0.3);
        let pushed = pushforward(&map, &mu, &output).is_monotonic(a.tol);
        let target = Partition::quasi_uniform(rng.gen_range(2..=256), 2.0, rng.gen())?;
        let projected = project(&mu, &target).is_monotonic(a.tol);
        let line = TrialLine {
            trial,
            input_cells: n,
            pushforward_monotonic: pushed.holds,
            pushforward_witness: pushed.witness.map(|i| i + 1),
            projection_monotonic: projected.holds,
            projection_witness: projected.witness.map(|i| i + 1),
        };
        passed += usize::from(pushed.holds && projected.holds);
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    writeln!(w, "{}", serde_json::to_string(&TrialSummary { config, trials: a.trials, passed })?)?;
    w.flush()?;
    eprintln!("{passed}/{} trials passed", a.trials);
    Ok(if passed == a.trials { Outcome::Ok } else { Outcome::PropertyFailed })
}

fn counterexample(a: &CounterexampleArgs, config: &RunConfig) -> Result<Outcome> {
    let records = experiments::run_counterexample(&a.cells, a.window, a.allow_unaligned, &a.solver.options())?;
    write_csv(a.out.as_deref(), config, &records)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct FamilyOutput<'a> {
    config: &'a RunConfig<'a>,
    in_family: bool,
    local_form_holds: bool,
    report: interval_maps::FamilyReport,
}

fn verify_family(a: &VerifyFamilyArgs, config: &RunConfig) -> Result<Outcome> {
    let map = a.map.build()?;
    let alpha = a.local_alpha.or_else(|| map.param("alpha")).unwrap_or(a.map.alpha);
    let report = interval_maps::verify_local_conditions(&map, alpha, a.local_c, a.samples);
    let out = FamilyOutput {
        config,
        in_family: report.in_family(),
        local_form_holds: report.local_conditions_hold(),
        report,
    };
    write_json(a.out.as_deref(), &out)?;
    Ok(if out.local_form_holds { Outcome::Ok } else { Outcome::PropertyFailed })
}

#[derive(Serialize)]
struct PipelineOutput<'a> {
    config: &'a RunConfig<'a>,
    record: experiments::SweepRecord,
    error: Option<String>,
}

fn pipeline(a: &PipelineArgs, config: &RunConfig) -> Result<Outcome> {
    let map = a.map.build()?;
    let partition = a.partition.kind().build(a.partition.cells)?;
    let matrix = UlamMatrix::build(&map, &partition)?;
    let alpha = map.param("alpha").unwrap_or(0.0);
    let record = experiments::record_for(&matrix, alpha, a.z, &a.solver.options())?.record;
    let ok = record.is_ok();
    let error = record.error.clone();
    write_json(a.out.as_deref(), &PipelineOutput { config, record, error })?;
    Ok(if ok { Outcome::Ok } else { Outcome::PropertyFailed })
}
