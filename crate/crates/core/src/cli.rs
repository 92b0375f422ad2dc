//! Command-line interface: argument parsing, seeding, output files and run
//! manifests.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactarg::{format_sig17, stationary_exact};
use crate::moran::{run_to_fixation, MoranParams, Population};
use crate::partitions::LociSet;
use crate::scenario::approx_stationary;
use crate::simulate::{equilibrium_ensemble, stream_rng, summarize, write_ensemble_csv, EnsembleConfig, SimConfig};
use crate::thetainfty::{moment_check, sample_theta_infty, write_moment_csv, DEFAULT_TRUNC, MOMENT_GRID};
use crate::validate::{self, Level};

/// Largest accepted `R * replicates` for `sim-interval`.
pub const MAX_SIM_WORK: f64 = 1e8;

#[derive(Debug, Parser)]
#[command(name = "arg-ibd", version, about = "Stationary laws of the ARG and the interval partitioning process")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact stationary law of the ARG on a set of loci.
    Exact(ExactArgs),
    /// Exact law against the high-recombination approximation F(pi)/rho^k.
    Approx(ExactArgs),
    /// Equilibrium ensemble of the partitioning process on [0, R).
    SimInterval(SimIntervalArgs),
    /// Samples of the limit point process and its moment table.
    Theta(ThetaArgs),
    /// Moran model run to fixation.
    Moran(MoranArgs),
    /// Acceptance suite with a machine-readable report.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Base seed; every replicate derives its own stream from it.
    #[arg(long, env = "ARG_IBD_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ExactArgs {
    /// Strictly increasing loci, e.g. 0,1,3.
    #[arg(long)]
    pub loci: String,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct SimIntervalArgs {
    #[arg(long = "R")]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = crate::simulate::DEFAULT_T_BURN)]
    pub t_burn: f64,
    /// Defaults to the time of the last sample.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Samples recorded per chain after burn-in.
    #[arg(long, default_value_t = 1)]
    pub samples_per_chain: usize,
    /// Time between samples of one chain.
    #[arg(long, default_value_t = 0.0)]
    pub spacing: f64,
    /// Log-scale windows `a:b` for the IBD-to-0 mass.
    #[arg(long, default_value = "0:1")]
    pub windows: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct ThetaArgs {
    /// Number of independent samples.
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long, default_value_t = DEFAULT_TRUNC)]
    pub trunc: f64,
    /// `csv` gives the moment table, `json` the atoms of every sample.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct MoranArgs {
    /// Population size N.
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "R")]
    pub r: f64,
    /// Recombination probability per unit length; rho_N R must be in (0, 1).
    #[arg(long)]
    pub rho_n: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_events: u64,
    /// Also write the final population as `individual,seg_start,seg_end,color`.
    #[arg(long)]
    pub mosaic_csv: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: u64,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub outputs: Vec<String>,
}

fn write_manifest(command: &str, params: &impl Serialize, seed: u64, outputs: &[&Path]) -> Result<()> {
    let Some(first) = outputs.first() else {
        return Ok(());
    };
    let manifest = RunManifest {
        command: command.to_string(),
        parameters: serde_json::to_value(params)?,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = sibling(first, "manifest.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &manifest)?;
    Ok(())
}

/// `dir/stem.suffix` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

/// Parses `a:b,c:d`.
pub fn parse_windows(s: &str) -> Result<Vec<(f64, f64)>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|w| {
            let (a, b) = w
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("window {w:?} is not of the form a:b")))?;
            let num = |t: &str| {
                f64::from_str(t.trim()).map_err(|e| Error::Parse(format!("window bound {t:?}: {e}")))
            };
            Ok((num(a)?, num(b)?))
        })
        .collect()
}

fn cmd_exact(args: &ExactArgs) -> Result<()> {
    let z: LociSet = args.loci.parse()?;
    let table = stationary_exact(&z, args.rho)?;
    let mut out = open_out(&args.common.out)?;
    match args.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => {
            let rows: Vec<Value> = table
                .iter()
                .map(|(pi, p)| json!({ "partition": pi.to_string(), "probability": p }))
                .collect();
            serde_json::to_writer_pretty(&mut out, &json!({ "loci": z.positions(), "rho": args.rho, "residual": table.residual(), "states": rows }))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    write_manifest("exact", args, args.common.seed, &args.common.out.iter().map(PathBuf::as_path).collect::<Vec<_>>())
}

#[derive(Debug, Serialize)]
struct ApproxRow {
    partition: String,
    order: usize,
    exact: f64,
    approx: f64,
    rel_error: f64,
}

fn cmd_approx(args: &ExactArgs) -> Result<()> {
    let z: LociSet = args.loci.parse()?;
    let table = stationary_exact(&z, args.rho)?;
    let rows = table
        .iter()
        .map(|(pi, exact)| {
            // F(pi_0) = 1 and rho^0 = 1
            let approx = if pi.is_singletons() { 1.0 } else { approx_stationary(pi, &z, args.rho)? };
            Ok(ApproxRow {
                partition: pi.to_string(),
                order: pi.order(),
                exact,
                approx,
                rel_error: (exact - approx).abs() / approx,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = open_out(&args.common.out)?;
    match args.format {
        Format::Csv => {
            writeln!(out, "partition,order,exact,approx,rel_error")?;
            for r in &rows {
                writeln!(
                    out,
                    "\"{}\",{},{},{},{}",
                    r.partition,
                    r.order,
                    format_sig17(r.exact),
                    format_sig17(r.approx),
                    format_sig17(r.rel_error)
                )?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    write_manifest("approx", args, args.common.seed, &args.common.out.iter().map(PathBuf::as_path).collect::<Vec<_>>())
}

fn cmd_sim_interval(args: &SimIntervalArgs) -> Result<()> {
    let work = args.r * args.replicates as f64;
    if work > MAX_SIM_WORK {
        return Err(Error::Precondition(format!(
            "R * replicates = {work:e} exceeds the limit {MAX_SIM_WORK:e}"
        )));
    }
    let windows = parse_windows(&args.windows)?;
    let last = args.t_burn + args.samples_per_chain.saturating_sub(1) as f64 * args.spacing;
    let sim = SimConfig::new(args.rho, args.r, args.t_burn, args.t_max.unwrap_or(last), args.common.seed)?;
    if last > sim.t_max {
        return Err(Error::Precondition(format!("last sample at t = {last} is after t_max = {}", sim.t_max)));
    }
    let cfg = EnsembleConfig::new(sim, windows)?.with_chains(args.samples_per_chain, args.spacing)?;
    let reps = with_threads(args.common.threads, || equilibrium_ensemble(&cfg, args.replicates))??;
    let summary = summarize(&cfg, &reps)?;
    let mut out = open_out(&args.common.out)?;
    write_ensemble_csv(&cfg, &reps, &mut out)?;
    out.flush()?;
    drop(out);
    match &args.common.out {
        Some(path) => {
            let summary_path = sibling(path, "summary.json");
            let mut f = BufWriter::new(File::create(&summary_path)?);
            serde_json::to_writer_pretty(&mut f, &summary)?;
            writeln!(f)?;
            f.flush()?;
            write_manifest("sim-interval", args, args.common.seed, &[path.as_path(), summary_path.as_path()])?;
        }
        None => {
            serde_json::to_writer_pretty(io::stderr().lock(), &summary)?;
            eprintln!();
        }
    }
    Ok(())
}

fn cmd_theta(args: &ThetaArgs) -> Result<()> {
    if args.replicates == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let mut rng = stream_rng(args.common.seed, 0);
    let samples = (0..args.replicates)
        .map(|_| sample_theta_infty(args.trunc, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut out = open_out(&args.common.out)?;
    match args.format {
        Format::Csv => {
            let rows = MOMENT_GRID
                .iter()
                .map(|(iv, pw)| moment_check(&samples, iv, pw))
                .collect::<Result<Vec<_>>>()?;
            write_moment_csv(&rows, &mut out)?;
        }
        Format::Json => {
            let atoms: Vec<_> = samples.iter().map(|m| &m.atoms).collect();
            serde_json::to_writer(&mut out, &atoms)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    write_manifest("theta", args, args.common.seed, &args.common.out.iter().map(PathBuf::as_path).collect::<Vec<_>>())
}

fn cmd_moran(args: &MoranArgs) -> Result<()> {
    let params = MoranParams::new(args.n, args.r, args.rho_n)?;
    let mut rng = stream_rng(args.common.seed, 0);
    let mut pop = Population::new(params);
    let outcome = run_to_fixation(&mut pop, args.max_events, &mut rng);
    if !outcome.fixed {
        log::warn!("no fixation within {} events", args.max_events);
    }
    let mut out = open_out(&args.common.out)?;
    serde_json::to_writer_pretty(&mut out, &json!({ "params": params, "outcome": outcome }))?;
    writeln!(out)?;
    out.flush()?;
    let mut outputs: Vec<&Path> = args.common.out.iter().map(PathBuf::as_path).collect();
    if let Some(path) = &args.mosaic_csv {
        let mut f = BufWriter::new(File::create(path)?);
        pop.write_mosaic_csv(&mut f)?;
        f.flush()?;
        outputs.push(path);
    }
    write_manifest("moran", args, args.common.seed, &outputs)
}

/// Returns whether every criterion passed.
fn cmd_validate(args: &ValidateArgs) -> Result<bool> {
    let report = with_threads(args.common.threads, || validate::run(args.level, args.common.seed))?;
    for c in &report.criteria {
        eprintln!("{}", validate::format_line(c));
    }
    let mut out = open_out(&args.common.out)?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    write_manifest("validate", args, args.common.seed, &args.common.out.iter().map(PathBuf::as_path).collect::<Vec<_>>())?;
    Ok(report.all_passed)
}

/// Runs a parsed command; `Ok(false)` means a validation failure.
pub fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Exact(a) => cmd_exact(a).map(|_| true),
        Command::Approx(a) => cmd_approx(a).map(|_| true),
        Command::SimInterval(a) => cmd_sim_interval(a).map(|_| true),
        Command::Theta(a) => cmd_theta(a).map(|_| true),
        Command::Moran(a) => cmd_moran(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<bool>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Parse(e.to_string()))?;
    execute(&cli)
}
