//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation violations, 2 unreadable or
//! unparsable input, 3 infeasible network or no feasible individual,
//! 4 output could not be written.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::evo::{generations_csv, run_pbil, Evaluator, EvoError, PbilParams};
use crate::lights::{
    even_split_programme, validate_programme, EncodingParams, LightsError, LightsProgramme,
    ProgrammeCodec,
};
use crate::netmodel::{parse_network, RoadNetwork};
use crate::sim::{init_world, run as run_sim, FitnessWeights, SimConfig, SimError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "sigevo",
    version,
    about = "Traffic-lights programme simulation and PBIL optimisation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network, and optionally a programme against it.
    Validate {
        network: PathBuf,
        programme: Option<PathBuf>,
    },
    /// Simulate a programme and write statistics.
    Simulate {
        network: PathBuf,
        programme: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        /// Also write per-vehicle traces as JSON lines.
        #[arg(long)]
        traces: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Optimise a programme with PBIL.
    Optimize {
        network: PathBuf,
        #[arg(long, default_value_t = 100)]
        generations: usize,
        #[arg(long, default_value_t = 50)]
        pop_size: usize,
        #[arg(long, default_value_t = 0.1)]
        theta1: f64,
        #[arg(long, default_value_t = 0.02)]
        theta2: f64,
        #[arg(long, default_value_t = 0.05)]
        theta3: f64,
        /// Generations without improvement before stopping.
        #[arg(long, default_value_t = 20)]
        patience: usize,
        /// Random redraws allowed for an irreparable individual.
        #[arg(long, default_value_t = 100)]
        retry_limit: usize,
        /// Completion and speed weights, `w_c,w_s`.
        #[arg(long, default_value = "0.5,0.5")]
        weights: FitnessWeights,
        #[command(flatten)]
        encoding: EncodingArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Worker threads for population evaluation; 0 picks one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Write the evenly split programme for a network.
    Baseline {
        network: PathBuf,
        #[command(flatten)]
        encoding: EncodingArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1000)]
    pub ticks: u64,
    /// Tick length in milliseconds.
    #[arg(long, default_value_t = 200)]
    pub tau: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            tick_ms: self.tau,
            total_ticks: self.ticks,
            seed: self.seed,
            ..SimConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EncodingArgs {
    #[arg(long, default_value_t = 300)]
    pub cycle_ticks: u32,
    #[arg(long, default_value_t = 25)]
    pub t_min: u32,
    #[arg(long, default_value_t = 15)]
    pub yellow: u32,
    #[arg(long, default_value_t = 10)]
    pub red_yellow: u32,
    #[arg(long, default_value_t = 5)]
    pub repair_gap: u32,
}

impl EncodingArgs {
    fn params(&self) -> Result<EncodingParams, Failure> {
        EncodingParams::new(
            self.cycle_ticks,
            self.t_min,
            self.yellow,
            self.red_yellow,
            self.repair_gap,
        )
        .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))
    }
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<EvoError> for Failure {
    fn from(e: EvoError) -> Self {
        let code = match &e {
            EvoError::Lights(LightsError::InfeasibleTrack { .. })
            | EvoError::NoFeasibleIndividual { .. } => EXIT_INFEASIBLE,
            EvoError::Sim(SimError::InfeasibleProgramme(_)) => EXIT_VIOLATIONS,
            _ => EXIT_PARSE,
        };
        Self::new(code, e.to_string())
    }
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<P: Serialize> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    inputs: Vec<InputDigest>,
    parameters: P,
}

fn read(path: &Path) -> Result<(String, InputDigest), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
    };
    Ok((text, digest))
}

fn load_network(path: &Path) -> Result<(RoadNetwork, InputDigest), Failure> {
    let (text, digest) = read(path)?;
    let net = parse_network(&text)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok((net, digest))
}

fn load_programme(path: &Path) -> Result<(LightsProgramme, InputDigest), Failure> {
    let (text, digest) = read(path)?;
    let prog = LightsProgramme::from_json(&text)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok((prog, digest))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", dir.display())))
}

fn manifest_json<P: Serialize>(
    subcommand: &'static str,
    inputs: Vec<InputDigest>,
    parameters: P,
) -> String {
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        inputs,
        parameters,
    };
    let mut s = serde_json::to_string_pretty(&m).expect("manifest serializes");
    s.push('\n');
    s
}

fn cmd_validate(network: &Path, programme: Option<&Path>) -> Result<i32, Failure> {
    let (net, _) = load_network(network)?;
    let Some(programme) = programme else {
        println!("ok");
        return Ok(EXIT_OK);
    };
    let (prog, _) = load_programme(programme)?;
    let violations = validate_programme(&prog, &net);
    if violations.is_empty() {
        println!("ok");
        return Ok(EXIT_OK);
    }
    for v in &violations {
        println!("{v}");
    }
    Ok(EXIT_VIOLATIONS)
}

#[derive(Serialize)]
struct SimulateParams {
    config: SimConfig,
}

fn cmd_simulate(
    network: &Path,
    programme: &Path,
    sim: &SimArgs,
    traces: bool,
    out: &Path,
) -> Result<i32, Failure> {
    let (net, net_digest) = load_network(network)?;
    let (prog, prog_digest) = load_programme(programme)?;
    let config = SimConfig {
        record_traces: traces,
        ..sim.config()
    };
    let mut world = match init_world(&net, &prog, &config) {
        Ok(w) => w,
        Err(SimError::InfeasibleProgramme(violations)) => {
            for v in &violations {
                eprintln!("{v}");
            }
            return Ok(EXIT_VIOLATIONS);
        }
        Err(e) => return Err(Failure::new(EXIT_PARSE, e.to_string())),
    };
    let stats = run_sim(&mut world, config.total_ticks);
    create_dir(out)?;
    write(out, "stats.csv", &stats.to_csv())?;
    write(out, "vehicles.csv", &stats.vehicles_csv())?;
    if traces {
        write(out, "traces.jsonl", &stats.traces_jsonl())?;
    }
    let manifest = manifest_json(
        "simulate",
        vec![net_digest, prog_digest],
        SimulateParams { config },
    );
    write(out, "manifest.json", &manifest)?;
    println!(
        "spawned {} completed {} mean speed {:.3} m/s",
        stats.spawned, stats.completed, stats.mean_speed
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct OptimizeParams {
    pbil: PbilParams,
    encoding: EncodingParams,
    weights: FitnessWeights,
    config: SimConfig,
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        Ok(f())
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    network: &Path,
    pbil: PbilParams,
    weights: FitnessWeights,
    encoding: &EncodingArgs,
    sim: &SimArgs,
    out_dir: &Path,
    jobs: usize,
) -> Result<i32, Failure> {
    let (net, net_digest) = load_network(network)?;
    let params = encoding.params()?;
    let config = sim.config();
    pbil.check()?;
    let evaluator = Evaluator::new(&net, params, config, weights, pbil.retry_limit)?;
    let outcome = with_jobs(jobs, || run_pbil(&evaluator, &pbil))??;
    let baseline = even_split_programme(evaluator.codec(), &net)
        .ok()
        .map(|p| evaluator.fitness(&p))
        .transpose()?;

    create_dir(out_dir)?;
    write(
        out_dir,
        "best_programme.json",
        &outcome.best.programme.to_json(),
    )?;
    write(
        out_dir,
        "best_chromosome.txt",
        &format!("{}\n", outcome.best.chromosome),
    )?;
    write(
        out_dir,
        "generations.csv",
        &generations_csv(&outcome.reports),
    )?;
    let mut summary = format!(
        "metric,value\nbest_fitness,{}\ngenerations,{}\n",
        outcome.best.fitness,
        outcome.reports.len() - 1
    );
    if let Some(b) = baseline {
        summary.push_str(&format!("baseline_fitness,{b}\n"));
    }
    write(out_dir, "summary.csv", &summary)?;
    let manifest = manifest_json(
        "optimize",
        vec![net_digest],
        OptimizeParams {
            pbil,
            encoding: params,
            weights,
            config,
        },
    );
    write(out_dir, "manifest.json", &manifest)?;
    match baseline {
        Some(b) => println!(
            "best fitness {:.6} (baseline {:.6})",
            outcome.best.fitness, b
        ),
        None => println!("best fitness {:.6}", outcome.best.fitness),
    }
    Ok(EXIT_OK)
}

fn cmd_baseline(network: &Path, encoding: &EncodingArgs, out: &Path) -> Result<i32, Failure> {
    let (net, _) = load_network(network)?;
    let codec = ProgrammeCodec::new(encoding.params()?, &net)
        .map_err(|e| Failure::new(EXIT_INFEASIBLE, e.to_string()))?;
    let prog = even_split_programme(&codec, &net)
        .map_err(|e| Failure::new(EXIT_INFEASIBLE, e.to_string()))?;
    fs::write(out, prog.to_json())
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", out.display())))?;
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Validate { network, programme } => cmd_validate(&network, programme.as_deref()),
        Command::Simulate {
            network,
            programme,
            sim,
            traces,
            out,
        } => cmd_simulate(&network, &programme, &sim, traces, &out),
        Command::Optimize {
            network,
            generations,
            pop_size,
            theta1,
            theta2,
            theta3,
            patience,
            retry_limit,
            weights,
            encoding,
            sim,
            out_dir,
            jobs,
        } => {
            let pbil = PbilParams {
                theta1,
                theta2,
                theta3,
                pop_size,
                max_generations: generations,
                patience,
                retry_limit,
                seed: sim.seed,
            };
            cmd_optimize(&network, pbil, weights, &encoding, &sim, &out_dir, jobs)
        }
        Command::Baseline {
            network,
            encoding,
            out,
        } => cmd_baseline(&network, &encoding, &out),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
