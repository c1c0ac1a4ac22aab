//! Deterministic experiment drivers for the `bicluster` library.
//!
//! Every command writes plain-text tables with a `#` manifest header and
//! exits with 0 on success, 1 when an invariant check of the pipeline
//! failed, 2 on invalid input, 3 when a budget guard trips and 4 on I/O
//! errors.

mod commands;
pub mod error;
pub mod output;
pub mod source;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bicluster::optimize::{SampleConfig, Variant};

pub use error::{CliError, CliResult};
pub use output::{number, Document, Manifest, Units};
pub use source::{load_source, parse_pmf};

#[derive(Debug, Parser)]
#[command(
    name = "bicluster",
    version,
    about = "Bounds for distributed biclustering on finite alphabets"
)]
pub struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binary region surface (R1, R2, mu) over a crossover mesh.
    DsbsSurface(SurfaceArgs),
    /// Symmetric-rate inner and sampled outer boundaries on a rate window.
    DsbsGap(GapArgs),
    /// Sampled relevance-compression curve.
    IbCurve(IbArgs),
    /// Random search for a negative conjecture margin.
    Conjecture(ConjectureArgs),
    /// Exhaustive best co-information over small block codes.
    Bruteforce(BruteforceArgs),
    /// Raw sampled region points.
    RegionSample(RegionArgs),
    /// Method-of-types property checks.
    TypicalityCheck(TypicalityArgs),
    /// Support-function values under two cardinality caps.
    Cardinality(CardinalityArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Units::Nats)]
    pub units: Units,
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 100)]
    pub refine_top: usize,
    #[arg(long, default_value_t = 500)]
    pub refine_steps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub step_size: f64,
    #[arg(long, default_value_t = 1.0)]
    pub concentration: f64,
}

impl SamplingArgs {
    pub fn config(&self, caps: Option<(usize, usize)>) -> SampleConfig {
        SampleConfig {
            seed: self.seed,
            count: self.samples,
            concentration: self.concentration,
            u_cap: caps.map(|c| c.0),
            v_cap: caps.map(|c| c.1),
            refine_top: self.refine_top,
            refine_steps: self.refine_steps,
            step_size: self.step_size,
        }
    }

    fn record(&self, m: Manifest) -> Manifest {
        m.with("seed", self.seed)
            .with("samples", self.samples)
            .with("refine_top", self.refine_top)
            .with("refine_steps", self.refine_steps)
            .with("step_size", self.step_size)
            .with("concentration", self.concentration)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[arg(long, default_value_t = 0.25)]
    pub p: f64,
    /// Points per crossover axis on [0, 1/2].
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Rate window `lo,hi`.
    #[arg(long, value_parser = parse_pair::<f64>, default_value = "0.673,0.694")]
    pub window: (f64, f64),
    /// Evenly spaced rates across the window.
    #[arg(long, default_value_t = 22)]
    pub grid: usize,
    #[arg(long, value_parser = parse_pair::<usize>)]
    pub caps: Option<(usize, usize)>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Output directory for `outer.dat` and `inner.dat`.
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IbArgs {
    #[arg(long, default_value = "dsbs:0.1")]
    pub source: String,
    /// Evenly spaced rates on [0, rmax].
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    /// Largest rate; defaults to H(x).
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Cap on |U|; defaults to |X| + 1.
    #[arg(long)]
    pub caps: Option<usize>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConjectureArgs {
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BruteforceArgs {
    #[arg(long, default_value = "dsbs:0.25")]
    pub source: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub m1: usize,
    #[arg(long, default_value_t = 2)]
    pub m2: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    #[arg(long, default_value = "dsbs:0.1")]
    pub source: String,
    /// One of inner, ro, ro-prime, bottleneck.
    #[arg(long, default_value = "ro")]
    pub variant: Variant,
    #[arg(long, value_parser = parse_pair::<usize>)]
    pub caps: Option<(usize, usize)>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TypicalityArgs {
    #[arg(long)]
    pub seed: u64,
    /// Random sequences for the probability identity.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CardinalityArgs {
    #[arg(long, default_value = "dsbs:0.1")]
    pub source: String,
    /// Semicolon-separated weights `l1,l2,l3;...`.
    #[arg(long, default_value = "1,-0.3,-0.3")]
    pub weights: String,
    #[arg(long, default_value = "ro")]
    pub variant: Variant,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<T>()
            .map_err(|_| format!("bad value `{t}`"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// Result of a successful command: written files, summary lines and failed
/// invariant checks.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let go = || match &cli.command {
        Command::DsbsSurface(a) => commands::dsbs_surface(a),
        Command::DsbsGap(a) => commands::dsbs_gap(a),
        Command::IbCurve(a) => commands::ib_curve(a),
        Command::Conjecture(a) => commands::conjecture(a),
        Command::Bruteforce(a) => commands::bruteforce(a),
        Command::RegionSample(a) => commands::region_sample(a),
        Command::TypicalityCheck(a) => commands::typicality_check(a),
        Command::Cardinality(a) => commands::cardinality(a),
    };
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}

/// Parses `args`, runs the command, reports on stdout and stderr and
/// returns the exit code.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let code = match run(&cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            for failure in &outcome.failures {
                eprintln!("FAIL invariant: {failure}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            e.exit_code()
        }
    };
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    code
}
