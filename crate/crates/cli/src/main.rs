use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use projgap_core::coboundary::Coefficients;
use projgap_core::cocycle::{restrict, CharacterSpec};
use projgap_core::error::Error;
use projgap_core::experiment::{
    build_cocycle, cocycle_report, group_info, norm_pair, norm_single, run_with_threads, scan,
    CocycleRequest, CocycleSource, PairMethod, RunConfig, DEFAULT_CHECK_SAMPLES,
};
use projgap_core::group::{EnumCaps, SubgroupLabel};
use projgap_core::ring::RingDescriptor;
use projgap_core::spectral::PowerOptions;

const EXIT_PRECONDITION: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "projgap",
    version,
    about = "Norm-gap experiments for twisted regular representations of (Z/k)^2 ⋊ SL_2(Z/k)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sizes of a ring, its SL_2 and the affine group.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// Check a phase cocycle, restrict it and decide whether it is a coboundary.
    Cocycle(CocycleArgs),
    /// Operator norms of generator sums.
    Norm {
        #[command(subcommand)]
        cmd: NormCmd,
    },
    /// All pairs kmin <= k <= k' <= kmax, one JSON line per pair plus a summary line.
    Scan(ScanArgs),
}

#[derive(Subcommand)]
enum GroupCmd {
    Info(RingArgs),
}

#[derive(Args)]
struct RingArgs {
    /// Use Z/k.
    #[arg(long, conflicts_with = "ring")]
    k: Option<u64>,
    /// Ring descriptor as JSON, e.g. '{"kind":"poly","p":3,"f":[1,0,1]}'.
    #[arg(long)]
    ring: Option<String>,
}

impl RingArgs {
    fn descriptor(&self) -> Result<RingDescriptor, Error> {
        match (&self.k, &self.ring) {
            (Some(k), _) => Ok(RingDescriptor::zmod(*k)),
            (None, Some(s)) => Ok(serde_json::from_str(s)?),
            (None, None) => Err(Error::InvalidArgument("pass --k or --ring".into())),
        }
    }
}

#[derive(Args)]
struct CocycleArgs {
    #[command(flatten)]
    ring: RingArgs,
    /// Character as JSON, e.g. '{"kind":"scaled","u":2}'; requires --ring.
    #[arg(long, requires = "ring")]
    character: Option<String>,
    /// translations, linear, or comma-separated element indices.
    #[arg(long)]
    subgroup: Option<String>,
    /// Decide whether the (restricted) cocycle is a coboundary.
    #[arg(long)]
    decide: bool,
    /// cyclic or circle.
    #[arg(long, default_value = "cyclic")]
    coefficients: String,
    #[arg(long, default_value_t = DEFAULT_CHECK_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    check_seed: u64,
    /// Write the (restricted) cocycle table as JSON.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SpectralArgs {
    /// Number of generators.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// lanczos or power.
    #[arg(long, default_value = "lanczos")]
    solver: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 20000)]
    max_iters: usize,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    seeds: Vec<u64>,
    /// Report D = sqrt(m^2 - δ^2/2) for a user-supplied δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Cap on the dimension iterated over.
    #[arg(long, default_value_t = 10_000_000)]
    max_dim: usize,
    #[arg(long, env = "PROJGAP_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SpectralArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        Ok(RunConfig {
            caps: EnumCaps::default(),
            max_pair_dim: self.max_dim,
            dense_cap: 2000,
            power: PowerOptions {
                tol: self.tol,
                max_iters: self.max_iters,
                seeds: self.seeds.clone(),
                record_history: false,
                solver: self.solver.parse()?,
            },
            threads: self.threads,
            delta: self.delta,
        })
    }
}

#[derive(Subcommand)]
enum NormCmd {
    /// Norm of the sum of the twisted regular operators of Γ_k.
    Single {
        #[arg(long)]
        k: u64,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Norm of Σ π_k(g_i) ⊗ conj(π_k'(g_i)).
    Pair {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        kprime: u64,
        /// reduced or tensor.
        #[arg(long, default_value = "reduced")]
        method: String,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    kmin: u64,
    #[arg(long)]
    kmax: u64,
    #[arg(long, default_value = "reduced")]
    method: String,
    /// Also write a CSV projection of the rows.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    spectral: SpectralArgs,
}

enum Outcome {
    Done,
    NotConverged,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn pretty<T: serde::Serialize>(v: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn cocycle(a: &CocycleArgs) -> Result<Outcome, Error> {
    let ring = a.ring.descriptor()?;
    let source = match (&a.character, &a.ring.k) {
        (Some(c), _) => CocycleSource::Character {
            ring,
            character: serde_json::from_str::<CharacterSpec>(c)?,
        },
        (None, Some(k)) => CocycleSource::Standard { k: *k },
        (None, None) => CocycleSource::Character {
            ring,
            character: CharacterSpec::Canonical,
        },
    };
    let coefficients = match a.coefficients.as_str() {
        "cyclic" => Coefficients::Cyclic,
        "circle" => Coefficients::Circle,
        other => return Err(Error::Parse(format!("unknown coefficients {other:?}"))),
    };
    let subgroup = a
        .subgroup
        .as_deref()
        .map(str::parse::<SubgroupLabel>)
        .transpose()?;
    let mut req = CocycleRequest::new(source);
    req.subgroup = subgroup;
    req.decide = a.decide;
    req.coefficients = coefficients;
    req.samples = a.samples;
    req.seed = a.check_seed;
    let caps = EnumCaps::default();
    let report = cocycle_report(&req, caps)?;
    if let Some(path) = &a.export {
        let (_, c) = build_cocycle(&req.source, caps)?;
        let c = match &req.subgroup {
            Some(label) => restrict(&c, label)?,
            None => c,
        };
        fs::write(path, pretty(&c.to_table()?)?)?;
    }
    emit(&a.out, &pretty(&report)?)?;
    Ok(Outcome::Done)
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Group {
            cmd: GroupCmd::Info(r),
        } => {
            let info = group_info(&r.descriptor()?, EnumCaps::default())?;
            emit(&None, &pretty(&info)?)?;
            Ok(Outcome::Done)
        }
        Command::Cocycle(a) => cocycle(&a),
        Command::Norm { cmd } => {
            let (report, out) = match cmd {
                NormCmd::Single { k, spectral } => {
                    let cfg = spectral.config()?;
                    let r = run_with_threads(cfg.threads, || norm_single(k, spectral.m, &cfg))??;
                    (r, spectral.out)
                }
                NormCmd::Pair {
                    k,
                    kprime,
                    method,
                    spectral,
                } => {
                    let cfg = spectral.config()?;
                    let method: PairMethod = method.parse()?;
                    let r = run_with_threads(cfg.threads, || {
                        norm_pair(k, kprime, spectral.m, method, &cfg)
                    })??;
                    (r, spectral.out)
                }
            };
            emit(&out, &pretty(&report)?)?;
            Ok(if report.all_converged {
                Outcome::Done
            } else {
                Outcome::NotConverged
            })
        }
        Command::Scan(a) => {
            let cfg = a.spectral.config()?;
            let method: PairMethod = a.method.parse()?;
            let report = scan(a.kmin, a.kmax, a.spectral.m, method, &cfg)?;
            if let Some(p) = &a.csv {
                fs::write(p, report.to_csv()?)?;
            }
            emit(&a.spectral.out, &report.to_json_lines()?)?;
            Ok(if report.summary.all_converged {
                Outcome::Done
            } else {
                Outcome::NotConverged
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => {
            eprintln!("projgap: power iteration did not converge for every seed");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(e) => {
            eprintln!("projgap: {e}");
            if e.is_precondition() {
                ExitCode::from(EXIT_PRECONDITION)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
