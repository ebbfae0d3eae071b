//! Command-line front end for the sparse-ose harness.
//!
//! Exit codes: 0 on success, 1 when an invariant or lemma check fails,
//! 2 on usage or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sparse_ose::auditor::{attack, AttackConfig, Verdict};
use sparse_ose::harness::{
    config::{FamilySpec, InstanceKind},
    emit_report, min_m_search, replay_trial, run_sweep, verify_lemmas, SweepConfig,
};
use sparse_ose::matrix::{sparse_dot, SparseColMatrix};
use sparse_ose::sketches::SketchSpec;

#[derive(Parser)]
#[command(name = "ose", about = "Sparse oblivious subspace embedding toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sketch construction utilities.
    #[command(subcommand)]
    Sketch(SketchCommand),
    /// Audit a sketch: fix its parameters and hunt for a heavy column pair.
    Audit(AuditArgs),
    /// Run a failure-probability sweep from a config file.
    Sweep(SweepArgs),
    /// Bisect for the smallest row count meeting a failure budget.
    MinM(MinMArgs),
    /// Run the lemma verification batteries.
    VerifyLemmas(VerifyArgs),
    /// Re-run a single sweep trial standalone.
    Replay(ReplayArgs),
}

#[derive(Subcommand)]
enum SketchCommand {
    /// Materialize the sketch described by a key=value spec file.
    Sample(SketchSampleArgs),
}

#[derive(Args)]
struct SketchSampleArgs {
    /// Spec file (family=..., m=..., n=..., s=..., eps=..., d_block=..., seed=...).
    #[arg(long)]
    spec: PathBuf,
    /// Output path for the matrix text format.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    /// Sketch in the matrix text format.
    #[arg(long)]
    sketch: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    seed: u64,
    /// Subspace dimension the instance sizing targets.
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Worker threads (0 = rayon default). Results are identical either way.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct MinMArgs {
    /// count_sketch | osnap | dense_rademacher | hadamard_block | identity_stub
    #[arg(long)]
    family: String,
    /// Per-column nonzeros (osnap only).
    #[arg(long)]
    s: Option<usize>,
    /// Tile scale (hadamard_block only).
    #[arg(long)]
    d_block: Option<usize>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    /// random_subspace | hard_mixture | hard_beta:<ell> | hadamard_adversarial
    #[arg(long)]
    instance: String,
    #[arg(long, default_value_t = 200)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    families: usize,
    #[arg(long, default_value_t = 12)]
    max_size: usize,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    config: PathBuf,
    /// Global trial index: grid_index * trials + trial.
    #[arg(long)]
    trial: u64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> sparse_ose::Result<ExitCode> {
    match cli.command {
        Command::Sketch(SketchCommand::Sample(args)) => {
            let spec = SketchSpec::from_text(&std::fs::read_to_string(&args.spec)?)?;
            let matrix = spec.build();
            std::fs::write(&args.out, matrix.to_text())?;
            println!(
                "wrote {} ({}x{}, {} nonzeros)",
                args.out.display(),
                matrix.rows(),
                matrix.cols(),
                matrix.nnz()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Audit(args) => {
            let sketch = SparseColMatrix::from_text(&std::fs::read_to_string(&args.sketch)?)?;
            let config = AttackConfig {
                gamma: args.gamma,
                ..AttackConfig::default()
            };
            let outcome = attack(&sketch, args.eps, args.d, args.seed, &config)?;
            print!("{}", outcome.transcript_text());
            println!(
                "good columns: {}, collected: {}",
                outcome.good_column_count, outcome.collected_set_size
            );
            match outcome.verdict {
                Verdict::PairFound {
                    examined,
                    unexamined,
                    inner,
                } => {
                    println!("verdict: pair found ({examined}, {unexamined}) inner {inner}");
                    let direct = sparse_dot(sketch.column(examined), sketch.column(unexamined));
                    if (direct - inner).abs() > 1e-12 {
                        eprintln!(
                            "invariant violation: transcript inner product {inner} != direct {direct}"
                        );
                        return Ok(ExitCode::from(1));
                    }
                }
                Verdict::CollisionFound { column } => {
                    println!("verdict: collision on column {column}");
                }
                Verdict::Inconclusive => println!("verdict: inconclusive"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let cfg = SweepConfig::parse(&std::fs::read_to_string(&args.config)?)?;
            let records = if args.workers == 0 {
                run_sweep(&cfg)?
            } else {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(args.workers)
                    .build()
                    .map_err(|e| sparse_ose::Error::InvalidParameter(e.to_string()))?;
                pool.install(|| run_sweep(&cfg))?
            };
            let (csv, svg) = emit_report(&records, &args.out_dir)?;
            for r in &records {
                println!(
                    "{} m={} delta_hat={} ci=[{}, {}]",
                    r.family, r.m, r.delta_hat, r.ci_low, r.ci_high
                );
            }
            println!("wrote {} and {}", csv.display(), svg.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::MinM(args) => {
            let family = parse_family(&args.family, args.s, args.d_block)?;
            let instance = InstanceKind::parse(&args.instance)?;
            let m = min_m_search(
                family,
                args.n,
                args.d,
                args.eps,
                args.delta,
                instance,
                args.trials,
                args.seed,
            )?;
            println!("m_star = {m}");
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyLemmas(args) => {
            let report = verify_lemmas(args.seed, args.families, args.max_size, &[0.5, 0.25, 0.125]);
            println!("{report}");
            if report.fatal() {
                eprintln!("lemma violation detected");
                Ok(ExitCode::from(1))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Replay(args) => {
            let cfg = SweepConfig::parse(&std::fs::read_to_string(&args.config)?)?;
            let rep = replay_trial(&cfg, args.trial)?;
            println!(
                "m={} trial={} verdict={} sigma_min={} sigma_max={} eps_hat={}",
                rep.m,
                rep.trial,
                if rep.failed { "failure" } else { "embedded" },
                rep.report.sigma_min,
                rep.report.sigma_max,
                rep.report.eps_hat
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_family(
    name: &str,
    s: Option<usize>,
    d_block: Option<usize>,
) -> sparse_ose::Result<FamilySpec> {
    match name {
        "count_sketch" => Ok(FamilySpec::CountSketch),
        "osnap" => {
            let s = s
                .ok_or_else(|| sparse_ose::Error::InvalidParameter("osnap needs --s".into()))?;
            Ok(FamilySpec::Osnap { s })
        }
        "dense_rademacher" => Ok(FamilySpec::DenseRademacher),
        "hadamard_block" => Ok(FamilySpec::HadamardBlock { d_block }),
        "identity_stub" => Ok(FamilySpec::IdentityStub),
        other => Err(sparse_ose::Error::Parse(format!("unknown family {other:?}"))),
    }
}
