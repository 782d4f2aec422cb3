use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mather_lab::config::{BetaFkParams, QcParams, SequenceKind, StableNormParams, TorusSeqParams};
use mather_lab::{load_dir, run, sweep, EngineParams, ExperimentConfig, RunError, RunManifest};

#[derive(Parser)]
#[command(
    name = "mather-lab",
    version,
    about = "Numerical experiments on beta functions, stable norms and torus heights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one TOML experiment config.
    Run { config: PathBuf },
    /// Run every `*.toml` config in a directory.
    Sweep {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Beta function of the Frenkel-Kontorova chain over Farey fractions.
    BetaFk(BetaFkArgs),
    /// Stable norm of a periodic graph.
    StableNorm(StableNormArgs),
    /// Heights modulo one along a lattice walk.
    TorusSeq(TorusSeqArgs),
    /// Components of a cut-and-project quasicrystal window.
    Qc(QcArgs),
}

#[derive(Args)]
struct BetaFkArgs {
    #[arg(long = "K")]
    k: f64,
    #[arg(long = "Q")]
    q: u64,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fractions `p/q` where corner gaps are reported.
    #[arg(long, value_delimiter = ',')]
    corners: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_vector(s: &str) -> Result<Vec<i64>, String> {
    s.split(',').map(|x| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}"))).collect()
}

#[derive(Args)]
struct StableNormArgs {
    #[arg(long, conflicts_with = "model")]
    graph: Option<PathBuf>,
    /// `flat2`, `flat3` or `hedlund`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Class as comma-separated integers; repeat for several.
    #[arg(long, value_parser = parse_vector)]
    h: Vec<Vec<i64>>,
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long, default_value_t = 3)]
    margin: i64,
    /// Section plane as `a1,a2,..;b1,b2,..`.
    #[arg(long)]
    section: Option<String>,
    #[arg(long, default_value_t = 64)]
    directions: usize,
    /// Count classes with norm at most T.
    #[arg(long)]
    count: Option<f64>,
    #[arg(long, default_value = "stable-norm")]
    out: PathBuf,
}

#[derive(Args)]
struct TorusSeqArgs {
    #[arg(long, value_parser = ["avoid", "random", "fib", "allwords"])]
    kind: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    p_right: Option<f64>,
    /// `zero-right` or `zero-up`.
    #[arg(long)]
    letters: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QcArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    window: i64,
    #[arg(long, conflicts_with = "k")]
    cantor_gaps: Option<usize>,
    /// Forbidden heights as `a,b;c,d`.
    #[arg(long = "K")]
    k: Option<String>,
    #[arg(long)]
    refine_to: Option<usize>,
    /// Also write `x y z height component` rows.
    #[arg(long)]
    points: bool,
    #[arg(long)]
    out: PathBuf,
}

fn parse_section(s: &str) -> Result<[Vec<i64>; 2], String> {
    let (a, b) = s.split_once(';').ok_or_else(|| format!("expected 'a;b', got {s:?}"))?;
    Ok([parse_vector(a)?, parse_vector(b)?])
}

fn config(command: Command) -> Result<Vec<ExperimentConfig>, RunError> {
    let one =
        |params, seed, out| ExperimentConfig::new(params, seed, out).map(|c| vec![c]).map_err(RunError::from);
    match command {
        Command::Run { config } => Ok(vec![ExperimentConfig::load(&config)?]),
        Command::Sweep { dir, .. } => load_dir(&dir),
        Command::BetaFk(a) => one(
            EngineParams::BetaFk(BetaFkParams {
                k: Some(a.k),
                table: None,
                q: a.q,
                restarts: a.restarts,
                dual_points: 601,
                corners: a.corners,
            }),
            Some(a.seed),
            a.out,
        ),
        Command::StableNorm(a) => {
            let section = a.section.as_deref().map(parse_section).transpose().map_err(|message| {
                RunError::Engine { path: "<stable-norm>".into(), key: "section".into(), message }
            })?;
            one(
                EngineParams::StableNorm(StableNormParams {
                    graph: a.graph,
                    model: a.model,
                    epsilon: a.epsilon,
                    h: a.h,
                    n: a.n,
                    margin: a.margin,
                    section,
                    directions: a.directions,
                    count: a.count,
                }),
                None,
                a.out,
            )
        }
        Command::TorusSeq(a) => {
            let kind = match a.kind.as_str() {
                "avoid" => SequenceKind::Avoid,
                "random" => SequenceKind::Random,
                "fib" => SequenceKind::Fib,
                _ => SequenceKind::Allwords,
            };
            one(
                EngineParams::TorusSeq(TorusSeqParams {
                    kind,
                    alpha: a.alpha,
                    beta: a.beta,
                    n: a.n,
                    p_right: a.p_right,
                    letters: a.letters,
                    delta: a.delta,
                    check_independence: None,
                    write_heights: true,
                }),
                a.seed,
                a.out,
            )
        }
        Command::Qc(a) => one(
            EngineParams::Qc(QcParams {
                alpha: a.alpha,
                beta: a.beta,
                window: a.window,
                cantor_gaps: a.cantor_gaps,
                k: a.k,
                refine_to: a.refine_to,
                write_points: a.points,
            }),
            None,
            a.out,
        ),
    }
}

fn report(m: &RunManifest) {
    println!("{} {}", if m.passed { "PASS" } else { "FAIL" }, m.output_dir.display());
    for c in m.checks.iter().filter(|c| !c.pass) {
        println!("  failed {}: {}", c.name, c.detail);
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let jobs = match &cli.command {
        Command::Sweep { jobs, .. } => Some(*jobs),
        _ => None,
    };
    let cfgs = match config(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let results = match jobs {
        Some(jobs) => match sweep(&cfgs, jobs) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => vec![run(&cfgs[0])],
    };
    let mut ok = true;
    for r in &results {
        match r {
            Ok(m) => {
                log::info!("{} finished in {:.3}s", m.output_dir.display(), m.wall_time_s);
                report(m);
                ok &= m.passed;
            }
            Err(e) => {
                eprintln!("error: {e}");
                ok = false;
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
