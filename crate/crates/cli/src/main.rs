//! `nondiv`: command-line frontend for the laboratory.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 `--check` gate failed.

mod commands;
mod config;
mod schedule;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "nondiv", version, about = "Non-divergence polytopes, divergence graphs and lattice statistics for SL(N)")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// RNG seed, required by stochastic runs
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Decimal digits for number-field embeddings
    #[arg(long, global = true, default_value_t = 30)]
    pub precision: u32,
    /// Worker threads (results do not depend on it)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file (stdout if omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Evaluate the command's acceptance gate; exit 4 if it fails
    #[arg(long, global = true)]
    pub check: bool,
    /// TOML or JSON experiment file, used instead of a subcommand
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    #[command(subcommand)]
    Torus(commands::TorusCmd),
    #[command(subcommand)]
    Polytope(commands::PolytopeCmd),
    #[command(subcommand)]
    Graph(commands::GraphCmd),
    #[command(subcommand)]
    Equidist(commands::EquidistCmd),
    #[command(subcommand)]
    Count(commands::CountCmd),
    #[command(subcommand)]
    Examples(commands::ExamplesCmd),
    #[command(subcommand)]
    Resscalars(commands::ResscalarsCmd),
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Check(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<nondiv::Error> for Failure {
    fn from(e: nondiv::Error) -> Self {
        use nondiv::arith::ArithError as A;
        use nondiv::Error as E;
        let msg = e.to_string();
        match e {
            E::Precondition(_)
            | E::Dimension(_)
            | E::LieParam(_)
            | E::EmptyBox
            | E::Ambiguous(_)
            | E::Normalization(_)
            | E::Insufficient(_)
            | E::NonIntegral(_)
            | E::Determinant(_)
            | E::ZeroVector => Failure::Validation(msg),
            E::Arith(A::RootRefinement { .. } | A::DivisionByZero) => Failure::Numerical(msg),
            E::Arith(_) => Failure::Validation(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

fn argv_from_config(path: &PathBuf) -> Result<Vec<String>, Failure> {
    let cfg = config::load(path).map_err(Failure::Validation)?;
    let mut argv = config::to_argv(&cfg, path).map_err(Failure::Validation)?;
    // explicit global flags on the real command line override the file
    let mut raw = std::env::args().skip(1);
    while let Some(a) = raw.next() {
        if a == "--config" {
            raw.next();
        } else if !a.starts_with("--config=") {
            argv.push(a);
        }
    }
    Ok(argv)
}

fn execute() -> Result<(), Failure> {
    let cli = Cli::try_parse().map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            let _ = e.print();
            std::process::exit(0);
        }
        _ => Failure::Validation(e.render().to_string()),
    })?;
    let cli = match (&cli.global.config, &cli.command) {
        (Some(_), Some(_)) => return Err(Failure::Validation("give either a subcommand or --config, not both".into())),
        (None, None) => return Err(Failure::Validation("no subcommand given; see --help".into())),
        (None, Some(_)) => cli,
        (Some(path), None) => {
            let argv = argv_from_config(path)?;
            let parsed = Cli::try_parse_from(&argv).map_err(|e| {
                Failure::Validation(format!(
                    "config {} (keys of [args] map to --flags): {}",
                    path.display(),
                    e.render()
                ))
            })?;
            if parsed.command.is_none() {
                return Err(Failure::Validation(format!("config {}: missing command", path.display())));
            }
            parsed
        }
    };
    if let Some(w) = cli.global.workers {
        if w == 0 {
            return Err(Failure::Validation("--workers must be ≥ 1".into()));
        }
        nondiv::par::set_workers(w).map_err(Failure::Validation)?;
    }
    if let Some(out) = &cli.global.out {
        let parent = out.parent().filter(|p| !p.as_os_str().is_empty());
        if parent.is_some_and(|p| !p.is_dir()) {
            return Err(Failure::Validation(format!("output directory of {} does not exist", out.display())));
        }
    }
    commands::run(cli.command.expect("checked above"), &cli.global)
}

fn main() -> ExitCode {
    match execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nondiv: {f}");
            ExitCode::from(f.code())
        }
    }
}
