//! `favgame`: curves, certificates, LP checks, instance analysis, and
//! randomized stress search for the two-machine favorite-machines
//! scheduling game.

mod commands;
mod format;
mod instance_file;

use clap::{Parser, Subcommand, ValueEnum};

/// Exit codes: 0 pass, 1 verification failure, 2 usage/input error,
/// 3 solver failure, 4 resource cap exceeded.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Usage(String),
    Solver(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Cap(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m)
            | Failure::Usage(m)
            | Failure::Solver(m)
            | Failure::Cap(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "favgame",
    about = "Equilibria and anarchy bounds for the two-machine favorite-machines scheduling game",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CertKind {
    Spoa,
    Poa,
    Example1,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LpMode {
    Se,
    Ne,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SizeDist {
    Uniform,
    Exp,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the PoA/SPoA curves as CSV rows over a range of s.
    Curve {
        #[arg(long = "s-min", default_value = "1.0")]
        s_min: f64,
        #[arg(long = "s-max", default_value = "3.0")]
        s_max: f64,
        #[arg(long, default_value = "0.01")]
        step: f64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Print the seven SPoA segment breakpoints.
    Breakpoints,
    /// Build a worst-case certificate instance and verify it end to end.
    Certify {
        #[arg(long, value_enum)]
        kind: CertKind,
        /// SPoA curve segment (1..=8); required for --kind spoa.
        #[arg(long)]
        segment: Option<u8>,
        /// Slowdown factor: integer, decimal, or rational "p/q".
        #[arg(long)]
        s: String,
    },
    /// Compare the branch-LP maximum against the closed-form curve at s.
    LpCheck {
        #[arg(long)]
        s: String,
        #[arg(long, value_enum)]
        mode: LpMode,
    },
    /// Analyze an instance file: optimum, all NE, all SE, worst ratios.
    Analyze {
        #[arg(long)]
        file: std::path::PathBuf,
        /// Also print one improving coalition per NE that is not strong.
        #[arg(long)]
        coalitions: bool,
    },
    /// Random instances at fixed s; checks no ratio beats the curves.
    Search {
        #[arg(long)]
        s: String,
        #[arg(long)]
        jobs: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value = "0")]
        seed: u64,
        #[arg(long = "size-dist", value_enum, default_value = "uniform")]
        size_dist: SizeDist,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Curve {
            s_min,
            s_max,
            step,
            out,
        } => commands::curve(s_min, s_max, step, out.as_deref()),
        Command::Breakpoints => commands::breakpoints(),
        Command::Certify { kind, segment, s } => commands::certify(kind, segment, &s),
        Command::LpCheck { s, mode } => commands::lp_check(&s, mode),
        Command::Analyze { file, coalitions } => commands::analyze(&file, coalitions),
        Command::Search {
            s,
            jobs,
            trials,
            seed,
            size_dist,
        } => commands::search(&s, jobs, trials, seed, size_dist),
    };
    if let Err(failure) = result {
        eprintln!("error: {}", failure.message());
        std::process::exit(failure.code());
    }
}
