use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncschur_cli::{run_pipeline, RunConfig};

#[derive(Parser)]
#[command(name = "ncschur", version, about = "Schur analysis for noncommutative power series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schur parameters of a contractive series.
    SchurAnalyze(Flags),
    /// Series from Schur parameters.
    SchurSynthesize(Flags),
    /// Schur-class series of a multi-Toeplitz symbol.
    KernelToSchur(Flags),
    /// Multi-Toeplitz symbol of a Schur-class series.
    SchurToKernel(Flags),
    /// Smallest eigenvalue of the truncated kernel.
    KernelCheck(Flags),
    /// Displacement identity for a contractive series.
    VerifyDisplacement(Flags),
    /// Feasibility of a Nevanlinna-Pick problem.
    PickCheck(Flags),
    /// Interpolant from Pick or general scattering data.
    ScatterSolve(Flags),
    /// Colligation from Schur parameters.
    Realize(Flags),
    /// Transfer series of a colligation.
    Transfer(Flags),
    /// Analyze and resynthesize a random instance.
    RoundtripSelftest(Flags),
    /// Random Schur-class series.
    RandomSchur(Flags),
}

#[derive(Args, Clone)]
struct Flags {
    #[arg(long)]
    letters: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    values: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    tol_psd: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_contraction: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_inv: f64,
}

impl Command {
    fn split(self) -> (&'static str, Flags) {
        match self {
            Command::SchurAnalyze(f) => ("schur-analyze", f),
            Command::SchurSynthesize(f) => ("schur-synthesize", f),
            Command::KernelToSchur(f) => ("kernel-to-schur", f),
            Command::SchurToKernel(f) => ("schur-to-kernel", f),
            Command::KernelCheck(f) => ("kernel-check", f),
            Command::VerifyDisplacement(f) => ("verify-displacement", f),
            Command::PickCheck(f) => ("pick-check", f),
            Command::ScatterSolve(f) => ("scatter-solve", f),
            Command::Realize(f) => ("realize", f),
            Command::Transfer(f) => ("transfer", f),
            Command::RoundtripSelftest(f) => ("roundtrip-selftest", f),
            Command::RandomSchur(f) => ("random-schur", f),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, f) = cli.command.split();
    let cfg = RunConfig {
        letters: f.letters,
        degree: f.degree,
        levels: f.levels,
        depth: f.depth,
        seed: f.seed,
        tol_psd: f.tol_psd,
        tol_contraction: f.tol_contraction,
        tol_inv: f.tol_inv,
        input: f.input,
        output: f.output.clone(),
        points: f.points,
        values: f.values,
    };
    let outcome = run_pipeline(name, &cfg);
    for d in &outcome.diagnostics {
        eprintln!("{d}");
    }
    if let (Some(text), Some(path)) = (&outcome.output, &f.output) {
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("cannot write {}: {e}", path.display());
            println!("status=error reason=io");
            return ExitCode::from(2);
        }
    }
    println!("{}", outcome.summary);
    ExitCode::from(outcome.code as u8)
}
