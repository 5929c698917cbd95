use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdl_cli::config::{Command as RunCommand, Grading};
use sdl_cli::{emit, parse_config, run};

/// Numerical laboratory for singular Dirichlet problems
/// -u'' = K u^{-alpha} - lambda M u^{-gamma} on intervals and balls:
/// existence certificates, constructive solves, and threshold mapping.
#[derive(Parser)]
#[command(name = "sdl", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output_path).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the number of grid cells.
    #[arg(long)]
    n: Option<usize>,
    /// Override the iteration tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the grading exponent.
    #[arg(long)]
    grading: Option<f64>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Evaluate the existence/nonexistence certificates.
    Certify(CommonArgs),
    /// Run the constructive fixed-point solver.
    Solve(CommonArgs),
    /// Bracket the existence threshold lambda_0 by bisection.
    Threshold(CommonArgs),
    /// Probe solvability along a lambda or gamma axis.
    Sweep(CommonArgs),
    /// Evaluate the ball-domain certificates.
    RadialCertify(CommonArgs),
    /// Solve the radial problem on a ball.
    RadialSolve(CommonArgs),
}

impl CliCommand {
    fn split(self) -> (RunCommand, CommonArgs) {
        match self {
            CliCommand::Certify(a) => (RunCommand::Certify, a),
            CliCommand::Solve(a) => (RunCommand::Solve, a),
            CliCommand::Threshold(a) => (RunCommand::Threshold, a),
            CliCommand::Sweep(a) => (RunCommand::Sweep, a),
            CliCommand::RadialCertify(a) => (RunCommand::RadialCertify, a),
            CliCommand::RadialSolve(a) => (RunCommand::RadialSolve, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version are ordinary exits; usage errors are
            // numerical-failure class (3).
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (command, args) = cli.command.split();
    match execute(command, args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn execute(command: RunCommand, args: CommonArgs) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", args.config.display()))?;
    let mut cfg = parse_config(&text, command).map_err(|e| anyhow::anyhow!(e))?;
    // Flags win over file values.
    if let Some(n) = args.n {
        cfg.numerics.n = n;
    }
    if let Some(tol) = args.tol {
        cfg.numerics.tol = tol;
    }
    if let Some(g) = args.grading {
        cfg.numerics.grading = Grading::Value(g);
    }
    if args.n.is_some() || args.tol.is_some() || args.grading.is_some() {
        // Re-validate the overridden numerics.
        let echo = serde_json::to_string(&cfg)?;
        cfg = parse_config(&echo, command).map_err(|e| anyhow::anyhow!(e))?;
    }
    let out_dir = args
        .out
        .unwrap_or_else(|| PathBuf::from(cfg.output_path.clone()));
    let output = run(&cfg)?;
    let written = emit(&output, &out_dir)?;
    for path in &written {
        println!("{}", path.display());
    }
    Ok(output.exit_code as u8)
}
