use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use regloss_cli::report::summary_text;
use regloss_cli::{emit_report, run_experiment, ExperimentConfig, Format, Mode, Result};

#[derive(Parser, Debug)]
#[command(name = "regloss", version, about = "Mixing, norm and series-certification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config; fields not given take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Mixer seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Grid points per axis for the mixer (or the patched solution in `solve`).
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the mixing protocol and fit decay rates.
    Mix,
    /// Tabulate Sobolev norms along the protocol.
    Norms,
    /// Certify the series conditions of a construction.
    Certify {
        #[arg(long, value_enum, default_value = "1")]
        theorem: Theorem,
    },
    /// Partial sums of the norm lower bound.
    Sweep,
    /// Evaluate the truncated patched solution.
    Solve,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Theorem {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

fn execute(cli: Cli) -> Result<bool> {
    if let Some(k) = cli.threads {
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.mode = match cli.command {
        Command::Mix => Mode::Mix,
        Command::Norms => Mode::Norms,
        Command::Certify { theorem: Theorem::One } => Mode::CertifyThm1,
        Command::Certify { theorem: Theorem::Two } => Mode::CertifyThm2,
        Command::Sweep => Mode::LowerBoundSweep,
        Command::Solve => Mode::TruncatedSolution,
    };
    if let Some(seed) = cli.seed {
        cfg.mixer.protocol.seed = seed;
    }
    if let Some(m) = cli.grid {
        match cfg.mode {
            Mode::TruncatedSolution => cfg.solve.grid_points = m,
            _ => cfg.mixer.grid_points = m,
        }
    }
    if let Some(out) = cli.out {
        cfg.output = Some(out);
    }
    cfg.validate()?;
    let bundle = run_experiment(&cfg)?;
    print!("{}", summary_text(&bundle));
    if let Some(dir) = &cfg.output {
        for p in emit_report(&bundle, &Format::ALL, dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(bundle.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
