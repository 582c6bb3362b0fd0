use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pilotcon::ConfigFile;
use pilotcon_cli::{run_experiment, write_results, BAxis, ExperimentName, ExperimentSpec};

/// Multi-cell TDD pilot-contamination experiments.
#[derive(Parser)]
#[command(name = "pilotcon", version)]
struct Cli {
    #[command(subcommand)]
    experiment: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-cell shared-pilot ZF rates against the closed form.
    Theorem1Verify(Options),
    /// Min rate over a grid of cross gains (a, b).
    Fig3Sweep(Options),
    /// GPS vs multi-cell MMSE min rate over antenna counts.
    Fig4Msweep(Options),
    /// Closed-form rate against its large-M limit.
    AsymptoteDemo(Options),
}

#[derive(Args)]
struct Options {
    /// Scenario file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV [default: <experiment>.csv].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated values of the cross gain a.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    a: Option<Vec<f64>>,
    /// Comma-separated values of the cross gain b.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "b_ratio")]
    b: Option<Vec<f64>>,
    /// Set b to this multiple of a.
    #[arg(long)]
    b_ratio: Option<f64>,
    /// Comma-separated antenna counts.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    m: Option<Vec<usize>>,
    #[arg(long)]
    gamma: Option<f64>,
}

fn build_spec(name: ExperimentName, opts: Options) -> anyhow::Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::preset(name);
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: ConfigFile = text.parse().with_context(|| format!("parsing {}", path.display()))?;
        spec = spec.with_base(file);
    }
    if let Some(out) = opts.out {
        spec.output = out;
    }
    if let Some(seed) = opts.seed {
        spec.base.config.rng_seed = seed;
    }
    if let Some(trials) = opts.trials {
        spec.base.trials = trials;
    }
    if let Some(gamma) = opts.gamma {
        spec.base.config.gamma = gamma;
    }
    if let Some(a) = opts.a {
        spec.a_values = a;
    }
    if let Some(b) = opts.b {
        spec.b_axis = BAxis::Values(b);
    }
    if let Some(r) = opts.b_ratio {
        spec.b_axis = BAxis::RatioOfA(r);
    }
    if let Some(m) = opts.m {
        spec.m_values = m;
    }
    Ok(spec)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (name, opts) = match cli.experiment {
        Command::Theorem1Verify(o) => (ExperimentName::Theorem1Verify, o),
        Command::Fig3Sweep(o) => (ExperimentName::Fig3Sweep, o),
        Command::Fig4Msweep(o) => (ExperimentName::Fig4Msweep, o),
        Command::AsymptoteDemo(o) => (ExperimentName::AsymptoteDemo, o),
    };
    let spec = build_spec(name, opts)?;
    let rows = run_experiment(&spec)?;
    write_results(&rows, &spec.output)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!("wrote {} rows to {}", rows.len(), spec.output.display());
    if failed > 0 {
        eprintln!("{failed} sweep points failed; see the error column");
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
