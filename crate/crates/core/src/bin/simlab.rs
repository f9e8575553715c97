use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use simlab::harness::{
    run_analysis, run_ber_sweep, run_esr_sweep, run_zdc_sweep, validate, write_csv, CsvRecord, ExperimentConfig,
    ValidateOptions,
};

#[derive(Parser)]
#[command(name = "simlab", version, about = "Index-modulation information harvesting link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulated and union-bound bit error rate versus P_T/N0.
    Ber(RunArgs),
    /// Harvesting metric z_DC versus the power allocation factor.
    Zdc(RunArgs),
    /// Ergodic secrecy rate versus P_T/N0.
    Esr(RunArgs),
    /// Analytic against simulated ABER for the IR and the eavesdropper.
    Analysis(RunArgs),
    /// Run the built-in invariant checks.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the `seed` key of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; defaults to the `out` key, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<R: CsvRecord>(rows: simlab::Result<Vec<R>>, out: Option<&PathBuf>) -> simlab::Result<()> {
    write_csv(&rows?, output(out)?)
}

fn pool(threads: Option<usize>) -> simlab::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(simlab::Error::InvalidArgument("--threads must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| simlab::Error::InvalidArgument(e.to_string()))
}

fn sweep(
    a: RunArgs,
    f: impl FnOnce(&ExperimentConfig, Option<&PathBuf>) -> simlab::Result<()> + Send,
) -> simlab::Result<bool> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let out = a.out.or_else(|| cfg.out.clone());
    pool(a.threads)?.install(|| f(&cfg, out.as_ref()))?;
    Ok(true)
}

fn run(cli: Cli) -> simlab::Result<bool> {
    match cli.command {
        Command::Validate(a) => {
            let seed = match (&a.config, a.seed) {
                (_, Some(s)) => s,
                (Some(p), None) => ExperimentConfig::load(p)?.seed,
                (None, None) => 0,
            };
            let report = pool(a.threads)?.install(|| validate(&ValidateOptions { seed, an_weights: None }))?;
            let mut out = output(a.out.as_ref())?;
            write!(out, "{report}")?;
            out.flush()?;
            Ok(report.passed())
        }
        Command::Ber(a) => sweep(a, |c, o| emit(run_ber_sweep(c), o)),
        Command::Zdc(a) => sweep(a, |c, o| emit(run_zdc_sweep(c), o)),
        Command::Esr(a) => sweep(a, |c, o| emit(run_esr_sweep(c), o)),
        Command::Analysis(a) => sweep(a, |c, o| emit(run_analysis(c), o)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("simlab: {e}");
            ExitCode::from(2)
        }
    }
}
