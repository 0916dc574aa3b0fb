use std::path::PathBuf;
use std::process::ExitCode;

use aqm_cli::commands::{cmd_correlate, cmd_decompose, cmd_measure, DecomposeMode};
use clap::{Parser, Subcommand};

/// Full-reference audio quality measures and correlation reports.
#[derive(Parser)]
#[command(name = "aqm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every manifest item with the configured measures.
    Measure {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Results CSV; defaults to `output.results` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, overriding the config.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Split a signal into target, interference and artifact components.
    Decompose {
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        other: Vec<PathBuf>,
        #[arg(long, value_enum)]
        mode: DecomposeMode,
        #[arg(long, default_value_t = 512)]
        taps: usize,
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Correlate results with the manifest's subjective scores.
    Correlate {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_ERROR: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Measure {
            manifest,
            config,
            out,
            parallelism,
        } => {
            if parallelism == Some(0) {
                anyhow::bail!("--parallelism must be at least 1");
            }
            let o = cmd_measure(&manifest, &config, out.as_deref(), parallelism)?;
            for r in o.rows.iter().filter(|r| !r.valid) {
                eprintln!(
                    "warning: {}/{}/{} {}: {}",
                    r.test_id, r.item_id, r.condition_id, r.measure, r.note
                );
            }
            eprintln!("{} results, {} invalid", o.rows.len(), o.invalid);
            Ok(if o.invalid > 0 { ExitCode::from(EXIT_PARTIAL) } else { ExitCode::SUCCESS })
        }
        Command::Decompose {
            test,
            target,
            other,
            mode,
            taps,
            outdir,
        } => {
            let o = cmd_decompose(&test, &target, &other, mode, taps, &outdir)?;
            println!("{}", serde_json::to_string(&o)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Correlate { results, manifest, out } => {
            let o = cmd_correlate(&results, &manifest, &out)?;
            for w in o.warnings.iter().chain(&o.report.warnings) {
                eprintln!("warning: {w}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
