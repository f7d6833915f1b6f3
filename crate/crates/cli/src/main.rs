use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynabench::pipeline::{self, Manifest, Overrides, PipelineError};

#[derive(Parser)]
#[command(
    name = "dynabench",
    version,
    about = "Dynamic-circuit benchmark pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one circuit file per suite instance.
    Generate(Common),
    /// Simulate every circuit under the manifest's noise preset.
    Run(Common),
    /// Compute features.csv from the circuit files.
    Featurize(Common),
    /// Compute scores.csv from the recorded counts.
    Score(Common),
    /// Fit the ridge model and evaluate it over random splits.
    Fit(Common),
    /// Write report.json: holdouts, transfer, spectrum and plot series.
    Report(Common),
    /// Write OpenQASM for every circuit, or print one with `--circuit`.
    ExportQasm {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "manifest")]
        circuit: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise preset name, built in or from the manifest.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    shots: Option<u64>,
}

impl Common {
    fn manifest(&self) -> Result<Manifest, PipelineError> {
        let ov = Overrides {
            out: self.out.clone(),
            seed: self.seed,
            noise: self.noise.clone(),
            shots: self.shots,
        };
        let path = self
            .manifest
            .as_ref()
            .ok_or_else(|| PipelineError::Validation("--manifest is required".into()))?;
        Manifest::load(path, &ov)
    }
}

fn execute(cmd: Command) -> Result<(), PipelineError> {
    let report = |paths: Vec<PathBuf>, what: &str| eprintln!("wrote {} {what}", paths.len());
    match cmd {
        Command::Generate(c) => report(pipeline::generate(&c.manifest()?)?, "circuit files"),
        Command::Run(c) => report(pipeline::run(&c.manifest()?)?, "counts files"),
        Command::Featurize(c) => {
            eprintln!("wrote {}", pipeline::featurize(&c.manifest()?)?.display())
        }
        Command::Score(c) => eprintln!("wrote {}", pipeline::score(&c.manifest()?)?.display()),
        Command::Fit(c) => {
            let (model, summary) = pipeline::fit(&c.manifest()?)?;
            eprintln!("wrote {} and {}", model.display(), summary.display());
        }
        Command::Report(c) => eprintln!("wrote {}", pipeline::report(&c.manifest()?)?.display()),
        Command::ExportQasm {
            circuit: Some(path),
            ..
        } => print!("{}", pipeline::qasm_of_file(&path)?),
        Command::ExportQasm { common, .. } => {
            report(pipeline::export_qasm(&common.manifest()?)?, "QASM files")
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
