use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rankone::{load_config, read_manifest, report, validate, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "rankone", version, about = "Rank-one construction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for correlation counting.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            out: self.out.clone(),
            seed: self.seed,
            threads: self.threads,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the schedule and write stages.csv and the manifest.
    Build(Common),
    /// Build the schedule and run every analysis.
    Run(Common),
    /// Check a config and print every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarize a finished run.
    Report {
        /// Directory holding manifest.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Config whose `output` names the directory.
        #[arg(long)]
        config: Option<PathBuf>,
    },
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

fn execute(command: Command) -> Result<(), RunError> {
    match command {
        Command::Build(c) => {
            let m = rankone::build(load_config(&c.config)?, &c.options())?;
            println!("built {} stages, heights {:?}", m.config.depth, m.heights);
        }
        Command::Run(c) => {
            let m = rankone::run(load_config(&c.config)?, &c.options())?;
            print!("{}", report(&m));
        }
        Command::Validate { config, seed } => {
            let mut loaded = load_config(&config)?;
            if let Some(s) = seed {
                loaded.config.seed = s;
            }
            let diags = validate::validate(&loaded.config, &loaded.source);
            if !diags.is_empty() {
                return Err(RunError::Invalid(diags));
            }
            println!("{}: ok", config.display());
        }
        Command::Report { out, config } => {
            let dir = match (out, config) {
                (Some(d), _) => d,
                (None, Some(c)) => load_config(&c)?.config.output,
                (None, None) => PathBuf::from("out"),
            };
            print!("{}", report(&read_manifest(&dir)?));
        }
    }
    Ok(())
}
