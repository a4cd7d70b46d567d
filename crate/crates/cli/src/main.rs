use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tw_cli::config::{Command, Overrides};

/// Travelling-wave solver and experiments.
#[derive(Parser)]
#[command(name = "tw", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML run config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match &args.config {
        Some(p) => match tw_cli::load(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(tw_cli::EXIT_CONFIG as u8);
            }
        },
        None => String::new(),
    };
    let ov = Overrides { seed: args.seed, output: args.out, threads: args.threads };
    let out = tw_cli::execute(args.command, &text, &ov);
    for m in &out.messages {
        eprintln!("{m}");
    }
    for f in &out.files {
        println!("{}", f.display());
    }
    ExitCode::from(out.exit_code as u8)
}
