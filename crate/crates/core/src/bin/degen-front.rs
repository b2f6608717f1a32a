use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use degen_front::config::parse_config_with;
use degen_front::pipeline::{dispatch, Command, PipelineError};

/// Degenerate diffusion `u_t = a(u) Δu`: structure functions, validators,
/// an explicit solver and propagation diagnostics.
#[derive(Debug, Parser)]
#[command(name = "degen-front", version)]
struct Cli {
    /// laws | structure | check | simulate | front | iterate | audit | paradox
    command: Command,
    /// INI-style config file; may be omitted if `--set law.spec=...` is given.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, `section.key=value`; repeatable.
    #[arg(short = 's', long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (same as `--set output.dir=...`).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn threads() -> Result<(), PipelineError> {
    let Ok(v) = std::env::var("DEGEN_FRONT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| PipelineError::config(format!("DEGEN_FRONT_THREADS: '{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| PipelineError::config(format!("DEGEN_FRONT_THREADS: {e}")))
}

fn execute(cli: Cli) -> Result<String, PipelineError> {
    threads()?;
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| PipelineError::config(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = cli.overrides;
    if let Some(out) = cli.out {
        overrides.push(format!("output.dir={}", out.display()));
    }
    // `laws` needs no law of its own.
    if cli.command == Command::Laws && !text.contains("spec") && !overrides.iter().any(|o| o.starts_with("law.")) {
        overrides.insert(0, "law.spec=power:beta=2".into());
    }
    let cfg = parse_config_with(&text, &overrides)?;
    let outcome = dispatch(cli.command, &cfg)?;
    Ok(serde_json::to_string_pretty(&outcome).expect("outcome serialises"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
