use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hanle_cli::config::Origin;
use hanle_cli::output::write_outputs;
use hanle_cli::run::execute;
use hanle_cli::{CliError, RawConfig, RunConfig};

/// Hanle-resonance scans: Bloch-equation, low-saturation and closed-form paths.
#[derive(Parser, Debug)]
#[command(name = "hanle", version, about)]
struct Args {
    /// Flat `key = value` config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// scan-omega | scan-delta | lorentz-params | sign-reversal | doppler-scan | validate
    #[arg(long)]
    mode: Option<String>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Extra `key=value` settings applied after the config file
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run(args: Args) -> Result<bool, CliError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let mut raw = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    for o in &args.overrides {
        raw.set(o, Origin::Override)?;
    }
    if let Some(m) = &args.mode {
        raw.set(&format!("mode={m}"), Origin::Flag)?;
    }
    let cfg = RunConfig::resolve(&raw)?;
    log::info!("running {} on {} path", cfg.mode, cfg.path.name());
    let outcome = execute(&cfg)?;
    let csv = write_outputs(&args.out, &cfg, &outcome.table)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    println!("wrote {}", csv.display());
    Ok(outcome.success)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
