mod commands;
mod config;
mod output;

use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use config::{usage, Command, RunConfig, Usage};

fn load(path: &std::path::Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    // a manifest carries its configuration under "config"
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    let cfg: RunConfig = serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if matches!(cfg.command, Command::Run { .. }) {
        return Err(usage("a run configuration cannot itself be a run command"));
    }
    Ok(cfg)
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("WEDGETRAP_THREADS") {
        let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| usage(format!("WEDGETRAP_THREADS='{v}' is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: RunConfig) -> anyhow::Result<bool> {
    configure_threads()?;
    let cfg = match &cli.command {
        Command::Run { config } => load(config)?,
        _ => cli,
    };
    let report = commands::execute(&cfg)?;
    let files = output::write_artifacts(&cfg, cfg.command.name(), &report)?;
    for f in &files {
        println!("{}", f.display());
    }
    for f in &report.failures {
        eprintln!("convergence gate failed: {f}");
    }
    Ok(report.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = RunConfig::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
