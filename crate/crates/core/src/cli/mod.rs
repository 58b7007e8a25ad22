//! Command-line front end: `subharm <rabi|tuneup|rb|drag|budget>`.
//!
//! Each run writes its artifacts, `resolved_config.toml` and a
//! `manifest.json` into the output directory. Only the manifest carries a
//! timestamp. Failures print a JSON error object on stderr, also saved as
//! `error.json` when the output directory is usable.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::json;

pub use config::RunConfig;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "subharm", version, about = "Sub-harmonic transmon drive simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (overrides `workers`; 0 uses every core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Frequency × duration Rabi chevron.
    Rabi,
    /// π, π/2, ramp phase and gap precession calibration.
    Tuneup,
    /// Randomized benchmarking, plain and interleaved.
    Rb,
    /// f-state leakage with and without the DRAG quadrature.
    Drag,
    /// Decay rates and base-stage heat of the line configurations.
    Budget,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rabi => "rabi",
            Command::Tuneup => "tuneup",
            Command::Rb => "rb",
            Command::Drag => "drag",
            Command::Budget => "budget",
        }
    }
}

/// Load the configuration file and apply command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run one command with a resolved configuration and write the manifest.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Vec<String>> {
    let out = Path::new(&cfg.out_dir);
    fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().map_err(|e| Error::Config(format!("workers: {e}")))?;
    let mut outputs = pool.install(|| match command {
        Command::Rabi => commands::cmd_rabi(cfg, out),
        Command::Tuneup => commands::cmd_tuneup(cfg, out),
        Command::Rb => commands::cmd_rb(cfg, out),
        Command::Drag => commands::cmd_drag(cfg, out),
        Command::Budget => commands::cmd_budget(cfg, out),
    })?;
    fs::write(out.join("resolved_config.toml"), cfg.to_toml()?)?;
    outputs.push("resolved_config.toml".into());
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = json!({
        "command": command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": stamp,
        "seed": cfg.seed,
        "workers": cfg.workers,
        "config": cfg,
        "outputs": outputs,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(out.join("manifest.json"), text + "\n")?;
    Ok(outputs)
}

pub fn error_json(e: &Error) -> serde_json::Value {
    let mut v = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    if let Error::Partial { failed, .. } = e {
        v["error"]["failed"] = json!(failed);
    }
    v
}

fn init_logging() {
    let env = env_logger::Env::default().filter_or("SUBHARM_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            return 2;
        }
    };
    match execute(cli.command, &cfg) {
        Ok(outputs) => {
            log::info!("wrote {} files to {}", outputs.len(), cfg.out_dir);
            0
        }
        Err(e) => {
            let v = error_json(&e);
            eprintln!("{v}");
            let _ = fs::write(Path::new(&cfg.out_dir).join("error.json"), v.to_string());
            1
        }
    }
}
