//! Command-line runner for the curricular bandit workbench.
//!
//! Every subcommand validates the whole configuration first, computes its
//! tables, writes them atomically into the output directory and finishes
//! with a JSON manifest holding the config hash, seed and a SHA-256 checksum
//! of every file it wrote.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use anyhow::Result;
use clap::ValueEnum;

use config::{ExperimentConfig, Format};
use output::{sha256_hex, unix_ms, write_atomic, RunManifest, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Values,
    Simulate,
    Sweep,
    Finite,
    Diagnostics,
    RdCurve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Values => "values",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Finite => "finite",
            Command::Diagnostics => "diagnostics",
            Command::RdCurve => "rd-curve",
        }
    }
}

/// Hash of the configuration with the output section blanked, so the same
/// experiment written to two directories hashes the same.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let mut c = cfg.clone();
    c.output = config::OutputSection {
        directory: Default::default(),
        formats: Vec::new(),
    };
    Ok(sha256_hex(&serde_json::to_vec(&c)?))
}

pub fn warnings(cfg: &ExperimentConfig) -> Vec<String> {
    let mut out = Vec::new();
    if let Ok(p) = cfg.params() {
        let a = p.admissibility();
        if !a.admissible {
            out.push(format!(
                "admissibility: tau = {} is not below gamma (alpha - 1) / (2 (1 - gamma)) = {} at alpha = {}, gamma = {}",
                cfg.env.tau, a.bound, cfg.env.alpha, cfg.env.gamma
            ));
        }
    }
    out
}

/// Runs `command` and writes its outputs and manifest. The manifest's
/// `errors` list is empty iff every row was produced.
pub fn execute(command: Command, cfg: &ExperimentConfig, threads: Option<usize>) -> Result<RunManifest> {
    cfg.validate()?;
    let started = unix_ms();
    let run = || match command {
        Command::Values => commands::values(cfg),
        Command::Simulate => commands::simulate(cfg),
        Command::Sweep => commands::sweep(cfg),
        Command::Finite => commands::finite(cfg),
        Command::Diagnostics => commands::diagnostics(cfg),
        Command::RdCurve => commands::rd_curve(cfg),
    };
    // Threads change scheduling only; every result is keyed by its seed.
    let produced = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(run)?,
        None => run()?,
    };

    let dir = &cfg.output.directory;
    let formats = &cfg.output.formats;
    let mut outputs = Vec::new();
    let mut errors = Vec::new();
    for table in &produced.tables {
        if table.has_errors() {
            errors.push(format!("{}: one or more rows carry an error marker", table.name));
        }
        if formats.contains(&Format::Csv) {
            outputs.push(write_atomic(dir, &format!("{}.csv", table.name), &table.to_csv()?)?);
        }
        if formats.contains(&Format::Json) {
            outputs.push(write_atomic(dir, &format!("{}.json", table.name), &table.to_json()?)?);
        }
    }
    // Summaries are JSON by nature and always written; `json` adds JSON
    // copies of the tables.
    for (name, value) in &produced.summaries {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        outputs.push(write_atomic(dir, &format!("{name}.json"), &bytes)?);
    }
    if formats.contains(&Format::Svg) {
        for (name, chart) in &produced.charts {
            outputs.push(write_atomic(dir, &format!("{name}.svg"), svg::render(chart).as_bytes())?);
        }
    }

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION"),
        command: command.name().to_string(),
        config_hash: config_hash(cfg)?,
        seed: cfg.sim.master_seed,
        threads,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        warnings: warnings(cfg),
        errors,
        outputs,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write_atomic(dir, &format!("manifest-{}.json", command.name()), &bytes)?;
    Ok(manifest)
}
