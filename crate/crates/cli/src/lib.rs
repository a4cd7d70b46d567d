//! Command-line driver for `tw-core`: TOML run configs, CSV tables, JSON
//! summaries and a manifest per run.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use config::{Command, ConfigError, Overrides, Resolved, RunConfig};
use output::RunFiles;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// What a finished run left behind.
#[derive(Debug)]
pub struct RunOutput {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub messages: Vec<String>,
}

impl RunOutput {
    fn refused(msg: String) -> Self {
        Self { exit_code: EXIT_CONFIG, files: Vec::new(), summary: None, manifest: None, messages: vec![msg] }
    }
}

/// Runs `command` on the config text and writes its outputs.
pub fn execute(command: Command, config_text: &str, ov: &Overrides) -> RunOutput {
    let resolved = match RunConfig::from_toml(config_text).and_then(|c| Resolved::new(&c, command, ov)) {
        Ok(r) => r,
        Err(e) => return RunOutput::refused(e.to_string()),
    };
    execute_resolved(&resolved)
}

pub fn load(path: &std::path::Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })
}

pub fn execute_resolved(r: &Resolved) -> RunOutput {
    let report = match r.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| commands::run(r)),
            Err(e) => return RunOutput::refused(format!("thread pool: {e}")),
        },
        None => commands::run(r),
    };
    let report = match report {
        Ok(rep) => rep,
        Err(commands::Failure::Refused(msg)) => return RunOutput::refused(format!("refused: {msg}")),
        Err(commands::Failure::Failed(msg)) => {
            return RunOutput {
                exit_code: EXIT_CHECK_FAILED,
                files: Vec::new(),
                summary: None,
                manifest: None,
                messages: vec![format!("failed: {msg}")],
            }
        }
    };
    let hash = r.param_hash();
    let files = RunFiles::new(&r.output, r.command.name(), &hash);
    let mut messages = report.messages.clone();
    for c in report.checks.iter().filter(|c| !c.passed) {
        messages.push(format!("check failed: {} ({})", c.name, c.detail));
    }
    match files.write(&r.to_config().to_toml(), r.command.name(), &hash, &report) {
        Ok(written) => RunOutput {
            exit_code: if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED },
            files: written,
            summary: Some(files.summary()),
            manifest: Some(files.manifest()),
            messages,
        },
        Err(e) => RunOutput {
            exit_code: EXIT_CHECK_FAILED,
            files: Vec::new(),
            summary: None,
            manifest: None,
            messages: vec![format!("writing outputs: {e:#}")],
        },
    }
}
