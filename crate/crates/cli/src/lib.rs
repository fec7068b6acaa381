//! Experiment runner for MBM massive-MIMO detection: built-in presets,
//! TOML experiment files, CSV output and a savings/gap summary.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod report;

use std::path::Path;

use mbm_core::sim::{run_sweep, BerRecord, SweepConfig};

pub use error::{CliError, ConfigError};

/// One simulated system inside an experiment. Multi-system experiments tag
/// each system so its CSV rows stay distinguishable.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRun {
    pub tag: Option<String>,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub note: String,
    pub runs: Vec<SystemRun>,
}

impl Experiment {
    pub fn single(name: impl Into<String>, sweep: SweepConfig) -> Self {
        Self {
            name: name.into(),
            note: String::new(),
            runs: vec![SystemRun { tag: None, sweep }],
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        for r in &mut self.runs {
            r.sweep.seed = seed;
        }
    }

    pub fn set_max_frames(&mut self, max_frames: u64) {
        for r in &mut self.runs {
            r.sweep.max_frames = max_frames;
        }
    }

    /// Runs every system in order. Detector labels of tagged systems are
    /// prefixed with `tag:`.
    pub fn run(&self) -> Result<Vec<BerRecord>, CliError> {
        let mut out = Vec::new();
        for run in &self.runs {
            let mut records = run_sweep(&run.sweep)?;
            if let Some(tag) = &run.tag {
                for r in &mut records {
                    r.detector = format!("{tag}:{}", r.detector);
                }
            }
            out.extend(records);
        }
        Ok(out)
    }
}

/// Resolves a `run` target: an existing file is parsed as TOML, otherwise
/// the name is looked up among the presets.
pub fn load_experiment(target: &str) -> Result<Experiment, CliError> {
    let path = Path::new(target);
    if path.is_file() {
        let sweep = config::parse_config(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| target.to_string());
        return Ok(Experiment::single(name, sweep));
    }
    presets::preset(target).ok_or_else(|| CliError::UnknownTarget(target.to_string()))
}
