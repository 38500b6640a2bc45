//! Experiment orchestration for `drmoo`: config files, parallel runs, CSV
//! traces and SVG plots.

pub mod config;
pub mod data;
mod error;
pub mod plot;
pub mod presets;
pub mod run;
pub mod trace;

pub use config::{parse_config, ConfigError, ExperimentConfig, RunConfig};
pub use error::{Error, Result};
pub use run::run_experiment;

/// Reads a config file, or a shipped preset when no such file exists.
pub fn load_config(arg: &str) -> Result<ExperimentConfig> {
    let path = std::path::Path::new(arg);
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => match presets::preset(arg) {
            Some(t) => t.to_string(),
            None => return Err(Error::io(path, e)),
        },
        Err(e) => return Err(Error::io(path, e)),
    };
    Ok(parse_config(&text)?)
}
