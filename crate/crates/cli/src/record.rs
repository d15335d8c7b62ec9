use std::path::{Path, PathBuf};
use std::time::Duration;

use vipsim_core::{Error, LimitResult, Result, SensitivityReport};

/// Provenance written next to every subcommand's artifacts.
#[derive(Debug, Clone, Default)]
pub struct RunRecord {
    pub subcommand: String,
    pub scenario_hash: Option<String>,
    pub toolkit_version: String,
    pub seed: Option<u64>,
    pub sensitivity: Option<SensitivityReport>,
    pub limit: Option<LimitResult>,
    pub files: Vec<PathBuf>,
    pub wall_clock: Duration,
}

impl RunRecord {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            toolkit_version: vipsim_core::VERSION.to_string(),
            ..Default::default()
        }
    }

    pub fn to_key_values(&self) -> String {
        let mut out = format!("subcommand={}\n", self.subcommand);
        out += &format!("toolkit_version={}\n", self.toolkit_version);
        if let Some(h) = &self.scenario_hash {
            out += &format!("scenario_hash={h}\n");
        }
        if let Some(s) = self.seed {
            out += &format!("seed={s}\n");
        }
        if let Some(r) = &self.sensitivity {
            for line in r.to_key_values().lines() {
                out += &format!("sensitivity.{line}\n");
            }
        }
        if let Some(l) = &self.limit {
            for line in l.to_key_values().lines() {
                out += &format!("limit.{line}\n");
            }
        }
        for f in &self.files {
            out += &format!("file={}\n", f.display());
        }
        out += &format!("wall_clock_s={:.6}\n", self.wall_clock.as_secs_f64());
        out
    }

    pub fn file_name(&self) -> String {
        format!("run_record_{}.txt", self.subcommand)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_key_values()).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        Ok(path)
    }
}
