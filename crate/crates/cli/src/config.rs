//! Run configuration and the config hash stamped into outputs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use terragait_core::pipeline::AnalysisConfig;
use terragait_core::{AnthropometricTable, CalibrationCurve, MarkerSchema};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "TERRAGAIT_CONFIG";

/// Contents of a run config TOML. Paths are relative to the config file.
/// Missing reference paths fall back to the bundled tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub marker_schema: Option<PathBuf>,
    pub anthropometrics: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    /// Overrides the sand depth of every analysed trial (cm).
    pub sand_depth_cm: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for p in [&mut config.marker_schema, &mut config.anthropometrics, &mut config.calibration, &mut config.output_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    /// Explicit path, else the environment variable, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> anyhow::Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for p in [&self.marker_schema, &self.anthropometrics, &self.calibration].into_iter().flatten() {
            if !p.is_file() {
                bail!("referenced file {} does not exist", p.display());
            }
        }
        if let Some(d) = self.sand_depth_cm {
            if !(d >= 0.0 && d.is_finite()) {
                bail!("sand_depth_cm must be non-negative, got {d}");
            }
        }
        self.analysis.validate().map_err(|e| anyhow::anyhow!("analysis: {e}"))
    }
}

/// Reference tables named by a config, loaded.
pub struct LoadedReferences {
    pub schema: MarkerSchema,
    pub table: AnthropometricTable,
    pub calibration: CalibrationCurve,
    /// Text of each table, part of the config hash.
    texts: [String; 3],
}

impl LoadedReferences {
    pub fn load(config: &RunConfig) -> anyhow::Result<Self> {
        let read = |p: &Option<PathBuf>| -> anyhow::Result<String> {
            match p {
                Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
                None => Ok(String::new()),
            }
        };
        let texts = [read(&config.marker_schema)?, read(&config.anthropometrics)?, read(&config.calibration)?];
        let schema = match &config.marker_schema {
            Some(_) => MarkerSchema::parse(&texts[0])?,
            None => MarkerSchema::default(),
        };
        let table = match &config.anthropometrics {
            Some(_) => AnthropometricTable::parse(&texts[1])?,
            None => AnthropometricTable::default(),
        };
        let calibration = match &config.calibration {
            Some(p) => CalibrationCurve::parse(&texts[2], &p.display().to_string())?,
            None => CalibrationCurve::default(),
        };
        Ok(LoadedReferences {
            schema,
            table,
            calibration,
            texts,
        })
    }

    /// SHA-256 over the analysis knobs, overrides and reference contents.
    /// Paths and the output directory are left out so moved inputs hash alike.
    pub fn config_hash(&self, config: &RunConfig, extra: &str) -> String {
        let mut h = Sha256::new();
        h.update(toml::to_string(&config.analysis).expect("config serializes"));
        h.update(format!("sand_depth_cm={:?}\n", config.sand_depth_cm));
        for t in &self.texts {
            h.update((t.len() as u64).to_le_bytes());
            h.update(t);
        }
        h.update(extra);
        hex(&h.finalize())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Prefix a CSV or TOML text with a `# config_hash=` comment line.
pub fn stamp(hash: &str, text: &str) -> String {
    format!("# config_hash={hash}\n{text}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_follow_config_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("cal.csv"), "depth_cm,zeta\n0,1\n").unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(&cfg, "calibration = \"cal.csv\"\n[analysis]\nmarker_window = 5\n").unwrap();
        let c = RunConfig::load(&cfg).unwrap();
        assert_eq!(c.calibration.as_deref(), Some(dir.path().join("cal.csv").as_path()));
        assert_eq!(c.analysis.marker_window, 5);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_bad_knobs_rejected() {
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
        let c: RunConfig = toml::from_str("[analysis]\nmarker_window = 4").unwrap();
        assert!(c.validate().is_err());
        let c: RunConfig = toml::from_str("calibration = \"/nonexistent/cal.csv\"").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_knobs() {
        let c = RunConfig::default();
        let refs = LoadedReferences::load(&c).unwrap();
        let mut d = c.clone();
        d.analysis.marker_window = 5;
        assert_eq!(refs.config_hash(&c, ""), refs.config_hash(&c, ""));
        assert_ne!(refs.config_hash(&c, ""), refs.config_hash(&d, ""));
        assert_eq!(refs.config_hash(&c, "").len(), 64);
    }
}
