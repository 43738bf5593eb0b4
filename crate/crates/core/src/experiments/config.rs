use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{NoiseConfig, SpinSystem, DEFAULT_EPSILON};

/// θ grid `nπ/denom` for `n = n_start..=n_end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub n_start: u32,
    pub n_end: u32,
    pub denom: u32,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid { n_start: 0, n_end: 9, denom: 18 }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.denom == 0 {
            return Err(Error::Config("sweep.denom must be positive".into()));
        }
        if self.n_end < self.n_start {
            return Err(Error::Config("sweep grid is empty (n_end < n_start)".into()));
        }
        if self.n_end > self.denom {
            return Err(Error::Config("sweep angles must stay within [0, pi] (n_end <= denom)".into()));
        }
        Ok(())
    }

    /// Up-loop angles, ascending.
    pub fn up_thetas(&self) -> Vec<f64> {
        (self.n_start..=self.n_end).map(|n| n as f64 * PI / self.denom as f64).collect()
    }

    /// Mirror-loop angles `(denom − n)π/denom`, ascending.
    pub fn mirror_thetas(&self) -> Vec<f64> {
        (self.n_start..=self.n_end).rev().map(|n| (self.denom - n) as f64 * PI / self.denom as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format `{other}` (csv or json)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: OutputFormat,
}

/// Everything an experiment run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub system: SpinSystem,
    pub epsilon: f64,
    pub sweep: SweepGrid,
    pub noise: NoiseConfig,
    pub output: Option<OutputSpec>,
    pub seed: u64,
    pub samples_per_event: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: SpinSystem::default(),
            epsilon: DEFAULT_EPSILON,
            sweep: SweepGrid::default(),
            noise: NoiseConfig { enabled: false, pulse_amplitude_error: 0.0, dephasing_enabled: true },
            output: None,
            seed: 0,
            samples_per_event: crate::phase::DEFAULT_SAMPLES_PER_EVENT,
        }
    }
}

/// On-disk form. Frequencies in MHz (divided by 2π), times in seconds.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    omega_a_mhz: Option<f64>,
    omega_b_mhz: Option<f64>,
    j_hz: Option<f64>,
    t2_a_s: Option<f64>,
    t2_b_s: Option<f64>,
    epsilon: Option<f64>,
    pulse_amplitude_error: Option<f64>,
    dephasing: Option<bool>,
    noise: Option<bool>,
    seed: Option<u64>,
    samples_per_event: Option<usize>,
    sweep: Option<SweepGrid>,
    output: Option<OutputSpec>,
}

impl ExperimentConfig {
    /// Parses TOML; absent keys keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let d = ExperimentConfig::default();
        let mhz = |v: Option<f64>, default: f64| v.map_or(default, |f| 2.0 * PI * f * 1e6);
        let system = SpinSystem {
            omega_a: mhz(file.omega_a_mhz, d.system.omega_a),
            omega_b: mhz(file.omega_b_mhz, d.system.omega_b),
            j_coupling: file.j_hz.unwrap_or(d.system.j_coupling),
            t2_a: file.t2_a_s.unwrap_or(d.system.t2_a),
            t2_b: file.t2_b_s.unwrap_or(d.system.t2_b),
        };
        let noise = NoiseConfig {
            enabled: file.noise.unwrap_or(false),
            pulse_amplitude_error: file.pulse_amplitude_error.unwrap_or(0.0),
            dephasing_enabled: file.dephasing.unwrap_or(true),
        };
        let cfg = ExperimentConfig {
            system,
            epsilon: file.epsilon.unwrap_or(d.epsilon),
            sweep: file.sweep.unwrap_or_default(),
            noise,
            output: file.output,
            seed: file.seed.unwrap_or(0),
            samples_per_event: file.samples_per_event.unwrap_or(d.samples_per_event),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.sweep.validate()?;
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(0.0..=0.1).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon {} outside [0, 0.1]", self.epsilon)));
        }
        if self.samples_per_event < 8 {
            return Err(Error::Config("samples_per_event must be at least 8".into()));
        }
        Ok(())
    }

    /// Same config with T2 dephasing switched on.
    pub fn with_noise(&self) -> Self {
        let mut cfg = self.clone();
        cfg.noise.enabled = true;
        cfg.noise.dephasing_enabled = true;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let cfg = ExperimentConfig::from_toml_str(
            "j_hz = 200.0\nt2_a_s = 0.5\nseed = 9\n[sweep]\nn_start = 1\nn_end = 4\ndenom = 12\n",
        )
        .unwrap();
        assert_eq!(cfg.system.j_coupling, 200.0);
        assert_eq!(cfg.sweep, SweepGrid { n_start: 1, n_end: 4, denom: 12 });
        assert_eq!(cfg.seed, 9);
        assert!((cfg.system.omega_b - 2.0 * PI * 400e6).abs() < 1e-3);
    }

    #[test]
    fn bad_configs() {
        assert!(ExperimentConfig::from_toml_str("j_hz = -1.0").is_err());
        assert!(ExperimentConfig::from_toml_str("unknown_key = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("[sweep]\nn_start = 3\nn_end = 1\ndenom = 18").is_err());
        assert!(ExperimentConfig::from_toml_str("[sweep]\nn_start = 0\nn_end = 1\ndenom = 0").is_err());
        assert!(ExperimentConfig::from_toml_str("pulse_amplitude_error = 0.7").is_err());
    }

    #[test]
    fn grids() {
        let g = SweepGrid::default();
        assert_eq!(g.up_thetas().len(), 10);
        let m = g.mirror_thetas();
        assert!((m[0] - PI / 2.0).abs() < 1e-15 && (m[9] - PI).abs() < 1e-15);
        assert!(m.windows(2).all(|w| w[0] < w[1]));
        assert_eq!("JSON".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
    }
}
