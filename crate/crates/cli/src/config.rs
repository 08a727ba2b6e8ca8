//! TOML sweep descriptions and their mapping onto the simulator config.
//!
//! The file mirrors the physical pipeline in four sections: `[model]` the
//! amplifier, `[detection]` the heterodyne receiver, `[sweep]` the pump
//! axis, `[run]` acquisition and bookkeeping. `configs/standard_sweep.toml`
//! in the repository root is the canonical example.

use std::path::Path;

use serde::Deserialize;

use mopo_sim::cycles::{ExperimentConfig, ModelSpec};
use mopo_sim::detection::DetectionConfig;
use mopo_sim::mopo::InteractionSetting;

use crate::{CmdResult, Failure};

/// On-disk shape of one experiment description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub run: RunSection,
    pub model: ModelSpec,
    #[serde(default)]
    pub detection: DetectionSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Signal cycles per sweep point.
    pub n_cycles: usize,
    /// Quadruples acquired per cycle.
    pub samples_per_cycle: usize,
    /// Vacuum calibration cycles per signal cycle.
    #[serde(default = "default_vacuum_ratio")]
    pub vacuum_ratio: f64,
    /// Spacing between acquisitions within a cycle, µs.
    #[serde(default = "default_dt_us")]
    pub dt_us: f64,
    /// Acquisition window per cycle, ms. Defaults to dt_us ×
    /// samples_per_cycle; an explicit value must match that product.
    pub window_ms: Option<f64>,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
}

fn default_vacuum_ratio() -> f64 {
    1.0
}

fn default_dt_us() -> f64 {
    25.0
}

fn default_resamples() -> usize {
    200
}

/// Mirror of the receiver settings with per-field defaults, so configs can
/// override single values; unknown keys are rejected here rather than
/// silently ignored.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    pub analysis_frequency: f64,
    pub lowpass_bandwidth: f64,
    pub optical_phase: f64,
    pub electronic_phase: f64,
    pub mode_mismatch: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let d = DetectionConfig::default();
        DetectionSection {
            analysis_frequency: d.analysis_frequency,
            lowpass_bandwidth: d.lowpass_bandwidth,
            optical_phase: d.optical_phase,
            electronic_phase: d.electronic_phase,
            mode_mismatch: d.mode_mismatch,
        }
    }
}

impl From<DetectionSection> for DetectionConfig {
    fn from(s: DetectionSection) -> Self {
        DetectionConfig {
            analysis_frequency: s.analysis_frequency,
            lowpass_bandwidth: s.lowpass_bandwidth,
            optical_phase: s.optical_phase,
            electronic_phase: s.electronic_phase,
            mode_mismatch: s.mode_mismatch,
        }
    }
}

/// The pump axis: every intensity becomes one sweep point at the shared
/// interaction time and coupling strength.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub tau: f64,
    pub kappa: f64,
    /// Pump intensities, mW/cm².
    pub intensities: Vec<f64>,
}

impl SweepFile {
    pub fn into_experiment_config(self) -> CmdResult<ExperimentConfig> {
        let window_ms = self
            .run
            .window_ms
            .unwrap_or(self.run.dt_us * self.run.samples_per_cycle as f64 / 1000.0);
        let sweep = self
            .sweep
            .intensities
            .iter()
            .enumerate()
            .map(|(k, &intensity)| {
                InteractionSetting::new(self.sweep.tau, intensity, self.sweep.kappa)
                    .map_err(|e| Failure::Input(format!("sweep.intensities[{k}]: {e}")))
            })
            .collect::<CmdResult<Vec<_>>>()?;
        let cfg = ExperimentConfig {
            seed: self.run.seed,
            n_cycles: self.run.n_cycles,
            samples_per_cycle: self.run.samples_per_cycle,
            vacuum_ratio: self.run.vacuum_ratio,
            dt_us: self.run.dt_us,
            window_ms,
            bootstrap_resamples: self.run.bootstrap_resamples,
            sweep,
            detection: self.detection.into(),
            model: self.model,
        };
        cfg.validate().map_err(Failure::input)?;
        Ok(cfg)
    }
}

/// Parses and validates a config document. Error messages keep the TOML
/// parser's line/column information where available and name the offending
/// field otherwise.
pub fn parse_config(text: &str) -> CmdResult<ExperimentConfig> {
    let raw: toml::Table = toml::from_str(text).map_err(Failure::input)?;
    check_model_keys(&raw)?;
    let file: SweepFile = toml::from_str(text).map_err(Failure::input)?;
    file.into_experiment_config()
}

pub fn load_config(path: &Path) -> CmdResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|f| match f {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// The model section deserializes into a tagged enum, which does not reject
/// unknown keys on its own; a typo there would silently fall back to a
/// default. Check the key set against the declared kind explicitly.
fn check_model_keys(raw: &toml::Table) -> CmdResult<()> {
    let Some(model) = raw.get("model") else {
        return Err(Failure::Input("missing [model] section".into()));
    };
    let Some(table) = model.as_table() else {
        return Err(Failure::Input("model: expected a table".into()));
    };
    let Some(kind) = table.get("kind").and_then(|v| v.as_str()) else {
        return Err(Failure::Input(
            "model.kind: missing or not a string (expected \"bloch_messiah\" or \"coupling\")"
                .into(),
        ));
    };
    let allowed: &[&str] = match kind {
        "bloch_messiah" => &["kind", "lambda1", "lambda2", "t1", "t2"],
        "coupling" => &["kind", "chi12", "chi13", "chi24", "chi34"],
        other => {
            return Err(Failure::Input(format!(
                "model.kind: unknown kind {other:?} (expected \"bloch_messiah\" or \"coupling\")"
            )))
        }
    };
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Failure::Input(format!(
                "model.{key}: unknown field for kind \"{kind}\""
            )));
        }
    }
    Ok(())
}
