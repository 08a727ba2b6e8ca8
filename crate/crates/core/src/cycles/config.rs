use serde::{Deserialize, Serialize};

use crate::detection::DetectionConfig;
use crate::error::{Error, Result};
use crate::mopo::{
    chis_from_bloch_messiah, BlochMessiahFactors, CouplingMatrix, InteractionSetting,
};

/// Which description of the amplifier the config provides. Both reduce to a
/// base coupling matrix that the sweep scales by κ√I.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    BlochMessiah {
        lambda1: f64,
        lambda2: f64,
        t1: f64,
        t2: f64,
    },
    Coupling {
        chi12: f64,
        chi13: f64,
        chi24: f64,
        chi34: f64,
    },
}

impl ModelSpec {
    pub fn base_coupling(&self) -> Result<CouplingMatrix> {
        match *self {
            ModelSpec::BlochMessiah {
                lambda1,
                lambda2,
                t1,
                t2,
            } => chis_from_bloch_messiah(&BlochMessiahFactors::new(lambda1, lambda2, t1, t2)?),
            ModelSpec::Coupling {
                chi12,
                chi13,
                chi24,
                chi34,
            } => CouplingMatrix::new(chi12, chi13, chi24, chi34),
        }
    }
}

/// Full description of one simulated experiment: the amplifier model, the
/// detection settings, the sweep axis, and the acquisition bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Signal cycles per sweep point.
    pub n_cycles: usize,
    /// Quadruples acquired per cycle.
    pub samples_per_cycle: usize,
    /// Vacuum calibration cycles per signal cycle (1.0 = interleaved 1:1).
    pub vacuum_ratio: f64,
    /// Spacing between acquisitions within a cycle, µs.
    pub dt_us: f64,
    /// Acquisition window per cycle, ms. Must equal dt_us × samples_per_cycle.
    pub window_ms: f64,
    /// Bootstrap resamples used for standard errors downstream.
    pub bootstrap_resamples: usize,
    pub sweep: Vec<InteractionSetting>,
    pub detection: DetectionConfig,
    pub model: ModelSpec,
}

impl ExperimentConfig {
    /// A small but complete configuration for the balanced default model;
    /// callers override what they need.
    pub fn base(model: ModelSpec) -> Self {
        ExperimentConfig {
            seed: 1,
            n_cycles: 1000,
            samples_per_cycle: 64,
            vacuum_ratio: 1.0,
            dt_us: 25.0,
            window_ms: 1.6,
            bootstrap_resamples: 200,
            sweep: Vec::new(),
            detection: DetectionConfig::default(),
            model,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cycles < 1 {
            return Err(Error::invalid("n_cycles: must be >= 1"));
        }
        if self.samples_per_cycle < 2 {
            return Err(Error::invalid(format!(
                "samples_per_cycle: must be >= 2, got {}",
                self.samples_per_cycle
            )));
        }
        if !(self.vacuum_ratio.is_finite() && self.vacuum_ratio >= 0.0) {
            return Err(Error::invalid(format!(
                "vacuum_ratio: must be >= 0, got {}",
                self.vacuum_ratio
            )));
        }
        if !(self.dt_us.is_finite() && self.dt_us > 0.0) {
            return Err(Error::invalid(format!(
                "dt_us: must be > 0, got {}",
                self.dt_us
            )));
        }
        if !(self.window_ms.is_finite() && self.window_ms > 0.0) {
            return Err(Error::invalid(format!(
                "window_ms: must be > 0, got {}",
                self.window_ms
            )));
        }
        let window_us = self.window_ms * 1000.0;
        let covered = self.dt_us * self.samples_per_cycle as f64;
        if (covered - window_us).abs() > 1e-9 * window_us.max(1.0) {
            return Err(Error::invalid(format!(
                "window_ms: acquisition window {window_us} µs does not equal \
                 dt_us × samples_per_cycle = {covered} µs"
            )));
        }
        if self.bootstrap_resamples < 2 {
            return Err(Error::invalid(format!(
                "bootstrap_resamples: must be >= 2, got {}",
                self.bootstrap_resamples
            )));
        }
        if self.sweep.is_empty() {
            return Err(Error::invalid("sweep: must contain at least one point"));
        }
        for (k, setting) in self.sweep.iter().enumerate() {
            setting
                .validate()
                .map_err(|e| Error::invalid(format!("sweep[{k}]: {e}")))?;
        }
        self.detection
            .validate()
            .map_err(|e| Error::invalid(format!("detection: {e}")))?;
        self.model
            .base_coupling()
            .map_err(|e| Error::invalid(format!("model: {e}")))?;
        Ok(())
    }

    /// Vacuum calibration cycles per sweep point under the configured ratio.
    pub fn n_vacuum_cycles(&self) -> usize {
        (self.n_cycles as f64 * self.vacuum_ratio).round() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::base(ModelSpec::BlochMessiah {
            lambda1: 1.0,
            lambda2: 0.0,
            t1: std::f64::consts::FRAC_1_SQRT_2,
            t2: std::f64::consts::FRAC_1_SQRT_2,
        });
        cfg.sweep = vec![InteractionSetting::new(1.0, 1.0, 0.75).unwrap()];
        cfg
    }

    #[test]
    fn base_config_validates() {
        assert!(valid_config().validate().is_ok());
    }

    #[test]
    fn timing_consistency_is_enforced() {
        let mut cfg = valid_config();
        cfg.samples_per_cycle = 128;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("window_ms"), "got: {err}");
        cfg.window_ms = 3.2;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn field_level_messages() {
        let mut cfg = valid_config();
        cfg.n_cycles = 0;
        assert!(cfg.validate().unwrap_err().to_string().contains("n_cycles"));

        let mut cfg = valid_config();
        cfg.sweep[0].pump_intensity = -2.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("sweep[0]"));

        let mut cfg = valid_config();
        cfg.model = ModelSpec::BlochMessiah {
            lambda1: 1.0,
            lambda2: 0.0,
            t1: 1.7,
            t2: 0.5,
        };
        assert!(cfg.validate().unwrap_err().to_string().contains("model"));
    }

    #[test]
    fn model_spec_toml_shapes() {
        let toml_src = r#"
            kind = "bloch_messiah"
            lambda1 = 1.0
            lambda2 = 0.0
            t1 = 0.7071067811865476
            t2 = 0.7071067811865476
        "#;
        let spec: ModelSpec = toml::from_str(toml_src).unwrap();
        let chis = spec.base_coupling().unwrap();
        assert!((chis.chi12 + 0.5).abs() < 1e-12);

        let toml_src = r#"
            kind = "coupling"
            chi12 = 0.25
            chi13 = 0.25
            chi24 = 0.25
            chi34 = 0.25
        "#;
        let spec: ModelSpec = toml::from_str(toml_src).unwrap();
        assert_eq!(spec.base_coupling().unwrap().chi12, 0.25);
    }
}
