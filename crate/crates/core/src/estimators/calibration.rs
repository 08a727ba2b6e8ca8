use crate::cycles::CycleRecord;
use crate::error::{Error, Result};

/// Normalization factors that map raw detector output onto the standard
/// quantum level: one factor per channel, `f_i = 1 / pooled vacuum variance`,
/// so that a normalized vacuum channel has variance 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqlCalibration {
    factors: [f64; 4],
}

impl SqlCalibration {
    /// No-op calibration for data already expressed in vacuum units.
    pub fn unity() -> Self {
        SqlCalibration { factors: [1.0; 4] }
    }

    /// Calibrates from interleaved vacuum acquisition cycles. Only records
    /// flagged `is_vacuum` contribute; handing over a mixed dataset is fine.
    pub fn from_vacuum_records(records: &[CycleRecord]) -> Result<Self> {
        let mut sum = [0.0_f64; 4];
        let mut sumsq = [0.0_f64; 4];
        let mut count = 0usize;
        for record in records.iter().filter(|r| r.is_vacuum) {
            for sample in &record.samples {
                for (i, &x) in sample.iter().enumerate() {
                    sum[i] += x;
                    sumsq[i] += x * x;
                }
            }
            count += record.samples.len();
        }
        if count < 2 {
            return Err(Error::MissingCalibration(format!(
                "need at least 2 vacuum samples to set the quantum level, got {count}"
            )));
        }
        let n = count as f64;
        let mut factors = [0.0_f64; 4];
        for i in 0..4 {
            let var = (sumsq[i] - sum[i] * sum[i] / n) / (n - 1.0);
            if !(var.is_finite() && var > 0.0) {
                return Err(Error::MissingCalibration(format!(
                    "vacuum channel {i} has non-positive variance {var}"
                )));
            }
            factors[i] = var.recip();
        }
        Ok(SqlCalibration { factors })
    }

    /// Variance scale factor for one channel (0..4).
    pub fn factor(&self, channel: usize) -> f64 {
        self.factors[channel]
    }

    /// Amplitude scale `√f_i` applied to samples of one channel.
    pub fn amplitude_scale(&self, channel: usize) -> f64 {
        self.factors[channel].sqrt()
    }
}
