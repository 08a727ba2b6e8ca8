use crate::cycles::CycleRecord;
use crate::error::{Error, Result};
use crate::Flagged;

use super::calibration::SqlCalibration;

/// Sufficient statistics of one cycle in vacuum units, cached so bootstrap
/// resampling never touches the raw samples again.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CycleStats {
    pub n: usize,
    pub sum: [f64; 4],
    pub sumsq: [f64; 4],
    /// Within-mode products Σ p·q for mode 1 and mode 2.
    pub cross: [f64; 2],
    /// Corrected per-cycle cross determinant; 0 when degenerate.
    pub det_c: f64,
    pub degenerate: bool,
}

impl CycleStats {
    pub fn from_record(record: &CycleRecord, sql: &SqlCalibration) -> Result<Self> {
        let n = record.samples.len();
        if n == 0 {
            return Err(Error::invalid(format!(
                "cycle {} has no samples",
                record.cycle_index
            )));
        }
        let scale = [
            sql.amplitude_scale(0),
            sql.amplitude_scale(1),
            sql.amplitude_scale(2),
            sql.amplitude_scale(3),
        ];
        let mut sum = [0.0_f64; 4];
        let mut sumsq = [0.0_f64; 4];
        let mut cross = [0.0_f64; 2];
        for sample in &record.samples {
            let x = [
                sample[0] * scale[0],
                sample[1] * scale[1],
                sample[2] * scale[2],
                sample[3] * scale[3],
            ];
            for i in 0..4 {
                sum[i] += x[i];
                sumsq[i] += x[i] * x[i];
            }
            cross[0] += x[0] * x[1];
            cross[1] += x[2] * x[3];
        }

        let nf = n as f64;
        let mean = [sum[0] / nf, sum[1] / nf, sum[2] / nf, sum[3] / nf];
        let mut centered_ss = [0.0_f64; 4];
        for i in 0..4 {
            centered_ss[i] = sumsq[i] - sum[i] * sum[i] / nf;
        }
        let mut degenerate = n < 3 || centered_ss.iter().any(|&s| s <= 0.0);

        let det_c = if degenerate {
            0.0
        } else {
            // T = Σ (u − ū)(w − w̄)ᵀ over the mode-1 / mode-2 sample pairs.
            // det(T) / ((n−1)(n−2)) is an unbiased estimator of the true
            // cross-block determinant and invariant under rotating either
            // mode's samples; ×4 undoes the detection vacuum unit (c = 2c′).
            let mut t = [0.0_f64; 4];
            for sample in &record.samples {
                let u = [
                    sample[0] * scale[0] - mean[0],
                    sample[1] * scale[1] - mean[1],
                ];
                let w = [
                    sample[2] * scale[2] - mean[2],
                    sample[3] * scale[3] - mean[3],
                ];
                t[0] += u[0] * w[0];
                t[1] += u[0] * w[1];
                t[2] += u[1] * w[0];
                t[3] += u[1] * w[1];
            }
            let det_t = t[0] * t[3] - t[1] * t[2];
            let value = 4.0 * det_t / ((nf - 1.0) * (nf - 2.0));
            if value.is_finite() {
                value
            } else {
                degenerate = true;
                0.0
            }
        };

        Ok(CycleStats {
            n,
            sum,
            sumsq,
            cross,
            det_c,
            degenerate,
        })
    }
}

/// Per-cycle estimate of the cross-block determinant `Det C`, in vacuum
/// units with the added detection vacuum already undone.
///
/// The estimate is exactly unbiased and unchanged (to rounding) by any
/// phase rotation applied to either mode's samples, which is what makes its
/// across-cycle average meaningful under per-cycle phase diffusion. Cycles
/// with fewer than 3 samples or a zero-variance channel carry no determinant
/// information and come back as a flagged 0.
pub fn cycle_cross_determinant(
    record: &CycleRecord,
    sql: &SqlCalibration,
) -> Result<Flagged<f64>> {
    if record.samples.len() < 2 {
        return Err(Error::invalid(format!(
            "cross determinant needs at least 2 samples per cycle, got {}",
            record.samples.len()
        )));
    }
    let stats = CycleStats::from_record(record, sql)?;
    if stats.degenerate {
        Ok(Flagged::tripped(0.0))
    } else {
        Ok(Flagged::clean(stats.det_c))
    }
}

/// Per-cycle determinant of one mode's own 2×2 covariance block, corrected
/// for the added detection vacuum (`det(2Â′ − I)`).
///
/// This estimator is biased low by `≈ 4·Det A′/(n−1)` at n samples per
/// cycle; the pipeline's per-mode determinants therefore come from the
/// pooled variances instead, and this function exists as the diagnostic
/// that demonstrates the bias.
pub fn cycle_mode_determinant(
    record: &CycleRecord,
    mode: usize,
    sql: &SqlCalibration,
) -> Result<f64> {
    if mode > 1 {
        return Err(Error::invalid(format!(
            "mode index out of range: {mode} (two-mode records)"
        )));
    }
    let n = record.samples.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "mode determinant needs at least 2 samples per cycle, got {n}"
        )));
    }
    let (ip, iq) = (2 * mode, 2 * mode + 1);
    let (sp, sq) = (sql.amplitude_scale(ip), sql.amplitude_scale(iq));
    let nf = n as f64;
    let (mut sum_p, mut sum_q) = (0.0_f64, 0.0_f64);
    for sample in &record.samples {
        sum_p += sample[ip] * sp;
        sum_q += sample[iq] * sq;
    }
    let (mean_p, mean_q) = (sum_p / nf, sum_q / nf);
    let (mut vpp, mut vqq, mut vpq) = (0.0_f64, 0.0_f64, 0.0_f64);
    for sample in &record.samples {
        let dp = sample[ip] * sp - mean_p;
        let dq = sample[iq] * sq - mean_q;
        vpp += dp * dp;
        vqq += dq * dq;
        vpq += dp * dq;
    }
    let div = nf - 1.0;
    let (vpp, vqq, vpq) = (vpp / div, vqq / div, vpq / div);
    Ok((2.0 * vpp - 1.0) * (2.0 * vqq - 1.0) - (2.0 * vpq) * (2.0 * vpq))
}
