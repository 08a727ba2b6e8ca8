use serde::Serialize;

use crate::error::{Error, Result};

use super::channel::DetectionConfig;

/// Minimum oversampling of the analysis frequency for the mixer products to
/// be represented cleanly.
const MIN_OVERSAMPLING: f64 = 10.0;

/// One demodulated acquisition: the two quadrature readings produced by the
/// cos and sin reference channels, in vacuum units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemodSamplePair {
    pub i_cos: f64,
    pub i_sin: f64,
}

/// Length of the moving-average low-pass window: the filter integrates for
/// half a period of the (double-sided) bandwidth, `N = fs / (2B)`, which is
/// also the decimation factor down to the acquisition rate.
pub fn boxcar_len(sample_rate_hz: f64, cfg: &DetectionConfig) -> Result<usize> {
    cfg.validate()?;
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::invalid(format!(
            "sample rate must be > 0 Hz, got {sample_rate_hz}"
        )));
    }
    let n = (sample_rate_hz / (2.0 * cfg.lowpass_bandwidth)).round();
    if n < 1.0 {
        return Err(Error::invalid(
            "low-pass bandwidth exceeds half the sample rate; nothing to filter",
        ));
    }
    Ok(n as usize)
}

/// Standard deviation of the synthetic white noise that represents vacuum.
///
/// The chain is calibrated so that white noise at exactly this level, with
/// no deterministic signal, demodulates to unit-variance output: the
/// noise floor of a heterodyne record IS the vacuum level. Synthetic states
/// with quadrature variance v therefore add slow quadrature modulation of
/// variance v − 1 on top of this floor.
pub fn vacuum_noise_std(sample_rate_hz: f64, cfg: &DetectionConfig) -> Result<f64> {
    Ok((boxcar_len(sample_rate_hz, cfg)? as f64).sqrt())
}

/// Deterministic heterodyne photocurrent for quadrature amplitudes (p, q):
/// `p·cos(Ωt + φ) + q·sin(Ωt + φ)` with φ the optical phase. Add noise from
/// [`vacuum_noise_std`] to model the vacuum floor.
pub fn synthesize_quadrature_tone(
    p: f64,
    q: f64,
    n_samples: usize,
    sample_rate_hz: f64,
    cfg: &DetectionConfig,
) -> Vec<f64> {
    let omega = 2.0 * std::f64::consts::PI * cfg.analysis_frequency;
    (0..n_samples)
        .map(|n| {
            let t = n as f64 / sample_rate_hz;
            let phase = omega * t + cfg.optical_phase;
            p * phase.cos() + q * phase.sin()
        })
        .collect()
}

/// Digital in-quadrature demodulation: multiply the photocurrent by cos and
/// sin references at the analysis frequency, low-pass with a moving
/// average, and decimate by the filter length.
///
/// Normalization contract, with the vacuum floor of [`vacuum_noise_std`]:
/// a deterministic quadrature amplitude p reads out as mean `i_cos = p/√2`
/// (and q as `i_sin = −q/√2`), pure vacuum reads unit variance, and a
/// Gaussian input of quadrature variance v reads variance `(v + 1)/2`,
/// the same one-added-vacuum-unit algebra as the covariance channel.
pub fn demodulation_chain(
    samples: &[f64],
    sample_rate_hz: f64,
    cfg: &DetectionConfig,
) -> Result<Vec<DemodSamplePair>> {
    let n = boxcar_len(sample_rate_hz, cfg)?;
    if sample_rate_hz < MIN_OVERSAMPLING * cfg.analysis_frequency {
        return Err(Error::invalid(format!(
            "undersampled input: {sample_rate_hz} Hz < {MIN_OVERSAMPLING}x analysis frequency {} Hz",
            cfg.analysis_frequency
        )));
    }
    if samples.len() < n {
        return Err(Error::invalid(format!(
            "input shorter than one low-pass window: {} samples < {n}",
            samples.len()
        )));
    }

    let omega = 2.0 * std::f64::consts::PI * cfg.analysis_frequency;
    let gain = std::f64::consts::SQRT_2;
    let n_out = samples.len() / n;
    let mut out = Vec::with_capacity(n_out);
    for w in 0..n_out {
        let mut acc_cos = 0.0;
        let mut acc_sin = 0.0;
        for k in 0..n {
            let idx = w * n + k;
            let phase = omega * (idx as f64 / sample_rate_hz) + cfg.electronic_phase;
            acc_cos += samples[idx] * phase.cos();
            // The second reference leads by 90°, so i_sin reads −q/√2.
            acc_sin += samples[idx] * (phase + std::f64::consts::FRAC_PI_2).cos();
        }
        out.push(DemodSamplePair {
            i_cos: gain * acc_cos / n as f64,
            i_sin: gain * acc_sin / n as f64,
        });
    }
    Ok(out)
}
