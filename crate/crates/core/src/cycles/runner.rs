use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::detection::{apply_mode_mismatch, heterodyne_channel, random_phase_rotation};
use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, WitnessReport, PHYSICALITY_TOL};
use crate::mopo::{average_gain, output_covariance, InteractionSetting};

use super::config::ExperimentConfig;
use super::record::CycleRecord;

/// Everything the analytic model says about one sweep point: the physical
/// two-mode state after mode mismatch (`state`), the same state as the
/// detector sees it (`detected`, one vacuum unit mixed in), its witness
/// report, and its gain.
#[derive(Debug, Clone)]
pub struct SweepPointModel {
    pub setting: InteractionSetting,
    pub state: CovarianceMatrix,
    pub detected: CovarianceMatrix,
    pub report: WitnessReport,
    pub gain: f64,
}

/// All cycles recorded at one sweep point, in canonical cycle order.
#[derive(Debug, Clone)]
pub struct SweepPointData {
    pub sweep_index: usize,
    pub model: SweepPointModel,
    pub records: Vec<CycleRecord>,
}

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Independent random stream for one cycle, a pure function of
/// `(seed, sweep_index, cycle_index)`. Cycles can therefore be generated in
/// any order, on any number of threads, with identical results.
pub fn cycle_rng(seed: u64, sweep_index: u64, cycle_index: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    let k0 = splitmix64(&mut state);
    state ^= sweep_index.wrapping_mul(0xA24BAED4963EE407);
    let k1 = splitmix64(&mut state);
    state ^= cycle_index.wrapping_mul(0x9FB21C651E98DF25);
    let k2 = splitmix64(&mut state);
    let k3 = splitmix64(&mut state);
    for (slot, word) in key.chunks_exact_mut(8).zip([k0, k1, k2, k3]) {
        slot.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Lower-triangular-ish factor F with F·Fᵀ = V, for sampling. Cholesky when
/// the matrix is positive definite, spectral square root at the
/// positive-semidefinite boundary.
fn sampling_factor(v: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    if let Some(chol) = v.matrix().clone().cholesky() {
        return Ok(chol.unpack());
    }
    let eig = v.matrix().clone().symmetric_eigen();
    let scale = eig
        .eigenvalues
        .iter()
        .fold(1.0_f64, |mx, &e| mx.max(e.abs()));
    let mut roots = eig.eigenvalues.clone();
    for e in roots.iter_mut() {
        if *e < -PHYSICALITY_TOL * scale {
            return Err(Error::invalid(format!(
                "cannot sample from a non-positive-semidefinite matrix (eigenvalue {e:.3e})"
            )));
        }
        *e = e.max(0.0).sqrt();
    }
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

/// Simulates one trap cycle: draws the cycle's quadrature angles uniformly,
/// rotates the detected covariance accordingly, and samples the configured
/// number of independent quadruples from the resulting Gaussian.
///
/// Vacuum calibration cycles pass the vacuum state here; they consume their
/// stream the same way so cycle kinds stay independent.
pub fn sample_cycle(
    v_detected: &CovarianceMatrix,
    cfg: &ExperimentConfig,
    cycle_index: u64,
    rng: &mut ChaCha8Rng,
    is_vacuum: bool,
) -> Result<CycleRecord> {
    if v_detected.n_modes() != 2 {
        return Err(Error::invalid(format!(
            "cycle sampling needs a two-mode detected state, got {} modes",
            v_detected.n_modes()
        )));
    }
    let theta1 = rng.random_range(0.0..std::f64::consts::TAU);
    let theta2 = rng.random_range(0.0..std::f64::consts::TAU);
    let rotated = random_phase_rotation(v_detected, theta1, theta2)?;
    let factor = sampling_factor(&rotated)?;

    let mut samples = Vec::with_capacity(cfg.samples_per_cycle);
    let mut z = [0.0_f64; 4];
    for _ in 0..cfg.samples_per_cycle {
        for slot in z.iter_mut() {
            *slot = rng.sample(StandardNormal);
        }
        let mut quad = [0.0_f64; 4];
        for (i, q) in quad.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, zj) in z.iter().enumerate() {
                acc += factor[(i, j)] * zj;
            }
            *q = acc;
        }
        samples.push(quad);
    }
    Ok(CycleRecord {
        cycle_index,
        phases: [theta1, theta2],
        samples,
        is_vacuum,
        dt_us: cfg.dt_us,
        window_ms: cfg.window_ms,
    })
}

/// Runs the analytic part of the pipeline for one sweep point:
/// scale the base couplings by κ√I, amplify vacuum, keep the detected mode
/// pair, apply mode mismatch, and mix in the detection vacuum unit.
pub fn sweep_point_model(
    cfg: &ExperimentConfig,
    setting: &InteractionSetting,
) -> Result<SweepPointModel> {
    setting.validate()?;
    let chis = cfg.model.base_coupling()?.scaled(setting.coupling_scale());
    let four_mode = output_covariance(&chis, setting.tau);
    let pair = four_mode.reduce_to_modes(&[0, 1])?;
    let mismatched = apply_mode_mismatch(&pair, cfg.detection.mode_mismatch)?;
    if mismatched.flagged {
        return Err(Error::invalid(
            "model produced a non-physical state after mode mismatch",
        ));
    }
    let state = mismatched.value;
    let report = WitnessReport::from_covariance(&state)?;
    let gain = average_gain(&state)?.value;
    let detected = heterodyne_channel(&state);
    Ok(SweepPointModel {
        setting: *setting,
        state,
        detected,
        report,
        gain,
    })
}

/// Interleaving pattern for one sweep point: `true` marks a vacuum
/// calibration cycle. Vacuum leads (the calibration runs before the pump
/// comes up), alternating 1:1 while both kinds remain, then the tail.
fn vacuum_pattern(n_signal: usize, n_vacuum: usize) -> Vec<bool> {
    let mut pattern = Vec::with_capacity(n_signal + n_vacuum);
    let (mut v, mut s) = (n_vacuum, n_signal);
    while v > 0 || s > 0 {
        if v > 0 {
            pattern.push(true);
            v -= 1;
        }
        if s > 0 {
            pattern.push(false);
            s -= 1;
        }
    }
    pattern
}

/// Simulates one sweep point: its signal cycles interleaved with vacuum
/// calibration cycles, all cycles independent given their
/// `(seed, sweep_index, cycle_index)` stream.
///
/// Cycles are generated in parallel and assembled in canonical
/// `cycle_index` order, so the output is a pure function of the config
/// regardless of thread count. Processing points one at a time through this
/// entry point keeps at most one point's records in memory.
pub fn run_sweep_point(cfg: &ExperimentConfig, sweep_index: usize) -> Result<SweepPointData> {
    cfg.validate()?;
    let setting = cfg.sweep.get(sweep_index).ok_or_else(|| {
        Error::invalid(format!(
            "sweep point {sweep_index} out of range, config has {}",
            cfg.sweep.len()
        ))
    })?;
    let vacuum = CovarianceMatrix::vacuum(2)?;
    let vacuum_detected = heterodyne_channel(&vacuum);
    let model = sweep_point_model(cfg, setting)?;
    let pattern = vacuum_pattern(cfg.n_cycles, cfg.n_vacuum_cycles());
    let records: Result<Vec<CycleRecord>> = pattern
        .par_iter()
        .enumerate()
        .map(|(cycle_index, &is_vacuum)| {
            let mut rng = cycle_rng(cfg.seed, sweep_index as u64, cycle_index as u64);
            let state = if is_vacuum {
                &vacuum_detected
            } else {
                &model.detected
            };
            sample_cycle(state, cfg, cycle_index as u64, &mut rng, is_vacuum)
        })
        .collect();
    Ok(SweepPointData {
        sweep_index,
        model,
        records: records?,
    })
}

/// Simulates the whole experiment; equivalent to [`run_sweep_point`] over
/// every index, collected in sweep order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SweepPointData>> {
    cfg.validate()?;
    (0..cfg.sweep.len())
        .map(|sweep_index| run_sweep_point(cfg, sweep_index))
        .collect()
}
