use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycles::{splitmix64, CycleRecord};
use crate::error::{Error, Result};
use crate::gaussian::{det_v_symmetric, witnesses_from_invariants};

use super::calibration::SqlCalibration;
use super::cycle_stats::CycleStats;

/// Where the reported gain comes from: measured as `(a1 + a2)/2` from the
/// data itself, or pinned to an externally known value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainSource {
    Measured,
    Fixed(f64),
}

/// Pooled per-mode second moments in vacuum units, already corrected for the
/// added detection vacuum: `a_i` is the mode variance (1 = vacuum), `c_pq_i`
/// the within-mode p-q cross term, which phase diffusion drives to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PooledAutocovariance {
    pub a1: f64,
    pub a2: f64,
    pub c_pq1: f64,
    pub c_pq2: f64,
}

/// Everything one sweep point contributes to the figures, with bootstrap
/// standard errors. `det_v` follows the symmetric-form reduction
/// `(√(Det A1 · Det A2) − |Det C|)²`, `purity = 1/√Det V` (0 when `Det V`
/// vanishes), and `det_c_positive` flags the unexpected sign instead of
/// failing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub gain: f64,
    pub var_s1: f64,
    pub var_s2: f64,
    pub det_a1: f64,
    pub det_a2: f64,
    pub det_c: f64,
    pub det_v: f64,
    pub w: f64,
    pub w_ppt: f64,
    pub purity: f64,
    pub se_var_s1: f64,
    pub se_var_s2: f64,
    pub se_det_a1: f64,
    pub se_det_a2: f64,
    pub se_det_c: f64,
    pub se_w: f64,
    pub se_w_ppt: f64,
    pub se_purity: f64,
    pub n_cycles_used: usize,
    pub n_degenerate_dropped: usize,
    pub det_c_positive: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n_samples: f64,
    sum: [f64; 4],
    sumsq: [f64; 4],
    cross: [f64; 2],
    det_c_sum: f64,
    det_c_count: usize,
    dropped: usize,
}

impl Accumulator {
    fn add(&mut self, stats: &CycleStats) {
        self.n_samples += stats.n as f64;
        for i in 0..4 {
            self.sum[i] += stats.sum[i];
            self.sumsq[i] += stats.sumsq[i];
        }
        self.cross[0] += stats.cross[0];
        self.cross[1] += stats.cross[1];
        if stats.degenerate {
            self.dropped += 1;
        } else {
            self.det_c_sum += stats.det_c;
            self.det_c_count += 1;
        }
    }

    fn pooled(&self) -> Option<PooledAutocovariance> {
        if self.n_samples < 2.0 {
            return None;
        }
        let n = self.n_samples;
        let var = |i: usize| (self.sumsq[i] - self.sum[i] * self.sum[i] / n) / (n - 1.0);
        let cov = |k: usize, i: usize, j: usize| {
            (self.cross[k] - self.sum[i] * self.sum[j] / n) / (n - 1.0)
        };
        Some(PooledAutocovariance {
            a1: var(0) + var(1) - 1.0,
            a2: var(2) + var(3) - 1.0,
            c_pq1: 2.0 * cov(0, 0, 1),
            c_pq2: 2.0 * cov(1, 2, 3),
        })
    }

    fn point(&self, gain: GainSource) -> Option<Point> {
        let pooled = self.pooled()?;
        if self.det_c_count == 0 {
            return None;
        }
        let det_c = self.det_c_sum / self.det_c_count as f64;
        let det_a1 = pooled.a1 * pooled.a1;
        let det_a2 = pooled.a2 * pooled.a2;
        let det_v = det_v_symmetric(det_a1, det_a2, det_c)
            .expect("squared variances are non-negative");
        let (w, w_ppt) = witnesses_from_invariants(det_a1, det_a2, det_c, det_v);
        let purity = if det_v > 0.0 {
            det_v.sqrt().recip()
        } else {
            0.0
        };
        let gain = match gain {
            GainSource::Measured => (pooled.a1 + pooled.a2) / 2.0,
            GainSource::Fixed(g) => g,
        };
        Some(Point {
            gain,
            var_s1: pooled.a1,
            var_s2: pooled.a2,
            det_a1,
            det_a2,
            det_c,
            det_v,
            w,
            w_ppt,
            purity,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    gain: f64,
    var_s1: f64,
    var_s2: f64,
    det_a1: f64,
    det_a2: f64,
    det_c: f64,
    det_v: f64,
    w: f64,
    w_ppt: f64,
    purity: f64,
}

/// Pools all samples of `records` per channel and returns the corrected
/// per-mode variances and within-mode cross terms. Records are taken as
/// given (no vacuum filtering); normalize against measured vacuum by
/// building `sql` with [`SqlCalibration::from_vacuum_records`].
pub fn pooled_autocovariance(
    records: &[CycleRecord],
    sql: &SqlCalibration,
) -> Result<PooledAutocovariance> {
    if records.len() < 2 {
        return Err(Error::invalid(format!(
            "pooled statistics need at least 2 records, got {}",
            records.len()
        )));
    }
    let mut acc = Accumulator::default();
    for record in records {
        acc.add(&CycleStats::from_record(record, sql)?);
    }
    acc.pooled()
        .ok_or_else(|| Error::invalid("pooled statistics need at least 2 samples in total"))
}

/// Content-derived bootstrap seed, so re-analyzing the same dataset (in
/// process or from disk) resamples identically.
fn bootstrap_seed(stats: &[CycleStats]) -> u64 {
    let mut hash = 0xCBF29CE484222325_u64;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001B3);
        }
    };
    eat(&(stats.len() as u64).to_le_bytes());
    for s in stats {
        eat(&(s.n as u64).to_le_bytes());
        eat(&s.sum[0].to_bits().to_le_bytes());
        eat(&s.sumsq[0].to_bits().to_le_bytes());
        eat(&s.det_c.to_bits().to_le_bytes());
    }
    hash
}

fn bootstrap_rng(seed: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for slot in key.chunks_exact_mut(8) {
        slot.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn standard_error(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    var.max(0.0).sqrt()
}

/// [`summarize_with`] at the default 200 bootstrap resamples.
pub fn summarize(
    records: &[CycleRecord],
    vacuum_records: &[CycleRecord],
    gain: GainSource,
) -> Result<InvariantSummary> {
    summarize_with(records, vacuum_records, gain, 200)
}

/// Full estimation pipeline for one sweep point: calibrate the quantum level
/// from `vacuum_records`, pool the signal cycles of `records` (any
/// vacuum-flagged entries among them are ignored), form the corrected
/// determinants, and derive witnesses and purity, with cycle-level bootstrap
/// standard errors.
///
/// The calibration is held fixed across bootstrap resamples; errors reflect
/// signal-cycle scatter.
pub fn summarize_with(
    records: &[CycleRecord],
    vacuum_records: &[CycleRecord],
    gain: GainSource,
    resamples: usize,
) -> Result<InvariantSummary> {
    if resamples < 2 {
        return Err(Error::invalid(format!(
            "bootstrap needs at least 2 resamples, got {resamples}"
        )));
    }
    let sql = SqlCalibration::from_vacuum_records(vacuum_records)?;
    let signal: Vec<&CycleRecord> = records.iter().filter(|r| !r.is_vacuum).collect();
    if signal.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 signal cycles, got {}",
            signal.len()
        )));
    }
    let stats: Vec<CycleStats> = signal
        .par_iter()
        .map(|record| CycleStats::from_record(record, &sql))
        .collect::<Result<_>>()?;

    let mut full = Accumulator::default();
    for s in &stats {
        full.add(s);
    }
    let dropped = full.dropped;
    let point = full
        .point(gain)
        .ok_or_else(|| Error::invalid("every signal cycle was degenerate"))?;

    let mut rng = bootstrap_rng(bootstrap_seed(&stats));
    let n = stats.len();
    let mut draws: Vec<Point> = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = Accumulator::default();
        for _ in 0..n {
            acc.add(&stats[rng.random_range(0..n)]);
        }
        if let Some(p) = acc.point(gain) {
            draws.push(p);
        }
    }
    let collect = |f: fn(&Point) -> f64| draws.iter().map(f).collect::<Vec<f64>>();
    let purity_draws: Vec<f64> = draws
        .iter()
        .filter(|p| p.det_v > 0.0)
        .map(|p| p.purity)
        .collect();

    Ok(InvariantSummary {
        gain: point.gain,
        var_s1: point.var_s1,
        var_s2: point.var_s2,
        det_a1: point.det_a1,
        det_a2: point.det_a2,
        det_c: point.det_c,
        det_v: point.det_v,
        w: point.w,
        w_ppt: point.w_ppt,
        purity: point.purity,
        se_var_s1: standard_error(&collect(|p| p.var_s1)),
        se_var_s2: standard_error(&collect(|p| p.var_s2)),
        se_det_a1: standard_error(&collect(|p| p.det_a1)),
        se_det_a2: standard_error(&collect(|p| p.det_a2)),
        se_det_c: standard_error(&collect(|p| p.det_c)),
        se_w: standard_error(&collect(|p| p.w)),
        se_w_ppt: standard_error(&collect(|p| p.w_ppt)),
        se_purity: standard_error(&purity_draws),
        n_cycles_used: n,
        n_degenerate_dropped: dropped,
        det_c_positive: point.det_c > 0.0,
    })
}

/// Splits one mixed dataset by the vacuum flag and summarizes it: the usual
/// entry point for stored datasets where signal and calibration cycles are
/// interleaved in one stream.
pub fn summarize_dataset(
    records: &[CycleRecord],
    gain: GainSource,
    resamples: usize,
) -> Result<InvariantSummary> {
    summarize_with(records, records, gain, resamples)
}
