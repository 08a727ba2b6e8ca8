//! The three subcommands: simulate a configured sweep, re-analyze persisted
//! records, and fit the gain model to a variance table.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::Serialize;

use mopo_sim::cycles::{
    read_records_ndjson, run_sweep_point, write_records_ndjson, CycleRecord, ExperimentConfig,
    SweepPointModel,
};
use mopo_sim::estimators::{summarize_dataset, summarize_with, GainSource, InvariantSummary};
use mopo_sim::mopo::{fit_gain_curve, GainFit};

use crate::config::load_config;
use crate::tables::{
    render, read_fig2_csv, Fig2Row, Fig3Row, Fig4Row, Fig5Row, TableFormat, SCHEMA_VERSION,
};
use crate::{CmdResult, Failure};

/// Stamped into every JSON report so downstream plots can label where
/// their error bars come from.
const UNCERTAINTY_NOTE: &str =
    "nonparametric bootstrap over cycles, vacuum calibration held fixed";

/// Model-side predictions for one sweep point, straight from the configured
/// covariance pipeline, no sampling involved.
#[derive(Debug, Clone, Copy, Serialize)]
struct ModelPoint {
    gain: f64,
    det_a1: f64,
    det_a2: f64,
    det_c: f64,
    det_v: f64,
    w: f64,
    w_ppt: f64,
    nu_tilde_minus: f64,
    purity: f64,
}

impl ModelPoint {
    fn from_model(m: &SweepPointModel) -> Self {
        ModelPoint {
            gain: m.gain,
            det_a1: m.report.det_a1,
            det_a2: m.report.det_a2,
            det_c: m.report.det_c,
            det_v: m.report.det_v,
            w: m.report.w,
            w_ppt: m.report.w_ppt,
            nu_tilde_minus: m.report.nu_tilde_minus,
            purity: m.report.purity,
        }
    }
}

#[derive(Debug, Serialize)]
struct PointEntry {
    sweep_index: usize,
    intensity_mw_cm2: f64,
    tau: f64,
    kappa: f64,
    model: ModelPoint,
    measured: InvariantSummary,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    schema_version: &'static str,
    seed: u64,
    n_cycles: usize,
    samples_per_cycle: usize,
    vacuum_ratio: f64,
    bootstrap_resamples: usize,
    uncertainty: &'static str,
    /// The x axis of the determinant/witness/purity tables.
    gain_axis: &'static str,
    /// Where the fig2 fit columns come from: the per-channel gain-curve fit
    /// when at least 3 points are available, the model prediction otherwise.
    fit_source: &'static str,
    fit_g_s1: Option<f64>,
    fit_g_s2: Option<f64>,
    status: &'static str,
    error: Option<String>,
    points: Vec<PointEntry>,
}

fn gain_model(g: f64, intensity: f64) -> f64 {
    (f64::cosh(g * intensity.sqrt()) + 1.0) / 2.0
}

pub fn sweep(
    config_path: &Path,
    seed_override: Option<u64>,
    save_records: bool,
    out_dir: &Path,
    format: TableFormat,
) -> CmdResult<()> {
    let mut cfg = load_config(config_path)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }

    let mut entries: Vec<PointEntry> = Vec::new();
    let mut failure: Option<String> = None;
    for sweep_index in 0..cfg.sweep.len() {
        match simulate_point(&cfg, sweep_index, save_records, out_dir) {
            Ok(entry) => entries.push(entry),
            Err(msg) => {
                failure = Some(format!("sweep point {sweep_index}: {msg}"));
                break;
            }
        }
    }

    let fits = fit_fig2_columns(&entries);
    let fig2: Vec<Fig2Row> = entries
        .iter()
        .map(|e| {
            let (fit_s1, fit_s2) = match &fits {
                Some((f1, f2)) => (
                    gain_model(f1.g, e.intensity_mw_cm2),
                    gain_model(f2.g, e.intensity_mw_cm2),
                ),
                None => {
                    let a = |d: f64| d.max(0.0).sqrt();
                    (a(e.model.det_a1), a(e.model.det_a2))
                }
            };
            Fig2Row {
                intensity_mw_cm2: e.intensity_mw_cm2,
                var_s1: e.measured.var_s1,
                var_s2: e.measured.var_s2,
                se_var_s1: e.measured.se_var_s1,
                se_var_s2: e.measured.se_var_s2,
                fit_s1,
                fit_s2,
            }
        })
        .collect();
    let fig3: Vec<Fig3Row> = entries
        .iter()
        .map(|e| Fig3Row {
            gain: e.measured.gain,
            det_a1: e.measured.det_a1,
            det_a2: e.measured.det_a2,
            minus_det_c: -e.measured.det_c,
            se_det_a1: e.measured.se_det_a1,
            se_det_a2: e.measured.se_det_a2,
            se_det_c: e.measured.se_det_c,
            model_det_a1: e.model.det_a1,
            model_det_a2: e.model.det_a2,
            model_minus_det_c: -e.model.det_c,
        })
        .collect();
    let fig4: Vec<Fig4Row> = entries
        .iter()
        .map(|e| Fig4Row {
            gain: e.measured.gain,
            w: e.measured.w,
            w_ppt: e.measured.w_ppt,
            se_w: e.measured.se_w,
            se_w_ppt: e.measured.se_w_ppt,
        })
        .collect();
    let fig5: Vec<Fig5Row> = entries
        .iter()
        .map(|e| Fig5Row {
            gain: e.measured.gain,
            purity: e.measured.purity,
            se_purity: e.measured.se_purity,
        })
        .collect();

    write_file(out_dir, &format.file_name("fig2"), &render(&fig2, format))?;
    write_file(out_dir, &format.file_name("fig3"), &render(&fig3, format))?;
    write_file(out_dir, &format.file_name("fig4"), &render(&fig4, format))?;
    write_file(out_dir, &format.file_name("fig5"), &render(&fig5, format))?;

    let summary = SweepSummary {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        n_cycles: cfg.n_cycles,
        samples_per_cycle: cfg.samples_per_cycle,
        vacuum_ratio: cfg.vacuum_ratio,
        bootstrap_resamples: cfg.bootstrap_resamples,
        uncertainty: UNCERTAINTY_NOTE,
        gain_axis: "measured, (a1 + a2)/2 per sweep point",
        fit_source: if fits.is_some() {
            "gain_curve_fit"
        } else {
            "model_prediction"
        },
        fit_g_s1: fits.as_ref().map(|(f, _)| f.g),
        fit_g_s2: fits.as_ref().map(|(_, f)| f.g),
        status: if failure.is_none() {
            "complete"
        } else {
            "partial"
        },
        error: failure.clone(),
        points: entries,
    };
    write_json(out_dir, "summary.json", &summary)?;

    match failure {
        None => Ok(()),
        Some(msg) => Err(Failure::Runtime(format!(
            "{msg}; partial outputs marked in {}",
            out_dir.join("summary.json").display()
        ))),
    }
}

fn simulate_point(
    cfg: &ExperimentConfig,
    sweep_index: usize,
    save_records: bool,
    out_dir: &Path,
) -> Result<PointEntry, String> {
    let data = run_sweep_point(cfg, sweep_index).map_err(|e| e.to_string())?;
    if save_records {
        let dir = out_dir.join("records");
        fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let path = dir.join(format!("point_{sweep_index:02}.ndjson"));
        let file = fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        write_records_ndjson(&data.records, BufWriter::new(file))
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let measured = summarize_dataset(
        &data.records,
        GainSource::Measured,
        cfg.bootstrap_resamples,
    )
    .map_err(|e| e.to_string())?;
    let setting = data.model.setting;
    Ok(PointEntry {
        sweep_index,
        intensity_mw_cm2: setting.pump_intensity,
        tau: setting.tau,
        kappa: setting.kappa,
        model: ModelPoint::from_model(&data.model),
        measured,
    })
}

/// Per-channel gain fits over the completed points; None when too few
/// points completed or a fit precondition fails (the tables then fall back
/// to the model prediction).
fn fit_fig2_columns(entries: &[PointEntry]) -> Option<(GainFit, GainFit)> {
    if entries.len() < 3 {
        return None;
    }
    let s1: Vec<(f64, f64)> = entries
        .iter()
        .map(|e| (e.intensity_mw_cm2, e.measured.var_s1))
        .collect();
    let s2: Vec<(f64, f64)> = entries
        .iter()
        .map(|e| (e.intensity_mw_cm2, e.measured.var_s2))
        .collect();
    match (fit_gain_curve(&s1), fit_gain_curve(&s2)) {
        (Ok(f1), Ok(f2)) => Some((f1, f2)),
        _ => None,
    }
}

#[derive(Debug, Serialize)]
struct AnalyzeSummary {
    schema_version: &'static str,
    source: String,
    n_records: usize,
    n_signal: usize,
    n_vacuum: usize,
    bootstrap_resamples: usize,
    gain_source: &'static str,
    fixed_gain: Option<f64>,
    uncertainty: &'static str,
    summary: InvariantSummary,
}

pub fn analyze(
    records_path: &Path,
    vacuum_path: Option<&Path>,
    resamples: usize,
    fixed_gain: Option<f64>,
    out_dir: &Path,
) -> CmdResult<()> {
    let records = load_records(records_path)?;
    let gain = match fixed_gain {
        Some(g) => GainSource::Fixed(g),
        None => GainSource::Measured,
    };
    let summary = match vacuum_path {
        Some(vp) => {
            let vacuum = load_records(vp)?;
            summarize_with(&records, &vacuum, gain, resamples)
        }
        None if records.iter().all(|r| r.is_vacuum) => {
            // A pure calibration dataset measures the vacuum against
            // itself: the same cycles serve as signal and as reference.
            let signal: Vec<CycleRecord> = records
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.is_vacuum = false;
                    r
                })
                .collect();
            summarize_with(&signal, &records, gain, resamples)
        }
        None => summarize_dataset(&records, gain, resamples),
    }
    .map_err(Failure::runtime)?;

    let n_vacuum = records.iter().filter(|r| r.is_vacuum).count();
    let report = AnalyzeSummary {
        schema_version: SCHEMA_VERSION,
        source: records_path.display().to_string(),
        n_records: records.len(),
        n_signal: records.len() - n_vacuum,
        n_vacuum,
        bootstrap_resamples: resamples,
        gain_source: if fixed_gain.is_some() {
            "fixed"
        } else {
            "measured"
        },
        fixed_gain,
        uncertainty: UNCERTAINTY_NOTE,
        summary,
    };
    write_json(out_dir, "summary.json", &report)
}

fn load_records(path: &Path) -> CmdResult<Vec<CycleRecord>> {
    let file =
        fs::File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    read_records_ndjson(BufReader::new(file))
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
struct FitPoint {
    intensity_mw_cm2: f64,
    measured: f64,
    fitted: f64,
    deviation: f64,
    /// deviation / standard error, when the table carries a positive SE.
    standardized: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ChannelFit {
    channel: &'static str,
    g: f64,
    residual: f64,
    converged: bool,
    points: Vec<FitPoint>,
}

#[derive(Debug, Serialize)]
struct FitReport {
    schema_version: &'static str,
    source: String,
    model: &'static str,
    channels: Vec<ChannelFit>,
}

pub fn fit(input: &Path, out_dir: &Path) -> CmdResult<()> {
    let text = fs::read_to_string(input)
        .map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
    let rows =
        read_fig2_csv(&text).map_err(|m| Failure::Input(format!("{}: {m}", input.display())))?;

    let channel = |name: &'static str,
                   value: fn(&Fig2Row) -> f64,
                   se: fn(&Fig2Row) -> f64|
     -> CmdResult<ChannelFit> {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.intensity_mw_cm2, value(r))).collect();
        let fit = fit_gain_curve(&points)
            .map_err(|e| Failure::Input(format!("{}: channel {name}: {e}", input.display())))?;
        let points = rows
            .iter()
            .map(|r| {
                let fitted = gain_model(fit.g, r.intensity_mw_cm2);
                let deviation = value(r) - fitted;
                FitPoint {
                    intensity_mw_cm2: r.intensity_mw_cm2,
                    measured: value(r),
                    fitted,
                    deviation,
                    standardized: (se(r) > 0.0).then(|| deviation / se(r)),
                }
            })
            .collect();
        Ok(ChannelFit {
            channel: name,
            g: fit.g,
            residual: fit.residual,
            converged: fit.converged,
            points,
        })
    };

    let report = FitReport {
        schema_version: SCHEMA_VERSION,
        source: input.display().to_string(),
        model: "a(I) = (cosh(g sqrt(I)) + 1)/2",
        channels: vec![
            channel("s1", |r| r.var_s1, |r| r.se_var_s1)?,
            channel("s2", |r| r.var_s2, |r| r.se_var_s2)?,
        ],
    };
    write_json(out_dir, "fit.json", &report)
}

fn write_file(dir: &Path, name: &str, content: &str) -> CmdResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    let path: PathBuf = dir.join(name);
    fs::write(&path, content).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CmdResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Runtime(format!("{name}: {e}")))?;
    text.push('\n');
    write_file(dir, name, &text)
}
