use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One acquisition cycle: the burst of demodulated quadrature quadruples
/// `(i_cos1, i_sin1, i_cos2, i_sin2)` taken while the trap is dark, plus the
/// quadrature angles the interferometer happened to sit at.
///
/// `is_vacuum` marks calibration cycles recorded with the pump off. `dt_us`
/// and `window_ms` document the acquisition timing (spacing × count =
/// window).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle_index: u64,
    /// (θ1, θ2), radians in [0, 2π).
    pub phases: [f64; 2],
    pub samples: Vec<[f64; 4]>,
    pub is_vacuum: bool,
    pub dt_us: f64,
    pub window_ms: f64,
}

/// Newline-delimited JSON, one record per line. Exact float round trip.
pub fn write_records_ndjson<W: Write>(records: &[CycleRecord], mut out: W) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(|e| Error::Schema(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records_ndjson<R: BufRead>(input: R) -> Result<Vec<CycleRecord>> {
    let mut records = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CycleRecord = serde_json::from_str(&line).map_err(|e| {
            Error::Schema(format!(
                "line {}: {} ({} records parsed before the failure)",
                lineno + 1,
                e,
                records.len()
            ))
        })?;
        records.push(record);
    }
    Ok(records)
}

const CSV_HEADER: &str =
    "cycle_index,sample_index,i_cos1,i_sin1,i_cos2,i_sin2,is_vacuum,theta1,theta2";

/// Flat CSV with one row per sample. Timing metadata is not carried by this
/// format; re-imported records get the default 25 µs / 1.6 ms timing.
pub fn write_records_csv<W: Write>(records: &[CycleRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for record in records {
        for (sample_index, q) in record.samples.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                record.cycle_index,
                sample_index,
                q[0],
                q[1],
                q[2],
                q[3],
                u8::from(record.is_vacuum),
                record.phases[0],
                record.phases[1],
            )?;
        }
    }
    Ok(())
}

pub fn read_records_csv<R: BufRead>(input: R) -> Result<Vec<CycleRecord>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Schema("empty CSV: missing header".into()))??;
    if header.trim() != CSV_HEADER {
        return Err(Error::Schema(format!(
            "unexpected CSV header {header:?}; expected {CSV_HEADER:?}"
        )));
    }
    let mut records: Vec<CycleRecord> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = lineno + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Schema(format!(
                "row {row}: expected 9 fields, got {} ({} records before the failure)",
                fields.len(),
                records.len()
            )));
        }
        let parse = |k: usize| -> Result<f64> {
            fields[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Schema(format!("row {row}, field {}: {e}", k + 1)))
        };
        let cycle_index: u64 = fields[0]
            .trim()
            .parse()
            .map_err(|e| Error::Schema(format!("row {row}, field 1: {e}")))?;
        let quad = [parse(2)?, parse(3)?, parse(4)?, parse(5)?];
        let is_vacuum = match fields[6].trim() {
            "0" | "false" => false,
            "1" | "true" => true,
            other => {
                return Err(Error::Schema(format!(
                    "row {row}: is_vacuum must be 0/1, got {other:?}"
                )))
            }
        };
        let phases = [parse(7)?, parse(8)?];
        match records.last_mut() {
            Some(last) if last.cycle_index == cycle_index => {
                last.samples.push(quad);
            }
            _ => records.push(CycleRecord {
                cycle_index,
                phases,
                samples: vec![quad],
                is_vacuum,
                dt_us: 25.0,
                window_ms: 1.6,
            }),
        }
    }
    Ok(records)
}
