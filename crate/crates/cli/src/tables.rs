//! Figure tables with fixed schemas.
//!
//! Every table has an exact header, rows render through `Display` (shortest
//! round-trip float formatting), and the same rows can be emitted as CSV or
//! as a JSON array of objects. `read_fig2_csv` is the strict reader used by
//! the fit command.

use clap::ValueEnum;
use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1";

pub const FIG2_HEADER: &str = "intensity_mw_cm2,var_s1,var_s2,se_var_s1,se_var_s2,fit_s1,fit_s2";
pub const FIG3_HEADER: &str = "gain,det_a1,det_a2,minus_det_c,se_det_a1,se_det_a2,se_det_c,\
                               model_det_a1,model_det_a2,model_minus_det_c";
pub const FIG4_HEADER: &str = "gain,w,w_ppt,se_w,se_w_ppt";
pub const FIG5_HEADER: &str = "gain,purity,se_purity";

/// On-disk format of the figure tables; the JSON reports are always JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    pub fn file_name(self, stem: &str) -> String {
        match self {
            TableFormat::Csv => format!("{stem}.csv"),
            TableFormat::Json => format!("{stem}.json"),
        }
    }
}

pub trait TableRow: Serialize {
    const HEADER: &'static str;
    fn csv_line(&self) -> String;
}

/// Quadrature variances per mode against pump intensity, with the fitted
/// gain curve alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig2Row {
    pub intensity_mw_cm2: f64,
    pub var_s1: f64,
    pub var_s2: f64,
    pub se_var_s1: f64,
    pub se_var_s2: f64,
    pub fit_s1: f64,
    pub fit_s2: f64,
}

impl TableRow for Fig2Row {
    const HEADER: &'static str = FIG2_HEADER;

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.intensity_mw_cm2,
            self.var_s1,
            self.var_s2,
            self.se_var_s1,
            self.se_var_s2,
            self.fit_s1,
            self.fit_s2
        )
    }
}

/// Block determinants against measured gain, with the model predictions
/// alongside. The cross determinant is published negated so the column is
/// positive where the modes are correlated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig3Row {
    pub gain: f64,
    pub det_a1: f64,
    pub det_a2: f64,
    pub minus_det_c: f64,
    pub se_det_a1: f64,
    pub se_det_a2: f64,
    pub se_det_c: f64,
    pub model_det_a1: f64,
    pub model_det_a2: f64,
    pub model_minus_det_c: f64,
}

impl TableRow for Fig3Row {
    const HEADER: &'static str = FIG3_HEADER;

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.gain,
            self.det_a1,
            self.det_a2,
            self.minus_det_c,
            self.se_det_a1,
            self.se_det_a2,
            self.se_det_c,
            self.model_det_a1,
            self.model_det_a2,
            self.model_minus_det_c
        )
    }
}

/// Physicality and entanglement witnesses against measured gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig4Row {
    pub gain: f64,
    pub w: f64,
    pub w_ppt: f64,
    pub se_w: f64,
    pub se_w_ppt: f64,
}

impl TableRow for Fig4Row {
    const HEADER: &'static str = FIG4_HEADER;

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.gain, self.w, self.w_ppt, self.se_w, self.se_w_ppt
        )
    }
}

/// State purity against measured gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig5Row {
    pub gain: f64,
    pub purity: f64,
    pub se_purity: f64,
}

impl TableRow for Fig5Row {
    const HEADER: &'static str = FIG5_HEADER;

    fn csv_line(&self) -> String {
        format!("{},{},{}", self.gain, self.purity, self.se_purity)
    }
}

/// Renders rows in the requested format, trailing newline included. JSON
/// output is a pretty-printed array of row objects with the same field
/// names as the CSV columns.
pub fn render<R: TableRow>(rows: &[R], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut out = String::with_capacity(64 * (rows.len() + 1));
            out.push_str(R::HEADER);
            out.push('\n');
            for row in rows {
                out.push_str(&row.csv_line());
                out.push('\n');
            }
            out
        }
        TableFormat::Json => {
            let mut out = serde_json::to_string_pretty(rows).expect("rows serialize");
            out.push('\n');
            out
        }
    }
}

/// Strict fig2 reader: exact header, 7 numeric fields per row, row/field
/// positions in every error message.
pub fn read_fig2_csv(text: &str) -> Result<Vec<Fig2Row>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty table: missing header")?;
    if header.trim() != FIG2_HEADER {
        return Err(format!(
            "unexpected header {header:?}; expected {FIG2_HEADER:?}"
        ));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row_no = k + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(format!(
                "row {row_no}: expected 7 fields, got {} ({} rows parsed before the failure)",
                fields.len(),
                rows.len()
            ));
        }
        let parse = |idx: usize| -> Result<f64, String> {
            fields[idx]
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("row {row_no}, field {}: {e}", idx + 1))
        };
        rows.push(Fig2Row {
            intensity_mw_cm2: parse(0)?,
            var_s1: parse(1)?,
            var_s2: parse(2)?,
            se_var_s1: parse(3)?,
            se_var_s2: parse(4)?,
            fit_s1: parse(5)?,
            fit_s2: parse(6)?,
        });
    }
    Ok(rows)
}
