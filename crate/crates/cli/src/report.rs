//! Report envelopes and their JSON, CSV and text renderings.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::input::{EncodingTable, InputDigest};

pub const MEASURE_SCHEMA: &str = "etcausal/measure-report/v1";
pub const QUANTIZE_SCHEMA: &str = "etcausal/quantize-report/v1";
pub const REPRODUCE_SCHEMA: &str = "etcausal/reproduce-report/v1";

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool {
    name: "etcausal",
    version: env!("CARGO_PKG_VERSION"),
};

/// Fields shared by every report.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, C: Serialize, B: Serialize> {
    pub schema: &'static str,
    pub tool: Tool,
    pub config: &'a C,
    pub input: &'a InputDigest,
    #[serde(flatten)]
    pub body: B,
}

impl<C: Serialize, B: Serialize> Envelope<'_, C, B> {
    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// `# key: value` lines heading CSV and text output.
    pub fn preamble(&self, comment: &str) -> CliResult<String> {
        let config = serde_json::to_string(self.config).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(format!(
            "{comment}schema: {}\n{comment}tool: {} {}\n{comment}input: {} sha256={} bytes={}\n{comment}config: {config}\n",
            self.schema,
            self.tool.name,
            self.tool.version,
            self.input.path,
            self.input.sha256,
            self.input.bytes
        ))
    }
}

/// One computed value. Fields that do not apply to a measure stay empty.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Record {
    pub kind: &'static str,
    pub x: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag: Option<usize>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_after_test: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence_halfwidth: Option<f64>,
}

const RECORD_COLUMNS: [&str; 13] = [
    "kind",
    "x",
    "y",
    "lag",
    "value",
    "unit",
    "iterations",
    "length",
    "effective_samples",
    "value_after_test",
    "threshold",
    "passed",
    "confidence_halfwidth",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl Record {
    fn cells(&self, float: impl Fn(f64) -> String) -> [String; 13] {
        [
            self.kind.to_string(),
            self.x.clone(),
            opt(self.y.as_ref()),
            opt(self.lag),
            float(self.value),
            opt(self.unit),
            opt(self.iterations),
            opt(self.length),
            opt(self.effective_samples),
            self.value_after_test.map_or_else(String::new, &float),
            self.threshold.map_or_else(String::new, &float),
            opt(self.passed),
            self.confidence_halfwidth.map_or_else(String::new, &float),
        ]
    }
}

/// Full-precision CSV with a fixed column set.
pub fn records_csv(records: &[Record]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(RECORD_COLUMNS).map_err(err)?;
    for r in records {
        w.write_record(r.cells(|v| v.to_string())).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Aligned text table; columns that are empty in every row are dropped.
pub fn records_table(records: &[Record]) -> String {
    let rows: Vec<[String; 13]> = records
        .iter()
        .map(|r| r.cells(|v| format!("{v:.6}")))
        .collect();
    let keep: Vec<usize> = (0..RECORD_COLUMNS.len())
        .filter(|&c| rows.iter().any(|r| !r[c].is_empty()))
        .collect();
    let header: Vec<String> = keep
        .iter()
        .map(|&c| RECORD_COLUMNS[c].to_string())
        .collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| keep.iter().map(|&c| r[c].clone()).collect())
        .collect();
    text_table(&header, &body)
}

pub fn text_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header);
    line(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>());
    for r in rows {
        line(r);
    }
    out
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".encoding.json");
    PathBuf::from(s)
}

/// Writes `text` to `output` (or stdout). Non-JSON output that carries an
/// encoding gets it as a JSON file next to the report.
pub fn emit(text: &str, output: Option<&Path>, encoding: Option<&EncodingTable>) -> CliResult<()> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| io(path, e))?;
            if let Some(enc) = encoding {
                let side = sidecar_path(path);
                let mut json =
                    serde_json::to_string_pretty(enc).map_err(|e| CliError::Io(e.to_string()))?;
                json.push('\n');
                std::fs::write(&side, json).map_err(|e| io(&side, e))?;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}
