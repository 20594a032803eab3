//! Report persistence: full nested JSON, plus a flat CSV view of the raw
//! executions for spreadsheet work.

use std::path::Path;

use thiserror::Error;

use super::protocol::RunReport;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report file {path:?}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("report is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn to_json_string(report: &RunReport) -> Result<String, ReportError> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn write_json(report: &RunReport, path: &Path) -> Result<(), ReportError> {
    let text = to_json_string(report)?;
    std::fs::write(path, text.as_bytes())
        .map_err(|source| ReportError::Io { path: path.display().to_string(), source })
}

pub fn read_json(path: &Path) -> Result<RunReport, ReportError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ReportError::Io { path: path.display().to_string(), source })?;
    Ok(serde_json::from_str(&text)?)
}

/// Flattens the raw executions to CSV: one line per execution, columns
/// `query, kind, index, duration_ms, status`.
pub fn to_flat_csv(report: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["query", "kind", "index", "duration_ms", "status"])
        .expect("write csv header to memory");
    for q in &report.queries {
        for e in &q.executions {
            w.write_record([
                q.query.as_str(),
                e.kind.label(),
                &e.index.to_string(),
                &format_ms(e.duration),
                e.status.label(),
            ])
            .expect("write csv row to memory");
        }
    }
    let bytes = w.into_inner().expect("flush csv to memory");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

fn format_ms(d: std::time::Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}
