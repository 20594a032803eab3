//! Result verification: runs each enabled query on a backend and compares
//! its rows, after canonical ordering and decimal normalization, with the
//! reference engine's answer.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{evaluate_with_deadline, QueryResult};
use crate::value::Value;
use crate::warehouse::Warehouse;
use crate::workload::{build_workload, WorkloadConfig, WorkloadError};

use super::driver::{Driver, QueryPayload, QueryRequest};

/// Per-query comparison outcome. `Incomparable` is a verdict, not an error:
/// it covers opaque payloads, driver faults, and reference-side failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "lowercase")]
pub enum Verdict {
    Match,
    Mismatch(String),
    Incomparable(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::Mismatch(_) => "mismatch",
            Verdict::Incomparable(_) => "incomparable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryVerdict {
    pub query: String,
    pub verdict: Verdict,
}

/// Executes every enabled query on `drv` and compares against the engine's
/// evaluation of `w`. A driver without comparable rows yields a blanket
/// incomparable verdict per query.
pub fn verify_backend(
    drv: &mut dyn Driver,
    w: &Warehouse,
    wc: &WorkloadConfig,
) -> Result<Vec<QueryVerdict>, WorkloadError> {
    let workload = build_workload(wc)?;
    if !drv.comparable_rows() {
        return Ok(workload
            .into_iter()
            .map(|q| QueryVerdict {
                query: q.id.to_string(),
                verdict: Verdict::Incomparable(
                    "driver does not return comparable rows".to_string(),
                ),
            })
            .collect());
    }

    let mut verdicts = Vec::with_capacity(workload.len());
    for spec in workload {
        let query = spec.id.to_string();
        let deadline = Instant::now() + wc.timeout;
        let expected = match evaluate_with_deadline(w, &spec, Some(deadline)) {
            Ok(r) => r,
            Err(e) => {
                verdicts.push(QueryVerdict {
                    query,
                    verdict: Verdict::Incomparable(format!("reference evaluation failed: {e}")),
                });
                continue;
            }
        };
        let req = QueryRequest::new(spec, &w.model, wc.timeout);
        let verdict = match drv.execute_query(&req) {
            Ok(QueryPayload::Rows(actual)) => compare_results(&expected, &actual),
            Ok(QueryPayload::Opaque(_)) => {
                Verdict::Incomparable("backend returned an opaque payload".to_string())
            }
            Err(e) => Verdict::Incomparable(format!("driver error: {e}")),
        };
        verdicts.push(QueryVerdict { query, verdict });
    }
    Ok(verdicts)
}

/// Compares two result sets after canonicalization.
pub fn compare_results(expected: &QueryResult, actual: &QueryResult) -> Verdict {
    if expected.columns != actual.columns || expected.key_count != actual.key_count {
        return Verdict::Mismatch(format!(
            "result shape differs: expected columns {:?}, got {:?}",
            expected.columns, actual.columns
        ));
    }
    let want = canonicalize(expected);
    let got = canonicalize(actual);
    if want.rows.len() != got.rows.len() {
        return Verdict::Mismatch(format!(
            "row count differs: expected {}, got {}",
            want.rows.len(),
            got.rows.len()
        ));
    }
    for (w_row, g_row) in want.rows.iter().zip(&got.rows) {
        if w_row != g_row {
            let key: Vec<String> =
                w_row.iter().take(want.key_count).map(Value::render).collect();
            let cell = w_row
                .iter()
                .zip(g_row)
                .position(|(a, b)| a != b)
                .expect("rows differ in some cell");
            return Verdict::Mismatch(format!(
                "row [{}]: column {} expected {}, got {}",
                key.join(", "),
                want.columns[cell],
                w_row[cell].render(),
                g_row[cell].render()
            ));
        }
    }
    Verdict::Match
}

/// Canonical comparison form: aggregate cells normalized to two-decimal
/// values where possible (so a backend answering `41` matches `41.00`), rows
/// sorted into one canonical order.
fn canonicalize(r: &QueryResult) -> QueryResult {
    let mut rows: Vec<Vec<Value>> = r
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(i, v)| {
                    if i >= r.key_count {
                        normalize_decimal(v)
                    } else {
                        v.clone()
                    }
                })
                .collect()
        })
        .collect();
    rows.sort();
    QueryResult { columns: r.columns.clone(), key_count: r.key_count, rows }
}

fn normalize_decimal(v: &Value) -> Value {
    match v {
        Value::Int(n) => match n.checked_mul(100) {
            Some(cents) => Value::Dec(cents),
            None => Value::Int(*n),
        },
        other => other.clone(),
    }
}
