//! The execution protocol: one load test, then per query one cold run
//! followed by `nrun` warm runs, every duration recorded raw, with
//! population statistics per block and overall.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::WarehouseDocuments;
use crate::model::WarehouseModel;
use crate::workload::{build_workload, QueryGroup, WorkloadConfig, WorkloadError};

use super::driver::{Driver, DriverError, QueryRequest};

/// Response-time statistics over a set of durations.
///
/// `global` is the sum, `avg` the mean, and `stddev` the population standard
/// deviation (divisor n, not n−1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub global: Duration,
    pub avg: Duration,
    pub min: Duration,
    pub max: Duration,
    pub stddev: Duration,
}

/// Computes [`Stats`] over `durations`; an empty slice has no statistics.
pub fn compute_stats(durations: &[Duration]) -> Option<Stats> {
    if durations.is_empty() {
        return None;
    }
    let n = durations.len() as u32;
    let global: Duration = durations.iter().sum();
    let avg = global / n;
    let min = *durations.iter().min().expect("non-empty");
    let max = *durations.iter().max().expect("non-empty");
    let mean = global.as_secs_f64() / f64::from(n);
    let var = durations
        .iter()
        .map(|d| {
            let x = d.as_secs_f64() - mean;
            x * x
        })
        .sum::<f64>()
        / f64::from(n);
    let stddev = Duration::from_secs_f64(var.sqrt());
    Some(Stats { global, avg, min, max, stddev })
}

/// Whether an execution was the buffer-filling first run or a repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Cold,
    Warm,
}

impl RunKind {
    pub fn label(self) -> &'static str {
        match self {
            RunKind::Cold => "cold",
            RunKind::Warm => "warm",
        }
    }
}

/// Outcome of one execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    TimedOut,
    Error(String),
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::TimedOut => "timed-out",
            RunStatus::Error(_) => "error",
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, RunStatus::Ok)
    }
}

/// One timed execution. `offset` is measured from the start of the whole
/// performance test, so the protocol's ordering is auditable from the report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryExecution {
    pub kind: RunKind,
    /// 0 for the cold run, then 1..=nrun for warm runs.
    pub index: u32,
    pub offset: Duration,
    pub duration: Duration,
    pub status: RunStatus,
}

/// Everything recorded for one query: its raw executions and the statistics
/// over the executions that completed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRuns {
    pub query: String,
    pub block: String,
    pub executions: Vec<QueryExecution>,
    pub stats: Option<Stats>,
}

impl QueryRuns {
    /// Durations of completed executions, the statistics input.
    pub fn ok_durations(&self) -> Vec<Duration> {
        self.executions.iter().filter(|e| e.status.is_ok()).map(|e| e.duration).collect()
    }
}

/// Statistics over every completed execution of one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStats {
    pub block: String,
    pub stats: Stats,
}

/// Execution environment echoed into reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvInfo {
    pub timestamp: String,
    pub toolkit_version: String,
    pub os: String,
    pub arch: String,
    /// Measurement caveat: the harness orders cold before warm but cannot
    /// control an external backend's cache state.
    pub cache_caveat: String,
    pub notes: Option<String>,
}

impl EnvInfo {
    pub fn capture() -> Self {
        EnvInfo {
            timestamp: chrono::Utc::now().to_rfc3339(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            cache_caveat: "cold/warm reflects harness ordering only; backend cache state is \
                           not controlled"
                .to_string(),
            notes: None,
        }
    }
}

/// One document shipped during the load test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocLoad {
    pub name: String,
    pub bytes: usize,
    pub duration: Duration,
}

/// Timing of a completed (or aborted) load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub driver: String,
    /// Documents acknowledged by the backend, in ship order.
    pub docs: Vec<DocLoad>,
    pub total: Duration,
    pub complete: bool,
}

/// A load aborted mid-way; the partial report covers the documents that were
/// acknowledged before the failure.
#[derive(Debug, Error)]
#[error("loading {doc:?} failed: {source}")]
pub struct LoadError {
    pub doc: String,
    #[source]
    pub source: DriverError,
    pub partial: LoadReport,
}

/// Ships all documents in load order (model, dimensions, facts), timing each
/// acknowledgement; a rejection aborts the load.
pub fn load_test(
    drv: &mut dyn Driver,
    docs: &WarehouseDocuments,
) -> Result<LoadReport, LoadError> {
    let mut report =
        LoadReport { driver: drv.id(), docs: Vec::new(), total: Duration::ZERO, complete: false };
    for doc in docs.in_load_order() {
        let start = Instant::now();
        if let Err(source) = drv.load_document(doc) {
            return Err(LoadError { doc: doc.name.clone(), source, partial: report });
        }
        let duration = start.elapsed();
        report.total += duration;
        report.docs.push(DocLoad { name: doc.name.clone(), bytes: doc.bytes.len(), duration });
    }
    report.complete = true;
    Ok(report)
}

/// The full benchmark record: environment, configuration echo, optional load
/// timing, raw per-query executions, and derived statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub env: EnvInfo,
    pub driver: String,
    /// Enabled block codes, in execution order.
    pub blocks: Vec<String>,
    pub nrun: u32,
    pub timeout: Duration,
    pub load: Option<LoadReport>,
    /// Fact count of the benchmarked warehouse when known; the x-axis of
    /// size-versus-time series.
    #[serde(default)]
    pub warehouse_facts: Option<u64>,
    pub queries: Vec<QueryRuns>,
    pub block_stats: Vec<BlockStats>,
    /// Statistics over every completed execution, absent if none completed.
    pub overall: Option<Stats>,
    /// Verification verdicts, present when the run was verified.
    #[serde(default)]
    pub verdicts: Option<Vec<super::verify::QueryVerdict>>,
}

/// Runs the enabled blocks in order: per query one cold execution, then
/// `wc.nrun` warm executions, each bounded by `wc.timeout`. A timeout or
/// driver fault marks that execution and the run continues.
pub fn performance_test(
    drv: &mut dyn Driver,
    wc: &WorkloadConfig,
    m: &WarehouseModel,
    env: EnvInfo,
) -> Result<RunReport, WorkloadError> {
    let workload = build_workload(wc)?;
    let blocks: Vec<String> =
        QueryGroup::all().iter().filter(|g| wc.enabled(**g)).map(|g| g.code().to_string()).collect();

    let suite_start = Instant::now();
    let mut queries = Vec::with_capacity(workload.len());
    for spec in workload {
        let block = spec.group.code().to_string();
        let query = spec.id.to_string();
        let req = QueryRequest::new(spec, m, wc.timeout);
        let mut executions = Vec::with_capacity(1 + wc.nrun as usize);
        executions.push(run_once(drv, &req, suite_start, RunKind::Cold, 0));
        for i in 1..=wc.nrun {
            executions.push(run_once(drv, &req, suite_start, RunKind::Warm, i));
        }
        let runs = QueryRuns { query, block, executions, stats: None };
        let stats = compute_stats(&runs.ok_durations());
        queries.push(QueryRuns { stats, ..runs });
    }

    let block_stats = blocks
        .iter()
        .filter_map(|b| {
            let durations: Vec<Duration> = queries
                .iter()
                .filter(|q| &q.block == b)
                .flat_map(QueryRuns::ok_durations)
                .collect();
            compute_stats(&durations).map(|stats| BlockStats { block: b.clone(), stats })
        })
        .collect();
    let all: Vec<Duration> = queries.iter().flat_map(QueryRuns::ok_durations).collect();
    let overall = compute_stats(&all);

    Ok(RunReport {
        env,
        driver: drv.id(),
        blocks,
        nrun: wc.nrun,
        timeout: wc.timeout,
        load: None,
        warehouse_facts: None,
        queries,
        block_stats,
        overall,
        verdicts: None,
    })
}

fn run_once(
    drv: &mut dyn Driver,
    req: &QueryRequest,
    suite_start: Instant,
    kind: RunKind,
    index: u32,
) -> QueryExecution {
    let offset = suite_start.elapsed();
    let start = Instant::now();
    let status = match drv.execute_query(req) {
        Ok(_) => RunStatus::Ok,
        Err(DriverError::Timeout) => RunStatus::TimedOut,
        Err(e) => RunStatus::Error(e.to_string()),
    };
    QueryExecution { kind, index, offset, duration: start.elapsed(), status }
}
