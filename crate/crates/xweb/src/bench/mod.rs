//! The benchmark harness: a backend [`Driver`] contract, the load / cold /
//! warm execution protocol with response-time statistics, result
//! verification against the reference engine, and report serialization.
//!
//! Queries run strictly serially on one driver so timings are not polluted
//! by contention; benchmark several backends concurrently only from separate
//! harness instances.

mod driver;
mod http;
mod mock;
mod protocol;
mod report;
mod verify;

pub use driver::{Driver, DriverError, QueryPayload, QueryRequest, ReferenceDriver};
pub use http::{HttpConfigError, HttpDriver, HttpDriverConfig};
pub use mock::{CannedResponse, MockBackend};
pub use protocol::{
    compute_stats, load_test, performance_test, BlockStats, DocLoad, EnvInfo, LoadError,
    LoadReport, QueryExecution, QueryRuns, RunKind, RunReport, RunStatus, Stats,
};
pub use report::{read_json, to_flat_csv, to_json_string, write_json, ReportError};
pub use verify::{verify_backend, QueryVerdict, Verdict};
