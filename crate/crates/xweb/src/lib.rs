//! XML data warehouse benchmark toolkit.
//!
//! The crate is organised around one pipeline:
//!
//! * [`model`] — snowflake warehouse metadata (dimensions, levels, fact schema),
//! * [`taxonomy`] — the complex part/category hierarchy,
//! * [`datagen`] — deterministic, seeded generation of dimension members and facts,
//! * [`codec`] — the XML document formats (emission is byte-exact, parsing is tolerant),
//! * [`warehouse`] — an in-memory warehouse instance assembled from documents,
//! * [`workload`] — the twenty-query benchmark workload and its XQuery rendering,
//! * [`engine`] — a reference evaluator (plus a brute-force oracle used by tests),
//! * [`bench`] — the load/cold/warm benchmark protocol, drivers and reporting.

pub mod bench;
pub mod codec;
pub mod datagen;
pub mod engine;
pub mod fact;
pub mod model;
pub mod taxonomy;
pub mod value;
pub mod warehouse;
pub mod workload;
