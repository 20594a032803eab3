//! The backend driver contract and the built-in reference driver.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::codec::{parse_warehouse, CodecError, NamedDoc, WarehouseDocuments, MODEL_DOC_NAME};
use crate::engine::{evaluate_with_deadline, EngineError, QueryResult};
use crate::model::WarehouseModel;
use crate::warehouse::Warehouse;
use crate::workload::{QueryId, QuerySpec};

#[derive(Debug, Error)]
pub enum DriverError {
    /// The backend received the request and refused it.
    #[error("backend rejected the request: {0}")]
    Rejected(String),
    /// The backend could not be reached at all.
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    /// The request ran past its allotted time.
    #[error("request timed out")]
    Timeout,
}

/// One query execution request, carrying both the structured spec (for
/// drivers that evaluate natively) and the rendered XQuery text (for drivers
/// that ship text to an external processor).
#[derive(Debug, Clone)]
pub struct QueryRequest {
    pub id: QueryId,
    pub spec: QuerySpec,
    pub xquery: String,
    pub timeout: Duration,
}

impl QueryRequest {
    /// Builds the request for `spec` against a warehouse described by `m`,
    /// rendering the XQuery form once.
    pub fn new(spec: QuerySpec, m: &WarehouseModel, timeout: Duration) -> Self {
        let xquery = crate::workload::render_xquery(&spec, m);
        QueryRequest { id: spec.id, spec, xquery, timeout }
    }
}

/// What a backend hands back for a query.
#[derive(Debug, Clone, PartialEq)]
pub enum QueryPayload {
    /// Typed rows in the engine's result shape; comparable to the reference.
    Rows(QueryResult),
    /// An uninterpreted response body; timed but never verified.
    Opaque(String),
}

impl QueryPayload {
    pub fn rows(&self) -> Option<&QueryResult> {
        match self {
            QueryPayload::Rows(r) => Some(r),
            QueryPayload::Opaque(_) => None,
        }
    }
}

/// Behavioral contract every benchmarked backend implements.
///
/// The harness clock brackets each `execute_query` call, so implementations
/// must stay synchronous: return only once the backend's answer (or failure)
/// is fully in hand.
pub trait Driver {
    /// Stable identifier echoed into reports.
    fn id(&self) -> String;

    /// True when `execute_query` yields [`QueryPayload::Rows`] suitable for
    /// verification against the reference engine.
    fn comparable_rows(&self) -> bool;

    /// Ships one document to the backend; returning `Ok` acknowledges that
    /// the backend accepted and ingested it.
    fn load_document(&mut self, doc: &NamedDoc) -> Result<(), DriverError>;

    fn execute_query(&mut self, req: &QueryRequest) -> Result<QueryPayload, DriverError>;

    /// Drops loaded state so the next load starts from scratch.
    fn reset(&mut self) -> Result<(), DriverError>;
}

/// In-process backend over the reference engine.
///
/// Documents are parsed as they arrive and the warehouse is assembled as
/// soon as every document the model names is present, so load time reflects
/// real ingestion work and the warehouse is queryable the moment the load
/// completes.
#[derive(Debug, Default)]
pub struct ReferenceDriver {
    docs: Vec<NamedDoc>,
    warehouse: Option<Warehouse>,
}

impl ReferenceDriver {
    pub fn new() -> Self {
        Self::default()
    }

    /// The assembled warehouse, if loading is complete.
    pub fn warehouse(&self) -> Option<&Warehouse> {
        self.warehouse.as_ref()
    }

    fn store(&mut self, doc: &NamedDoc) {
        match self.docs.iter_mut().find(|d| d.name == doc.name) {
            Some(slot) => *slot = doc.clone(),
            None => self.docs.push(doc.clone()),
        }
        self.warehouse = None;
    }

    fn find(&self, name: &str) -> Option<&NamedDoc> {
        self.docs.iter().find(|d| d.name == name)
    }

    /// Validates one document in isolation, classifying it by root element
    /// so documents may arrive in any order.
    fn validate(doc: &NamedDoc) -> Result<(), CodecError> {
        match root_element(&doc.bytes)?.as_str() {
            "xweb-dw-model" => crate::codec::parse_model(&doc.bytes).map(drop),
            "dimension" => crate::codec::parse_dimension(&doc.bytes).map(drop),
            "facts" => {
                let mut warnings = Vec::new();
                crate::codec::parse_facts(&doc.bytes, &mut warnings).map(drop)
            }
            other => Err(CodecError::UnsupportedModel(format!(
                "unrecognized document root <{other}>"
            ))),
        }
    }

    /// Assembles the warehouse if every document the model names is present.
    fn try_assemble(&mut self) -> Result<(), DriverError> {
        let Some(model_doc) = self.find(MODEL_DOC_NAME) else { return Ok(()) };
        let model = crate::codec::parse_model(&model_doc.bytes)
            .map_err(|e| DriverError::Rejected(e.to_string()))?;
        let mut dimensions = Vec::new();
        for d in &model.dimensions {
            match self.find(&d.path) {
                Some(doc) => dimensions.push(doc.clone()),
                None => return Ok(()),
            }
        }
        let Some(facts) = self.find(&model.fact.path) else { return Ok(()) };
        let docs = WarehouseDocuments {
            model: model_doc.clone(),
            dimensions,
            facts: facts.clone(),
        };
        let (w, _warnings) =
            parse_warehouse(&docs).map_err(|e| DriverError::Rejected(e.to_string()))?;
        self.warehouse = Some(w);
        Ok(())
    }
}

impl Driver for ReferenceDriver {
    fn id(&self) -> String {
        "reference".to_string()
    }

    fn comparable_rows(&self) -> bool {
        true
    }

    fn load_document(&mut self, doc: &NamedDoc) -> Result<(), DriverError> {
        Self::validate(doc).map_err(|e| {
            DriverError::Rejected(format!("document {:?} rejected: {e}", doc.name))
        })?;
        self.store(doc);
        self.try_assemble()
    }

    fn execute_query(&mut self, req: &QueryRequest) -> Result<QueryPayload, DriverError> {
        let w = self
            .warehouse
            .as_ref()
            .ok_or_else(|| DriverError::Rejected("warehouse not loaded".to_string()))?;
        let deadline = Instant::now() + req.timeout;
        match evaluate_with_deadline(w, &req.spec, Some(deadline)) {
            Ok(rows) => Ok(QueryPayload::Rows(rows)),
            Err(EngineError::Timeout { .. }) => Err(DriverError::Timeout),
            Err(e @ EngineError::Overflow { .. }) => Err(DriverError::Rejected(e.to_string())),
        }
    }

    fn reset(&mut self) -> Result<(), DriverError> {
        self.docs.clear();
        self.warehouse = None;
        Ok(())
    }
}

/// Name of a document's root element.
fn root_element(bytes: &[u8]) -> Result<String, CodecError> {
    let mut r = quick_xml::Reader::from_reader(bytes);
    let mut buf = Vec::new();
    loop {
        match r.read_event_into(&mut buf) {
            Ok(quick_xml::events::Event::Start(e)) | Ok(quick_xml::events::Event::Empty(e)) => {
                return Ok(String::from_utf8_lossy(e.name().as_ref()).into_owned());
            }
            Ok(quick_xml::events::Event::Eof) => {
                return Err(CodecError::Malformed {
                    offset: r.buffer_position(),
                    message: "document has no root element".to_string(),
                });
            }
            Ok(_) => {}
            Err(e) => {
                return Err(CodecError::Xml {
                    offset: r.buffer_position(),
                    message: e.to_string(),
                });
            }
        }
        buf.clear();
    }
}
