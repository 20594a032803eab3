//! The three XML document formats: the warehouse model document, one
//! dimension document per dimension, and the fact document.
//!
//! Emission is deterministic byte for byte; the fact emitter streams with
//! constant memory. Parsing is the inverse, with a strict posture for model
//! and dimension documents and a lenient one for facts, where missing slots,
//! shuffled children, unknown elements and dangling references are data (or
//! warnings), not errors.

mod emit;
mod parse;

pub use emit::{
    customer_level_data, date_level_data, emit_dimension, emit_facts, emit_model, emit_warehouse,
    part_level_data, supplier_level_data, XmlFactWriter,
};
pub use parse::{parse_dimension, parse_facts, parse_model, parse_warehouse, ParsedDimension};

use thiserror::Error;

use crate::fact::Slot;
use crate::taxonomy::TaxonomyError;

/// Name of the model document; the other five names live in the model itself.
pub const MODEL_DOC_NAME: &str = "dw-model.xml";

/// One document, as shipped to a backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedDoc {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// The complete six-document warehouse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarehouseDocuments {
    pub model: NamedDoc,
    pub dimensions: Vec<NamedDoc>,
    pub facts: NamedDoc,
}

impl WarehouseDocuments {
    /// Documents in load order: model, dimensions, facts.
    pub fn in_load_order(&self) -> Vec<&NamedDoc> {
        let mut v = vec![&self.model];
        v.extend(self.dimensions.iter());
        v.push(&self.facts);
        v
    }

    /// Writes every document into `dir` under its own name.
    pub fn write_dir(&self, dir: &std::path::Path) -> std::io::Result<()> {
        for doc in self.in_load_order() {
            std::fs::write(dir.join(&doc.name), &doc.bytes)?;
        }
        Ok(())
    }

    /// Loads a warehouse directory: reads `dw-model.xml`, then the documents
    /// the model names.
    pub fn read_dir(dir: &std::path::Path) -> Result<Self, CodecError> {
        let model_bytes = std::fs::read(dir.join(MODEL_DOC_NAME))?;
        let model = parse::parse_model(&model_bytes)?;
        let mut dimensions = Vec::new();
        for d in &model.dimensions {
            let bytes = std::fs::read(dir.join(&d.path))?;
            dimensions.push(NamedDoc { name: d.path.clone(), bytes });
        }
        let facts = NamedDoc {
            name: model.fact.path.clone(),
            bytes: std::fs::read(dir.join(&model.fact.path))?,
        };
        Ok(WarehouseDocuments {
            model: NamedDoc { name: MODEL_DOC_NAME.to_string(), bytes: model_bytes },
            dimensions,
            facts,
        })
    }
}

/// One hierarchy level's worth of instance data, the generic form dimension
/// documents are emitted from and parsed into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelData {
    pub level: String,
    pub instances: Vec<InstanceData>,
}

/// A member instance: structural id, parent references into the next coarser
/// level(s), and the declared member attributes in document order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InstanceData {
    pub id: String,
    pub parents: Vec<String>,
    pub attrs: Vec<(String, String)>,
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("XML error at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("malformed document at byte {offset}: {message}")]
    Malformed { offset: u64, message: String },
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),
    #[error("dimension {dimension:?} level {level:?}: instance {instance:?} references missing parent {parent:?}")]
    Orphan { dimension: String, level: String, instance: String, parent: String },
    #[error("dimension {dimension:?} level {level:?}: instance {instance:?} lacks a parent reference")]
    MissingParentRef { dimension: String, level: String, instance: String },
    #[error("dimension {dimension:?} level {level:?}: instance {instance:?} lacks attribute {attr:?}")]
    MissingAttr { dimension: String, level: String, instance: String, attr: &'static str },
    #[error("dimension {dimension:?} level {level:?}: instance {instance:?} has bad value {text:?} for {attr:?}")]
    BadValue { dimension: String, level: String, instance: String, attr: &'static str, text: String },
    #[error("model expects document {name:?} but it is missing")]
    MissingDocument { name: String },
    #[error("document {actual:?} does not match the model path {expected:?}")]
    PathMismatch { expected: String, actual: String },
    #[error("model not supported by the in-memory warehouse: {0}")]
    UnsupportedModel(String),
    #[error("category taxonomy in documents is invalid")]
    Taxonomy(#[from] TaxonomyError),
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Non-fatal findings from lenient fact parsing and reference resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// A fact carried an element that is not one of the six slots.
    UnknownFactChild { fact_index: u64, name: String },
    /// A slot element carried unparseable text; the slot is treated missing.
    BadSlotValue { fact_index: u64, name: String, text: String },
    /// A present dimension reference resolves to no member.
    DanglingReference { fact_index: u64, slot: Slot, key: i64 },
}
