//! Reproducibility envelopes: digests and parameter echoes written next to
//! generated documents and run reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use xweb::codec::WarehouseDocuments;
use xweb::datagen::GenParams;
use xweb::workload::WorkloadConfig;

/// File written by `generate` into the warehouse directory.
pub const GEN_MANIFEST: &str = "manifest.json";
/// File written by `run` into the report directory.
pub const RUN_MANIFEST: &str = "run-manifest.json";

/// Echo of a generation: the exact parameters and the byte-level digests of
/// the six documents they produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationManifest {
    pub toolkit_version: String,
    pub params: GenParams,
    pub facts_emitted: u64,
    /// SHA-256 of each document, keyed by file name.
    pub digests: BTreeMap<String, String>,
}

/// Echo of a benchmark run: which driver saw which documents under which
/// workload configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub driver: String,
    pub workload: WorkloadConfig,
    pub digests: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn document_digests(docs: &WarehouseDocuments) -> BTreeMap<String, String> {
    docs.in_load_order()
        .into_iter()
        .map(|d| (d.name.clone(), sha256_hex(&d.bytes)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_the_reference_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn digests_cover_all_six_documents() {
        use xweb::codec::NamedDoc;
        let mk = |name: &str| NamedDoc { name: name.to_string(), bytes: name.as_bytes().to_vec() };
        let docs = WarehouseDocuments {
            model: mk("dw-model.xml"),
            dimensions: vec![mk("d_date.xml"), mk("d_part.xml"), mk("d_cust.xml"), mk("d_supp.xml")],
            facts: mk("f_sale.xml"),
        };
        let digests = document_digests(&docs);
        assert_eq!(digests.len(), 6);
        assert!(digests.contains_key("f_sale.xml"));
        assert_eq!(digests["dw-model.xml"], sha256_hex(b"dw-model.xml"));
    }
}
