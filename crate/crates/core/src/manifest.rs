//! Run manifests: enough provenance to regenerate an output byte for byte.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const GIT_REV: &str = env!("NOMA_META_GIT_REV");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub provenance: String,
    pub command: String,
    pub seed: Option<u64>,
    /// SHA-256 of the canonical JSON of the effective configuration.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, seed: Option<u64>, config: &C) -> Result<Self> {
        let config = serde_json::to_value(config)
            .map_err(|e| Error::Domain(format!("unserializable config: {e}")))?;
        Ok(Self {
            tool: "noma-meta".into(),
            version: VERSION.into(),
            provenance: format!("noma-meta {VERSION} ({GIT_REV})"),
            command: command.into(),
            seed,
            config_hash: config_hash(&config),
            config,
            outputs: Vec::new(),
        })
    }

    pub fn to_json(&self) -> String {
        // Serializing plain data cannot fail.
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

/// Hex SHA-256 of a JSON value; object keys are sorted by serde_json's map.
pub fn config_hash(config: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(config).expect("json value serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
