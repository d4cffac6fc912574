use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use polylab::process::Constants;
use polylab::{Error, Result};

/// Provenance of a run. `config` is kept verbatim so that `config_hash`
/// can be recomputed when the manifest is loaded.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub timestamp: String,
    pub root_seed: u64,
    pub constants: Constants,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
}

pub fn hash_config(config: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(config).expect("json value serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(config: serde_json::Value, root_seed: u64, constants: Constants, outputs: Vec<String>) -> Self {
        RunManifest {
            config_hash: hash_config(&config),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            root_seed,
            constants,
            outputs,
            config,
        }
    }

    /// Parses a manifest and checks its hash against the embedded config.
    pub fn load(text: &str) -> Result<Self> {
        let m: RunManifest = serde_json::from_str(text)?;
        let h = hash_config(&m.config);
        if h != m.config_hash {
            return Err(Error::PreconditionViolated(format!(
                "manifest hash mismatch: stored {}, recomputed {h}",
                m.config_hash
            )));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
