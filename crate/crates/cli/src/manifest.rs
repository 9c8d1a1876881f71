use std::collections::BTreeMap;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const RNG_NAME: &str = "ChaCha8, one stream per trial";

/// Identity of a run: the resolved configuration and the tool version.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub config: BTreeMap<String, String>,
    pub version: &'static str,
    pub hash: String,
}

impl Manifest {
    pub fn new(cfg: &RunConfig) -> Self {
        let version = env!("CARGO_PKG_VERSION");
        let mut h = Sha256::new();
        h.update(format!("gkdv {version}\n"));
        h.update(cfg.to_text());
        Self {
            config: cfg.echo.clone(),
            version,
            hash: hex::encode(h.finalize()),
        }
    }

    pub fn to_json(&self) -> String {
        let v = json!({
            "tool": "gkdv",
            "version": self.version,
            "rng": RNG_NAME,
            "seed": self.config["seed"],
            "config": self.config,
            "hash": self.hash,
        });
        serde_json::to_string_pretty(&v).expect("manifest is serialisable") + "\n"
    }

    /// First line of every CSV artifact.
    pub fn csv_preamble(&self) -> Vec<String> {
        vec![format!("manifest_hash={}", self.hash)]
    }

    /// Wrap a report so that it names the manifest it belongs to.
    pub fn wrap(&self, report: Value) -> String {
        let v = json!({ "manifest_hash": self.hash, "report": report });
        serde_json::to_string_pretty(&v).expect("report is serialisable") + "\n"
    }
}
