//! The JSON report emitted by every command: a stable schema with an input
//! digest, the command parameters, the results, residuals, and a status.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const STATUS_OK: &str = "ok";
pub const STATUS_VIOLATIONS: &str = "violations";
pub const STATUS_MISMATCH: &str = "mismatch";

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub params: Value,
    pub results: Value,
    pub residuals: Value,
    pub status: String,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// sha256 over the raw input bytes and the canonical parameter string.
pub fn digest(input_bytes: &[u8], param_string: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(input_bytes);
    hasher.update(param_string.as_bytes());
    let out = hasher.finalize();
    let hex: String = out.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}
