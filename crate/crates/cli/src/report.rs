use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One record per invocation, written to stderr as a JSON line.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// sha256 over the arguments and the bytes of every input file.
    pub inputs_digest: String,
    /// Files written, or `stdout`.
    pub outputs: Vec<String>,
    pub wall_time_ms: f64,
    pub engine_version: &'static str,
    pub exit_code: u8,
    pub finished_at_unix_ms: u128,
}

pub fn digest(args: &[String], inputs: &[&Path]) -> String {
    let mut h = Sha256::new();
    for a in args {
        h.update(a.as_bytes());
        h.update([0]);
    }
    for p in inputs {
        h.update(p.to_string_lossy().as_bytes());
        h.update([0]);
        // unreadable inputs are reported by the command itself
        if let Ok(bytes) = std::fs::read(p) {
            h.update(&bytes);
        }
        h.update([0]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn new(
        command: &str,
        inputs_digest: String,
        outputs: Vec<String>,
        elapsed: Duration,
        exit_code: u8,
    ) -> Self {
        Self {
            command: command.to_string(),
            inputs_digest,
            outputs,
            wall_time_ms: elapsed.as_secs_f64() * 1e3,
            engine_version: intervene_core::VERSION,
            exit_code,
            finished_at_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_millis()),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
