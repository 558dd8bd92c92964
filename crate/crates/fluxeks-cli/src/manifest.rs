//! Run manifests: a small JSON sidecar written next to every output
//! artifact, recording exactly what produced it.
//!
//! Timestamps live only here. The artifacts themselves are byte-identical
//! across runs with the same manifest content (minus the timestamp fields).

use fluxeks::hash::fnv1a_hex;
use serde_json::json;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub struct RunManifest {
    command: String,
    config: serde_json::Value,
    inputs: Vec<(String, String)>,
    seeds: Vec<u64>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seeds: &[u64]) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            seeds: seeds.to_vec(),
        }
    }

    /// Record an input file and its content hash.
    pub fn add_input(&mut self, label: &str, path: &Path) {
        let hash = std::fs::read(path)
            .map(|bytes| format!("{:016x}", fluxeks::hash::fnv1a(&bytes)))
            .unwrap_or_else(|_| "unreadable".to_string());
        self.inputs.push((format!("{label}:{}", path.display()), hash));
    }

    /// Record an in-memory input by its serialized form.
    pub fn add_inline_input(&mut self, label: &str, content: &str) {
        self.inputs.push((label.to_string(), fnv1a_hex(content)));
    }

    /// Write `<output>.manifest.json` next to the given output artifact.
    pub fn write_for(&self, output: &Path) -> std::io::Result<()> {
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let doc = json!({
            "tool": "fluxeks",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs.iter().map(|(k, v)| json!({"input": k, "fnv1a": v})).collect::<Vec<_>>(),
            "seeds": self.seeds,
            "host": {
                "os": std::env::consts::OS,
                "arch": std::env::consts::ARCH,
                "cores": std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            },
            "timestamp_epoch_s": ts,
        });
        let path = manifest_path(output);
        std::fs::write(path, serde_json::to_string_pretty(&doc).expect("manifest serializes"))
    }
}

pub fn manifest_path(output: &Path) -> std::path::PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}
