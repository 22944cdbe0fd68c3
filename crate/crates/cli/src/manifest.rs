use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Serialize, Debug)]
pub struct Versions {
    pub frogbound: &'static str,
    pub cli: &'static str,
}

/// Record of one invocation. Timestamps are seconds since the Unix epoch.
#[derive(Serialize, Debug)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub started_at: f64,
    pub finished_at: Option<f64>,
    pub outputs: Vec<String>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(command: &str, argv: Vec<String>, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            args: argv,
            seed,
            versions: Versions { frogbound: frogbound::VERSION, cli: env!("CARGO_PKG_VERSION") },
            started_at: now(),
            finished_at: None,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self, outputs: &[PathBuf]) {
        self.finished_at = Some(now());
        self.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("serializable") + "\n")
    }
}
