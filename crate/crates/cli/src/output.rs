//! Output destinations and the manifest sidecar.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context as _;
use serde::Serialize;

pub struct Context {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub input: Option<String>,
    pub output: String,
    pub config: C,
    pub version: &'static str,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

impl Context {
    /// Writes `body` to `--out` (with its manifest) or to stdout.
    pub fn emit<C: Serialize>(&self, command: &str, input: Option<&Path>, config: C, body: &str) -> anyhow::Result<()> {
        match &self.out {
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(body.as_bytes())?;
                stdout.flush()?;
            }
            Some(path) => {
                fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
                let manifest = RunManifest {
                    command,
                    input: input.map(|p| p.display().to_string()),
                    output: path.display().to_string(),
                    config,
                    version: env!("CARGO_PKG_VERSION"),
                    timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                };
                let mpath = manifest_path(path);
                let text = serde_json::to_string_pretty(&manifest)?;
                fs::write(&mpath, text + "\n").with_context(|| format!("writing {}", mpath.display()))?;
            }
        }
        Ok(())
    }
}

/// Rounds to ten significant digits so JSON numbers print at that precision.
pub fn round10(x: f64) -> f64 {
    dirstep::format::sig10(x).parse().unwrap_or(x)
}
