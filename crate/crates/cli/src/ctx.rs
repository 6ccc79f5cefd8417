//! Run plumbing shared by every subcommand: merging flags over an optional
//! `key=value` config file, recording the resolved inputs, and writing the
//! outputs plus a `manifest.json` into the chosen directory.
//!
//! Resolution order for every input is flag, then config entry under the
//! flag's long name, then the subcommand's default. The manifest records the
//! post-merge values, so two runs with the same effective inputs produce
//! byte-identical manifests regardless of how the values were supplied.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// Error class that maps to process exit code 2 (invalid or degenerate
/// input); everything else exits 1.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// Wrap a message as an input error.
pub fn bad_input(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.into()))
}

/// State threaded through one subcommand run.
#[derive(Debug)]
pub struct RunContext {
    command: &'static str,
    cfg: BTreeMap<String, String>,
    inputs: BTreeMap<String, Value>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl RunContext {
    pub fn new(
        command: &'static str,
        config: Option<&Path>,
        out: Option<&str>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let cfg = match config {
            Some(path) => parse_config(path)?,
            None => BTreeMap::new(),
        };
        let out_dir = match out {
            Some(dir) => PathBuf::from(dir),
            None => PathBuf::from(cfg.get("out").map_or(".", String::as_str)),
        };
        let seed = match seed {
            Some(s) => s,
            None => match cfg.get("seed") {
                Some(raw) => raw
                    .parse()
                    .map_err(|_| bad_input(format!("config seed '{raw}' is not an integer")))?,
                None => 0,
            },
        };
        fs::create_dir_all(&out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(RunContext {
            command,
            cfg,
            inputs: BTreeMap::new(),
            out_dir,
            seed,
        })
    }

    /// Flag value if given, else the config entry under `key`. The resolved
    /// value is recorded for the manifest.
    pub fn resolve(&mut self, key: &str, flag: Option<String>) -> Option<String> {
        let value = flag.or_else(|| self.cfg.get(key).cloned());
        if let Some(v) = &value {
            self.inputs.insert(key.to_string(), json!(v));
        }
        value
    }

    /// Like [`resolve`](Self::resolve) but the input must be present.
    pub fn resolve_required(&mut self, key: &str, flag: Option<String>) -> Result<String> {
        self.resolve(key, flag)
            .ok_or_else(|| bad_input(format!("missing required input --{key}")))
    }

    /// Like [`resolve`](Self::resolve) but falls back to `default`, which is
    /// recorded in the manifest like an explicit value.
    pub fn resolve_or(&mut self, key: &str, flag: Option<String>, default: &str) -> String {
        match self.resolve(key, flag) {
            Some(v) => v,
            None => {
                self.inputs.insert(key.to_string(), json!(default));
                default.to_string()
            }
        }
    }

    /// Record an extra manifest entry that is not a flag.
    pub fn record(&mut self, key: &str, value: Value) {
        self.inputs.insert(key.to_string(), value);
    }

    pub fn write_json(&self, name: &str, value: &Value) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    /// Write `manifest.json` describing this run. Call once, after the
    /// subcommand's outputs have been written.
    pub fn finish(&self) -> Result<()> {
        let manifest = json!({
            "command": self.command,
            "inputs": self.inputs,
            "seed": self.seed,
            "versions": {
                "nfpe-lie": nfpe_lie::VERSION,
                "nfpe-lie-cli": env!("CARGO_PKG_VERSION"),
            },
        });
        self.write_json("manifest.json", &manifest)?;
        Ok(())
    }
}

/// Parse a line-oriented `key=value` file. Blank lines and lines starting
/// with `#` are skipped; whitespace around keys and values is trimmed.
fn parse_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| bad_input(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            bad_input(format!(
                "config line {} is not key=value: '{line}'",
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
