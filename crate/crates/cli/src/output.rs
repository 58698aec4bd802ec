//! Output files stamped with the configuration hash, master seed and version.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance triple recorded in every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl Meta {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Meta {
            command: command.into(),
            config_hash: config_hash(config),
            seed: config.seed,
            version: VERSION.into(),
        }
    }

    /// Comment lines placed above CSV and text bodies.
    pub fn header(&self) -> String {
        format!(
            "# spamtomo {}\n# command: {}\n# config_hash: {}\n# seed: {}\n",
            self.version, self.command, self.config_hash, self.seed
        )
    }
}

/// SHA-256 of the compact JSON serialization of the resolved configuration,
/// with the output directory cleared.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut keyed = config.clone();
    keyed.out.clear();
    let text = serde_json::to_string(&keyed).expect("configuration serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

/// Sequential writer rooted at the output directory.
pub struct OutputDir {
    root: PathBuf,
    meta: Meta,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, meta: Meta) -> anyhow::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            meta,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn finish(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        let path = self.root.join(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(bytes)?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// `{"meta": ..., <fields of body>}`, pretty-printed.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> anyhow::Result<PathBuf> {
        let stamped = Stamped {
            meta: &self.meta,
            body,
        };
        let mut text = serde_json::to_string_pretty(&stamped)?;
        text.push('\n');
        self.finish(name, text.as_bytes())
    }

    /// Header comment lines followed by one CSV record per row.
    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> anyhow::Result<PathBuf> {
        let mut bytes = self.meta.header().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        self.finish(name, &bytes)
    }

    pub fn text(&mut self, name: &str, body: &str) -> anyhow::Result<PathBuf> {
        let text = format!("{}{}", self.meta.header(), body);
        self.finish(name, text.as_bytes())
    }
}
