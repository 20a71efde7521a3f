//! Output files. Every artifact starts with the same provenance block:
//! `#` comment lines in CSV, a `meta` object in JSON.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Meta {
    pub fn pairs(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("tool".to_string(), self.tool.to_string()),
            ("version".to_string(), self.version.to_string()),
            ("command".to_string(), self.command.clone()),
            ("config_sha256".to_string(), self.config_sha256.clone()),
            ("seed".to_string(), self.seed.to_string()),
        ])
    }
}

pub struct OutDir {
    root: PathBuf,
    pub meta: Meta,
}

impl OutDir {
    pub fn create(root: &Path, meta: Meta) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            meta,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    /// Header row plus serialized records.
    pub fn write_csv<R: Serialize>(
        &self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = R>,
    ) -> Result<PathBuf> {
        let mut buf = String::new();
        for (k, v) in self.meta.pairs() {
            buf.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        let wrap = |e: csv::Error| CliError::Artifact(format!("{name}: {e}"));
        w.write_record(header).map_err(wrap)?;
        for r in rows {
            w.serialize(r).map_err(wrap)?;
        }
        let body = w
            .into_inner()
            .map_err(|e| CliError::Artifact(format!("{name}: {e}")))?;
        buf.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        self.write_text(name, &buf)
    }

    /// `{"meta": ..., "data": ...}`, pretty-printed with a trailing newline.
    pub fn write_json<T: Serialize>(&self, name: &str, data: &T) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            meta: &'a Meta,
            data: &'a T,
        }
        let mut text = serde_json::to_string_pretty(&Doc {
            meta: &self.meta,
            data,
        })
        .map_err(|e| CliError::Artifact(format!("{name}: {e}")))?;
        text.push('\n');
        self.write_text(name, &text)
    }
}
