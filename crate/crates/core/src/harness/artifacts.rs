use std::io::Write;
use std::path::{Path, PathBuf};

use super::HarnessError;

/// Column (CSV) or field (JSON) carrying the config digest.
pub(crate) const DIGEST_KEY: &str = "config_digest";

/// A file to write, relative to the run's output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    /// CSV with the digest appended as a final column on every row.
    pub(crate) fn csv(name: &str, header: &[&str], rows: &[Vec<String>], digest: &str) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut full: Vec<&str> = header.to_vec();
        full.push(DIGEST_KEY);
        w.write_record(&full).expect("in-memory write");
        for row in rows {
            let mut rec: Vec<&str> = row.iter().map(String::as_str).collect();
            rec.push(digest);
            w.write_record(&rec).expect("in-memory write");
        }
        Self { name: name.into(), bytes: w.into_inner().expect("in-memory flush") }
    }

    /// Pretty JSON object with the digest inserted as a top-level field.
    pub(crate) fn json(name: &str, value: serde_json::Value, digest: &str) -> Self {
        let mut value = value;
        if let Some(obj) = value.as_object_mut() {
            obj.insert(DIGEST_KEY.into(), serde_json::Value::String(digest.into()));
        }
        let mut bytes = serde_json::to_vec_pretty(&value).expect("JSON value serializes");
        bytes.push(b'\n');
        Self { name: name.into(), bytes }
    }
}

/// Digest recorded in an existing artifact, if it has one.
pub fn embedded_digest(path: &Path) -> Option<String> {
    let bytes = std::fs::read(path).ok()?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let v: serde_json::Value = serde_json::from_slice(&bytes).ok()?;
            v.get(DIGEST_KEY)?.as_str().map(str::to_string)
        }
        Some("csv") => {
            let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(bytes.as_slice());
            let col = r.headers().ok()?.iter().position(|h| h == DIGEST_KEY)?;
            let rec = r.records().next()?.ok()?;
            rec.get(col).map(str::to_string)
        }
        _ => None,
    }
}

/// Writes all artifacts into `dir` or none of them. Existing files are
/// replaced only when they carry the same digest or `force` is set.
pub fn write_artifacts(dir: &Path, digest: &str, force: bool, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(format!("creating {}", dir.display()), e))?;
    let targets: Vec<PathBuf> = artifacts.iter().map(|a| dir.join(&a.name)).collect();
    if !force {
        for path in &targets {
            if path.exists() && embedded_digest(path).as_deref() != Some(digest) {
                return Err(HarnessError::WouldOverwrite(path.clone()));
            }
        }
    }
    let mut staged = Vec::with_capacity(artifacts.len());
    for (artifact, path) in artifacts.iter().zip(&targets) {
        let parent = path.parent().unwrap_or(dir);
        let mut tmp = tempfile::NamedTempFile::new_in(parent)
            .map_err(|e| HarnessError::io(format!("staging {}", path.display()), e))?;
        tmp.write_all(&artifact.bytes)
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| HarnessError::io(format!("writing {}", path.display()), e))?;
        staged.push(tmp);
    }
    for (tmp, path) in staged.into_iter().zip(&targets) {
        tmp.persist(path).map_err(|e| HarnessError::io(format!("renaming into {}", path.display()), e.error))?;
    }
    Ok(targets)
}
