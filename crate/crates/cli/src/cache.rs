//! Content-addressed store for cohomology results.

use std::io::Write;
use std::path::{Path, PathBuf};

use freeact_core::cohomology::{CohomologySummary, Stabilization};
use serde::{Deserialize, Serialize};

use crate::report::sha256_hex;

/// Bumped whenever the cached format or the computation changes.
pub const CACHE_VERSION: &str = "freeact-cohomology-v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyKey {
    pub group: Vec<u64>,
    pub blocks: usize,
    pub action: Vec<Vec<usize>>,
    pub degree: usize,
    pub truncation: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedCohomology {
    pub version: String,
    pub key: CohomologyKey,
    pub summary: CohomologySummary,
    pub stabilization: Option<Stabilization>,
}

impl CohomologyKey {
    pub fn digest(&self) -> String {
        let body = serde_json::to_string(self).expect("keys serialize");
        sha256_hex(format!("{CACHE_VERSION}\n{body}").as_bytes())
    }
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    fn path(&self, key: &CohomologyKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.digest()))
    }

    /// A stored entry for `key`; stale versions and unreadable files count as misses.
    pub fn get(&self, key: &CohomologyKey) -> Option<CachedCohomology> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        let entry: CachedCohomology = serde_json::from_str(&text).ok()?;
        (entry.version == CACHE_VERSION && entry.key == *key).then_some(entry)
    }

    /// Write to a temporary file in the cache directory, then rename into place.
    pub fn put(&self, entry: &CachedCohomology) -> std::io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(serde_json::to_string_pretty(entry).expect("entries serialize").as_bytes())?;
        tmp.flush()?;
        tmp.persist(self.path(&entry.key)).map_err(|e| e.error)?;
        Ok(())
    }
}
