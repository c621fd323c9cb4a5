//! Persistent store of solved values, one JSON document per file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use caching_core::Variant;
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub value: String,
    pub stats: serde_json::Value,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheFile {
    pub schema: u32,
    pub entries: BTreeMap<String, CacheEntry>,
}

impl Default for CacheFile {
    fn default() -> Self {
        CacheFile {
            schema: SCHEMA,
            entries: BTreeMap::new(),
        }
    }
}

#[derive(Debug)]
pub struct ResultCache {
    path: PathBuf,
    file: CacheFile,
    dirty: bool,
}

/// FNV-1a, stable across builds and platforms.
fn fnv1a(text: &str) -> u64 {
    text.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Hash of every flag that can change a solved value.
pub fn flags_hash(symmetry: bool, relaxed: bool) -> String {
    format!("{:016x}", fnv1a(&format!("symmetry={symmetry};relaxed={relaxed}")))
}

pub fn key(n: usize, d: usize, k: usize, variant: Variant, flags: &str) -> String {
    format!("{n},{d},{k},{variant},{flags}")
}

impl ResultCache {
    /// Opens `path`, starting empty when the file does not exist.
    pub fn open(path: &Path) -> Result<Self, String> {
        let file = match fs::read_to_string(path) {
            Ok(text) => {
                let file: CacheFile =
                    serde_json::from_str(&text).map_err(|e| format!("cache {} is not valid: {e}", path.display()))?;
                if file.schema != SCHEMA {
                    return Err(format!(
                        "cache {} has schema {}, expected {SCHEMA}",
                        path.display(),
                        file.schema
                    ));
                }
                file
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => CacheFile::default(),
            Err(e) => return Err(format!("cannot read cache {}: {e}", path.display())),
        };
        Ok(ResultCache {
            path: path.to_path_buf(),
            file,
            dirty: false,
        })
    }

    pub fn get(&self, key: &str) -> Option<&CacheEntry> {
        self.file.entries.get(key)
    }

    pub fn insert(&mut self, key: String, value: String, stats: serde_json::Value) {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        self.file.entries.insert(
            key,
            CacheEntry {
                value,
                stats,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp,
            },
        );
        self.dirty = true;
    }

    pub fn len(&self) -> usize {
        self.file.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.file.entries.is_empty()
    }

    /// Writes a sibling temporary file and renames it over the cache.
    pub fn save(&mut self) -> Result<(), String> {
        if !self.dirty {
            return Ok(());
        }
        let dir = self.path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let name = self.path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
        let text = serde_json::to_string_pretty(&self.file).map_err(|e| e.to_string())?;
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
            fs::rename(&tmp, &self.path)
        };
        write().map_err(|e| {
            let _ = fs::remove_file(&tmp);
            format!("cannot write cache {}: {e}", self.path.display())
        })?;
        self.dirty = false;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_hashes_differ_and_are_stable() {
        assert_ne!(flags_hash(true, false), flags_hash(false, false));
        assert_eq!(flags_hash(true, false), flags_hash(true, false));
        assert_eq!(fnv1a(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn keys_name_every_part() {
        assert_eq!(key(3, 3, 2, Variant::Random, "ab"), "3,3,2,random,ab");
    }
}
