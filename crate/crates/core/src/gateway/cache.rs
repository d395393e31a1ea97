//! Append-only persistent response cache keyed by prompt digest.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::GatewayError;

/// One JSON-lines cache record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key_hex: String,
    pub model: String,
    pub response: String,
    pub created_at: u64,
}

struct CacheInner {
    map: HashMap<String, String>,
    file: File,
}

/// File-backed response store. Reads and read-modify-writes are atomic per
/// key (a single lock guards both the map and the append handle); duplicate
/// appends for the same key are harmless since values are keyed by their
/// inputs.
pub struct ResponseCache {
    path: PathBuf,
    inner: Mutex<CacheInner>,
}

impl ResponseCache {
    /// Opens (creating if absent) a JSON-lines cache file and loads all
    /// existing records.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref().to_path_buf();
        let err = |message: String| GatewayError::Cache {
            path: path.display().to_string(),
            message,
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| err(e.to_string()))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .read(true)
            .open(&path)
            .map_err(|e| err(e.to_string()))?;
        let mut map = HashMap::new();
        let reader = BufReader::new(File::open(&path).map_err(|e| err(e.to_string()))?);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| err(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: CacheRecord = serde_json::from_str(&line)
                .map_err(|e| err(format!("line {}: {e}", lineno + 1)))?;
            map.insert(record.key_hex, record.response);
        }
        Ok(ResponseCache {
            path,
            inner: Mutex::new(CacheInner { map, file }),
        })
    }

    pub fn get(&self, key_hex: &str) -> Option<String> {
        self.inner.lock().unwrap().map.get(key_hex).cloned()
    }

    pub fn put(&self, key_hex: &str, model: &str, response: &str) -> Result<(), GatewayError> {
        let record = CacheRecord {
            key_hex: key_hex.to_string(),
            model: model.to_string(),
            response: response.to_string(),
            created_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut line = serde_json::to_string(&record).map_err(|e| GatewayError::Cache {
            path: self.path.display().to_string(),
            message: e.to_string(),
        })?;
        line.push('\n');
        let mut inner = self.inner.lock().unwrap();
        inner
            .file
            .write_all(line.as_bytes())
            .map_err(|e| GatewayError::Cache {
                path: self.path.display().to_string(),
                message: e.to_string(),
            })?;
        inner.map.insert(record.key_hex, record.response);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        {
            let cache = ResponseCache::open(&path).unwrap();
            cache.put("k1", "m", "r1").unwrap();
            cache.put("k2", "m", "r2").unwrap();
            assert_eq!(cache.get("k1").as_deref(), Some("r1"));
            assert_eq!(cache.len(), 2);
        }
        let cache = ResponseCache::open(&path).unwrap();
        assert_eq!(cache.get("k2").as_deref(), Some("r2"));
        assert!(cache.get("k3").is_none());
    }

    #[test]
    fn rejects_corrupt_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        std::fs::write(&path, "not json\n").unwrap();
        assert!(ResponseCache::open(&path).is_err());
    }
}
