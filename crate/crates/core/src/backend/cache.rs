//! Record/replay of generator replies keyed by prompt digest.
//!
//! One file per digest, `<digest>.entry`: the digest on the first line, the
//! latency in milliseconds on the second, the raw response after that.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use crate::time::Seconds;

use super::{BackendError, Generator, GeneratorRequest, GeneratorResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheMode {
    Record,
    Replay,
    Passthrough,
}

impl FromStr for CacheMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "record" => Ok(CacheMode::Record),
            "replay" => Ok(CacheMode::Replay),
            "off" | "passthrough" => Ok(CacheMode::Passthrough),
            other => Err(format!("unknown cache mode '{other}' (record|replay|off)")),
        }
    }
}

impl fmt::Display for CacheMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CacheMode::Record => "record",
            CacheMode::Replay => "replay",
            CacheMode::Passthrough => "off",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub digest: String,
    pub latency_ms: u64,
    pub raw_response: String,
}

impl CacheEntry {
    pub fn to_file_string(&self) -> String {
        format!("{}\n{}\n{}", self.digest, self.latency_ms, self.raw_response)
    }

    pub fn parse(text: &str) -> Option<Self> {
        let (digest, rest) = text.split_once('\n')?;
        let (latency, raw) = rest.split_once('\n').unwrap_or((rest, ""));
        Some(Self {
            digest: digest.to_string(),
            latency_ms: latency.trim().parse().ok()?,
            raw_response: raw.to_string(),
        })
    }
}

pub fn entry_path(dir: &Path, digest: &str) -> PathBuf {
    dir.join(format!("{digest}.entry"))
}

pub fn read_cache_entry(dir: &Path, digest: &str) -> Result<Option<CacheEntry>, BackendError> {
    let path = entry_path(dir, digest);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => {
            return Err(BackendError::Cache {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        }
    };
    let entry = CacheEntry::parse(&text).ok_or_else(|| BackendError::Cache {
        path: path.display().to_string(),
        message: "corrupt entry".into(),
    })?;
    if entry.digest != digest {
        return Err(BackendError::Cache {
            path: path.display().to_string(),
            message: format!("entry holds digest {}", entry.digest),
        });
    }
    Ok(Some(entry))
}

pub struct ReplayCache<G> {
    inner: Option<G>,
    dir: PathBuf,
    mode: CacheMode,
    write_lock: Mutex<()>,
}

impl<G: Generator> ReplayCache<G> {
    pub fn new(inner: Option<G>, dir: impl Into<PathBuf>, mode: CacheMode) -> Result<Self, BackendError> {
        let dir = dir.into();
        match mode {
            CacheMode::Record => {
                std::fs::create_dir_all(&dir).map_err(|e| BackendError::Cache {
                    path: dir.display().to_string(),
                    message: e.to_string(),
                })?;
            }
            CacheMode::Replay if !dir.is_dir() => {
                return Err(BackendError::Cache {
                    path: dir.display().to_string(),
                    message: "cache directory does not exist".into(),
                })
            }
            _ => {}
        }
        if mode != CacheMode::Replay && inner.is_none() {
            return Err(BackendError::Config(format!(
                "cache mode {mode} needs an inner generator"
            )));
        }
        Ok(Self {
            inner,
            dir,
            mode,
            write_lock: Mutex::new(()),
        })
    }

    pub fn mode(&self) -> CacheMode {
        self.mode
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn call_inner(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
        match &self.inner {
            Some(g) => g.generate(request),
            None => Err(BackendError::Config("no inner generator".into())),
        }
    }

    fn persist(&self, digest: &str, response: &GeneratorResponse) -> Result<(), BackendError> {
        let entry = CacheEntry {
            digest: digest.to_string(),
            latency_ms: response.latency.as_millis(),
            raw_response: response.raw_text.clone(),
        };
        let path = entry_path(&self.dir, digest);
        let tmp = self.dir.join(format!(".{digest}.tmp"));
        let io_err = |e: std::io::Error| BackendError::Cache {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        std::fs::write(&tmp, entry.to_file_string()).map_err(io_err)?;
        std::fs::rename(&tmp, &path).map_err(io_err)?;
        Ok(())
    }
}

impl<G: Generator> Generator for ReplayCache<G> {
    fn generate(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
        let digest = &request.prompt.digest;
        match self.mode {
            CacheMode::Passthrough => self.call_inner(request),
            CacheMode::Record => {
                let response = self.call_inner(request)?;
                self.persist(digest, &response)?;
                Ok(response)
            }
            CacheMode::Replay => {
                let entry = read_cache_entry(&self.dir, digest)?.ok_or_else(|| {
                    BackendError::CacheMiss {
                        digest: digest.clone(),
                    }
                })?;
                Ok(GeneratorResponse {
                    raw_text: entry.raw_response,
                    latency: Seconds::from_millis(entry.latency_ms),
                    model_id: request.model_id.clone(),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::request;
    use super::super::ScriptedBackend;
    use super::*;

    #[test]
    fn entry_format() {
        let e = CacheEntry {
            digest: "abc".into(),
            latency_ms: 1200,
            raw_response: "line one\nline two".into(),
        };
        assert_eq!(e.to_file_string(), "abc\n1200\nline one\nline two");
        assert_eq!(CacheEntry::parse(&e.to_file_string()).unwrap(), e);
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let rec = ReplayCache::new(
            Some(ScriptedBackend::new("Red leads.")),
            dir.path(),
            CacheMode::Record,
        )
        .unwrap();
        let req = request(0, "prompt a");
        rec.generate(&req).unwrap();
        rec.generate(&req).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

        let replay =
            ReplayCache::<ScriptedBackend>::new(None, dir.path(), CacheMode::Replay).unwrap();
        assert_eq!(replay.generate(&req).unwrap().raw_text, "Red leads.");
        let miss = request(1, "prompt b");
        match replay.generate(&miss) {
            Err(BackendError::CacheMiss { digest }) => assert_eq!(digest, miss.prompt.digest),
            other => panic!("expected miss, got {other:?}"),
        }
    }

    #[test]
    fn replay_needs_existing_dir_and_record_needs_inner() {
        assert!(ReplayCache::<ScriptedBackend>::new(None, "/nonexistent/cache", CacheMode::Replay).is_err());
        let dir = tempfile::tempdir().unwrap();
        assert!(ReplayCache::<ScriptedBackend>::new(None, dir.path(), CacheMode::Record).is_err());
    }

    #[test]
    fn passthrough_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let c = ReplayCache::new(Some(ScriptedBackend::default()), dir.path(), CacheMode::Passthrough)
            .unwrap();
        c.generate(&request(0, "p")).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
