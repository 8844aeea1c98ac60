//! Content-addressed cache of certified ranks.

use crate::field::Rational;
use crate::linalg::CertifiedRank;
use crate::tensor::Tensor3;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

/// Hash of the tensor entries and the row parameters.
pub fn rank_key(t: &Tensor3<Rational>, p: usize, k: Option<usize>, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(format!("{:?}", t.dims()).as_bytes());
    for v in t.entries() {
        h.update(v.to_string().as_bytes());
        h.update(b",");
    }
    if let Some(g) = t.grading() {
        h.update(format!("{:?}", g.factors).as_bytes());
    }
    h.update(format!("p={p};k={k:?};seed={seed}").as_bytes());
    hex::encode(h.finalize())
}

/// Directory of `<key>.json` files holding [`CertifiedRank`] values.
#[derive(Clone, Debug)]
pub struct RankCache {
    dir: PathBuf,
    audit: bool,
    audited: Arc<AtomicBool>,
    hits: Arc<AtomicUsize>,
}

impl RankCache {
    pub fn new(dir: impl AsRef<Path>) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir.as_ref())?;
        Ok(RankCache {
            dir: dir.as_ref().to_path_buf(),
            audit: false,
            audited: Arc::new(AtomicBool::new(false)),
            hits: Arc::new(AtomicUsize::new(0)),
        })
    }

    /// In audit mode the first hit of the run is recomputed and must match.
    pub fn with_audit(mut self, audit: bool) -> Self {
        self.audit = audit;
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Number of hits served so far.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    /// Whether an audit recomputation has happened.
    pub fn audited(&self) -> bool {
        self.audited.load(Ordering::Relaxed)
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<CertifiedRank> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, key: &str, value: &CertifiedRank) {
        let tmp = self.dir.join(format!("{key}.tmp"));
        if let Ok(text) = serde_json::to_string(value) {
            if std::fs::write(&tmp, text).is_ok() {
                let _ = std::fs::rename(&tmp, self.path(key));
            }
        }
    }

    /// Cached value if present and readable; otherwise computes and stores.
    /// Corrupt entries are overwritten.
    pub fn get_or_compute(&self, key: &str, compute: impl FnOnce() -> CertifiedRank) -> CertifiedRank {
        match self.get(key) {
            Some(hit) if self.audit && !self.audited.swap(true, Ordering::Relaxed) => {
                let fresh = compute();
                assert_eq!(hit, fresh, "cache entry {key} differs from recomputation");
                fresh
            }
            Some(hit) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                hit
            }
            None => {
                let fresh = compute();
                self.put(key, &fresh);
                fresh
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Certification;

    fn sample() -> CertifiedRank {
        CertifiedRank { rank: 3, primes: vec![5, 7], ranks: vec![3, 3], certification: Certification::TwoPrime }
    }

    #[test]
    fn put_get_and_corruption() {
        let dir = std::env::temp_dir().join(format!("sltensor-cache-test-{}", std::process::id()));
        let cache = RankCache::new(&dir).unwrap();
        assert_eq!(cache.get_or_compute("k", sample), sample());
        assert_eq!(cache.get("k"), Some(sample()));
        std::fs::write(dir.join("k.json"), "not json").unwrap();
        assert_eq!(cache.get("k"), None);
        assert_eq!(cache.get_or_compute("k", sample), sample());
        assert_eq!(cache.get("k"), Some(sample()));
        let _ = std::fs::remove_dir_all(dir);
    }
}
