//! Content-addressed stage cache: a stage's output directory is stored
//! under `cache_root/<stage>/<key>/` where the key digests the stage
//! parameters and every input file. A later run with matching digests
//! copies the cached directory back instead of recomputing.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::PipelineError;

pub struct StageCache {
    root: PathBuf,
}

impl StageCache {
    pub fn new(root: PathBuf) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    fn entry_dir(&self, stage: &str, key: &str) -> PathBuf {
        self.root.join(stage).join(key)
    }

    /// Copies a cached stage directory to `dest` if present. Returns
    /// whether a hit happened.
    pub fn fetch(&self, stage: &str, key: &str, dest: &Path) -> Result<bool, PipelineError> {
        let entry = self.entry_dir(stage, key);
        if !entry.is_dir() {
            return Ok(false);
        }
        if dest.exists() {
            std::fs::remove_dir_all(dest)?;
        }
        copy_dir(&entry, dest)?;
        Ok(true)
    }

    pub fn store(&self, stage: &str, key: &str, source: &Path) -> Result<(), PipelineError> {
        let entry = self.entry_dir(stage, key);
        if entry.exists() {
            return Ok(());
        }
        let staging = self.root.join(stage).join(format!(".partial-{key}"));
        if staging.exists() {
            std::fs::remove_dir_all(&staging)?;
        }
        copy_dir(source, &staging)?;
        std::fs::rename(&staging, &entry)?;
        Ok(())
    }
}

fn copy_dir(from: &Path, to: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(to)?;
    for entry in std::fs::read_dir(from)? {
        let entry = entry?;
        let target = to.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            copy_dir(&entry.path(), &target)?;
        } else {
            std::fs::copy(entry.path(), &target)?;
        }
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let bytes = std::fs::read(path)
        .map_err(|e| PipelineError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

/// Relative paths and digests of every file under `dir`, sorted by path.
/// Dot-prefixed entries are skipped.
pub fn dir_digests(dir: &Path) -> Result<Vec<(String, String)>, PipelineError> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files.sort();
    files
        .into_iter()
        .map(|rel| {
            let digest = sha256_file(&dir.join(&rel))?;
            Ok((rel, digest))
        })
        .collect()
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<(), PipelineError> {
    if !dir.is_dir() {
        return Ok(());
    }
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        if name.to_string_lossy().starts_with('.') {
            continue;
        }
        let path = entry.path();
        if entry.file_type()?.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path
                .strip_prefix(root)
                .expect("child of root")
                .to_string_lossy()
                .replace('\\', "/");
            out.push(rel);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fetch_miss_then_store_then_hit() {
        let dir = tempfile::tempdir().unwrap();
        let cache = StageCache::new(dir.path().join("cache")).unwrap();
        let stage_out = dir.path().join("out");
        std::fs::create_dir_all(&stage_out).unwrap();
        std::fs::write(stage_out.join("a.txt"), "alpha").unwrap();

        let dest = dir.path().join("dest");
        assert!(!cache.fetch("ingest", "k1", &dest).unwrap());
        cache.store("ingest", "k1", &stage_out).unwrap();
        assert!(cache.fetch("ingest", "k1", &dest).unwrap());
        assert_eq!(std::fs::read_to_string(dest.join("a.txt")).unwrap(), "alpha");
    }

    #[test]
    fn dir_digests_are_sorted_and_stable() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("b.txt"), "b").unwrap();
        std::fs::write(dir.path().join("sub/a.txt"), "a").unwrap();
        let digests = dir_digests(dir.path()).unwrap();
        let paths: Vec<&str> = digests.iter().map(|(p, _)| p.as_str()).collect();
        assert_eq!(paths, vec!["b.txt", "sub/a.txt"]);
        assert_eq!(digests, dir_digests(dir.path()).unwrap());
    }
}
