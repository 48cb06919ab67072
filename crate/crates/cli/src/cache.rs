//! On-disk store of command output, keyed by discriminant and a SHA-256 of
//! the canonical configuration. A hit returns the stored bytes unchanged.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::Failure;

pub struct ResultCache {
    dir: PathBuf,
}

/// Hex SHA-256 of `parts` joined with an unambiguous separator.
pub fn config_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    h.finalize().iter().fold(String::new(), |mut s, b| {
        write!(s, "{b:02x}").expect("string write");
        s
    })
}

impl ResultCache {
    /// Creates the directory if needed.
    pub fn open(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| {
            Failure::Usage(format!("cannot create cache dir {}: {e}", dir.display()))
        })?;
        Ok(ResultCache {
            dir: dir.to_path_buf(),
        })
    }

    /// `None` when no directory was configured.
    pub fn optional(dir: Option<&Path>) -> Result<Option<Self>, Failure> {
        dir.map(Self::open).transpose()
    }

    pub fn path(&self, kind: &str, disc: i64, hash: &str) -> PathBuf {
        self.dir
            .join(format!("{kind}_{}_{}.json", disc.unsigned_abs(), &hash[..16]))
    }

    pub fn get(&self, kind: &str, disc: i64, hash: &str) -> Option<String> {
        let p = self.path(kind, disc, hash);
        match fs::read_to_string(&p) {
            Ok(s) => {
                log::info!("cache hit {}", p.display());
                Some(s)
            }
            Err(_) => None,
        }
    }

    /// Writes via a temporary file and rename, so readers never see a
    /// partial entry.
    pub fn put(&self, kind: &str, disc: i64, hash: &str, body: &str) -> Result<(), Failure> {
        let p = self.path(kind, disc, hash);
        let tmp = p.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, body)
            .and_then(|_| fs::rename(&tmp, &p))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))
    }
}
