//! One writer per output directory, enforced by a lock file that exists
//! only while a command runs.

use crate::error::CliError;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const LOCK_FILE: &str = ".stvg.lock";

pub struct OutDirLock {
    path: PathBuf,
}

/// Creates the directory if needed and takes its lock. A live lock file
/// means another run owns the directory; the caller fails instead of
/// waiting so batch jobs cannot deadlock.
pub fn acquire(dir: &Path) -> Result<OutDirLock, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Build(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(LOCK_FILE);
    match OpenOptions::new().write(true).create_new(true).open(&path) {
        Ok(mut f) => {
            let _ = writeln!(f, "{}", std::process::id());
            Ok(OutDirLock { path })
        }
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Build(format!(
            "{} is locked by another run; delete {} if that run is gone",
            dir.display(),
            path.display()
        ))),
        Err(e) => Err(CliError::Build(format!("cannot lock {}: {e}", dir.display()))),
    }
}

impl Drop for OutDirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_is_exclusive_and_released_on_drop() {
        let dir = tempfile::tempdir().unwrap();
        let lock = acquire(dir.path()).unwrap();
        let second = acquire(dir.path());
        assert!(matches!(second, Err(CliError::Build(_))));
        drop(lock);
        let third = acquire(dir.path());
        assert!(third.is_ok());
    }

    #[test]
    fn lock_creates_missing_directories() {
        let dir = tempfile::tempdir().unwrap();
        let nested = dir.path().join("a/b");
        let _lock = acquire(&nested).unwrap();
        assert!(nested.join(LOCK_FILE).exists());
    }
}
