//! Result bundles are staged next to the target and renamed into place, so
//! a failed run leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};

use super::CliError;

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Other(format!("{}: {e}", path.display()))
}

pub struct Bundle {
    staging: PathBuf,
    target: PathBuf,
    replace: bool,
    committed: bool,
}

impl Bundle {
    pub fn stage(target: &Path, replace: bool) -> Result<Self, CliError> {
        if target.exists() && !replace {
            return Err(CliError::Usage(format!(
                "output {} already exists (use --force to replace it)",
                target.display()
            )));
        }
        let name = target
            .file_name()
            .ok_or_else(|| CliError::Usage(format!("output {} has no directory name", target.display())))?;
        let parent = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
        let staging = parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| io(&staging, e))?;
        }
        fs::create_dir(&staging).map_err(|e| io(&staging, e))?;
        Ok(Bundle {
            staging,
            target: target.to_path_buf(),
            replace,
            committed: false,
        })
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.staging.join(name);
        fs::write(&path, contents).map_err(|e| io(&path, e))
    }

    pub fn commit(mut self) -> Result<(), CliError> {
        if self.replace && self.target.exists() {
            let old = &self.target;
            if old.is_dir() {
                fs::remove_dir_all(old).map_err(|e| io(old, e))?;
            } else {
                fs::remove_file(old).map_err(|e| io(old, e))?;
            }
        }
        fs::rename(&self.staging, &self.target).map_err(|e| io(&self.target, e))?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Bundle {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

/// Writes `contents` to `path` through a sibling temporary file.
pub fn replace_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    let tmp = path.with_extension(format!("partial-{}", std::process::id()));
    fs::write(&tmp, contents).map_err(|e| io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io(path, e))
}
