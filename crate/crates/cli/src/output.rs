use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// A set of files destined for one directory, written only once every
/// file's contents are ready.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Refuses to touch a non-empty directory unless `force`. Each file is
    /// written to a temporary sibling and renamed into place.
    pub fn write(&self, dir: &Path, force: bool) -> Result<Vec<PathBuf>, CliError> {
        if dir.exists() {
            let occupied = fs::read_dir(dir).map_err(|e| io(dir, e))?.next().is_some();
            if occupied && !force {
                return Err(CliError::Refused(format!(
                    "{} is not empty; pass --force to overwrite",
                    dir.display()
                )));
            }
        } else {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        let mut written = Vec::with_capacity(self.files.len());
        for (name, data) in &self.files {
            let target = dir.join(name);
            let tmp = dir.join(format!(".{name}.tmp"));
            let mut f = fs::File::create(&tmp).map_err(|e| io(&tmp, e))?;
            f.write_all(data).and_then(|_| f.sync_all()).map_err(|e| io(&tmp, e))?;
            fs::rename(&tmp, &target).map_err(|e| io(&target, e))?;
            written.push(target);
        }
        Ok(written)
    }
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
