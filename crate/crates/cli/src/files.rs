//! Reading and writing the private and per-session documents next to the
//! board: dealer state, participant keys, contributions.

use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use msss::bulletin::write_atomically;
use msss::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Error::MalformedDocument(format!("{}: {e}", path.display())).into())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("document serializes");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    Ok(write_atomically(path, to_json(value).as_bytes())?)
}

/// Writes a new file, refusing to replace an existing one.
pub fn create_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut file = OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)
        .map_err(|e| match e.kind() {
            ErrorKind::AlreadyExists => CliError::Exists(path.to_path_buf()),
            _ => Error::Io {
                path: path.to_path_buf(),
                source: e,
            }
            .into(),
        })?;
    file.write_all(to_json(value).as_bytes()).map_err(|e| {
        CliError::from(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

/// Exclusive advisory lock held for the duration of a dealer write: a
/// `<board>.lock` file created with `O_EXCL` and removed on drop.
#[derive(Debug)]
pub struct BoardLock {
    path: PathBuf,
}

impl BoardLock {
    pub fn acquire(board: &Path) -> Result<Self, CliError> {
        let mut name = board.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                let _ = writeln!(file, "{}", std::process::id());
                Ok(BoardLock { path })
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(CliError::Locked(path)),
            Err(e) => Err(Error::Io { path, source: e }.into()),
        }
    }
}

impl Drop for BoardLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
