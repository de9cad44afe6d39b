use std::fs::File;
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{DiacriticsError, Result};

/// Random access to the lines of a corpus.
pub trait LineSource {
    fn len(&self) -> usize;

    fn line(&self, index: usize) -> Result<String>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl LineSource for [String] {
    fn len(&self) -> usize {
        <[String]>::len(self)
    }

    fn line(&self, index: usize) -> Result<String> {
        self.get(index)
            .cloned()
            .ok_or_else(|| DiacriticsError::invalid(format!("line {index} out of range")))
    }
}

impl LineSource for Vec<String> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn line(&self, index: usize) -> Result<String> {
        self.as_slice().line(index)
    }
}

/// A UTF-8 file read through a line-offset index; only the offsets are
/// kept in memory.
#[derive(Debug)]
pub struct IndexedFile {
    path: PathBuf,
    /// Start of every line plus one end sentinel.
    offsets: Vec<u64>,
    file: Mutex<File>,
}

impl IndexedFile {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let io = |e| DiacriticsError::io(&path, e);
        let file = File::open(&path).map_err(io)?;
        let mut reader = BufReader::new(file.try_clone().map_err(io)?);
        let mut offsets = vec![0u64];
        let mut pos = 0u64;
        let mut buf = Vec::new();
        loop {
            buf.clear();
            let n = reader.read_until(b'\n', &mut buf).map_err(io)?;
            if n == 0 {
                break;
            }
            pos += n as u64;
            offsets.push(pos);
        }
        Ok(Self {
            path,
            offsets,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl LineSource for IndexedFile {
    fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    fn line(&self, index: usize) -> Result<String> {
        if index >= self.len() {
            return Err(DiacriticsError::invalid(format!("line {index} out of range")));
        }
        let (start, end) = (self.offsets[index], self.offsets[index + 1]);
        let mut buf = vec![0u8; (end - start) as usize];
        {
            let mut f = self.file.lock().unwrap_or_else(|p| p.into_inner());
            f.seek(SeekFrom::Start(start)).map_err(|e| DiacriticsError::io(&self.path, e))?;
            f.read_exact(&mut buf).map_err(|e| DiacriticsError::io(&self.path, e))?;
        }
        while matches!(buf.last(), Some(b'\n' | b'\r')) {
            buf.pop();
        }
        String::from_utf8(buf).map_err(|e| {
            DiacriticsError::invalid(format!(
                "{}: line {} is not UTF-8 at byte {}",
                self.path.display(),
                index + 1,
                e.utf8_error().valid_up_to()
            ))
        })
    }
}
