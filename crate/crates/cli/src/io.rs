use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// An input that is either a file or stdin, with a name for messages.
pub struct Input {
    name: String,
    reader: Box<dyn BufRead>,
    offset: u64,
}

impl Input {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        Ok(match path {
            Some(p) => Self {
                name: p.display().to_string(),
                reader: Box::new(BufReader::new(File::open(p).map_err(|e| CliError::io(p, e))?)),
                offset: 0,
            },
            None => Self {
                name: "<stdin>".into(),
                reader: Box::new(io::stdin().lock()),
                offset: 0,
            },
        })
    }

    /// Next line without its terminator, plus the terminator itself
    /// ("\n", "\r\n" or "" at end of input).
    pub fn next_line(&mut self) -> Result<Option<(String, &'static str)>> {
        let mut buf = Vec::new();
        let n = self
            .reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| CliError::io(&self.name, e))?;
        if n == 0 {
            return Ok(None);
        }
        let start = self.offset;
        self.offset += n as u64;
        let ending = if buf.ends_with(b"\r\n") {
            "\r\n"
        } else if buf.ends_with(b"\n") {
            "\n"
        } else {
            ""
        };
        buf.truncate(buf.len() - ending.len());
        match String::from_utf8(buf) {
            Ok(s) => Ok(Some((s, ending))),
            Err(e) => Err(CliError::Utf8 {
                what: self.name.clone(),
                offset: start + e.utf8_error().valid_up_to() as u64,
            }),
        }
    }

    pub fn lines(mut self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        while let Some((line, _)) = self.next_line()? {
            out.push(line);
        }
        Ok(out)
    }
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    Input::open(Some(path))?.lines()
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf).map_err(|e| CliError::io(path, e))?;
    Ok(buf)
}

pub struct Output {
    name: PathBuf,
    writer: Box<dyn Write>,
}

impl Output {
    pub fn create(path: Option<&Path>) -> Result<Self> {
        Ok(match path {
            Some(p) => Self {
                name: p.to_path_buf(),
                writer: Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
            },
            None => Self {
                name: "<stdout>".into(),
                writer: Box::new(io::stdout().lock()),
            },
        })
    }

    pub fn write_str(&mut self, s: &str) -> Result<()> {
        self.writer.write_all(s.as_bytes()).map_err(|e| CliError::io(&self.name, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.name, e))
    }
}

pub fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut out = Output::create(Some(path))?;
    for l in lines {
        out.write_str(l)?;
        out.write_str("\n")?;
    }
    out.flush()
}

/// Pretty JSON with a trailing newline, to a file or stdout.
pub fn write_report<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    let mut out = Output::create(path)?;
    out.write_str(&text)?;
    out.flush()
}
