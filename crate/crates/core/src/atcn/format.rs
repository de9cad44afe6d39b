//! Binary container for models and optimizer state.
//!
//! Layout: `"ATCN"` | version `u32` LE | header length `u32` LE | UTF-8 JSON
//! header | blob section. The header lists every blob with its shape and its
//! byte offset and length inside the blob section; each blob is a row-major
//! little-endian `f32` array.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AtcnConfig, AtcnModel, CharVocab};
use crate::error::{DiacriticsError, Result};

pub const MAGIC: [u8; 4] = *b"ATCN";
pub const FORMAT_VERSION: u32 = 1;
const PREAMBLE: usize = 12;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic bytes {0:?}, expected \"ATCN\"")]
    BadMagic(Vec<u8>),
    #[error("unsupported format version {0}, this build reads version {FORMAT_VERSION}")]
    UnsupportedVersion(u32),
    #[error("file ends inside the header")]
    TruncatedHeader,
    #[error("blob {blob:?} is truncated: it needs bytes {start}..{end} of the blob section, which has {available}")]
    Truncated {
        blob: String,
        start: u64,
        end: u64,
        available: u64,
    },
    #[error("blob {blob:?}: expected {expected} bytes, found {actual}")]
    SizeMismatch { blob: String, expected: u64, actual: u64 },
    #[error("malformed header: {0}")]
    Header(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlobEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: u64,
    pub length: u64,
}

#[derive(Serialize, Deserialize)]
struct Header<M> {
    #[serde(flatten)]
    meta: M,
    blobs: Vec<BlobEntry>,
}

/// A named `f32` array.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

pub fn encode<M: Serialize>(meta: &M, blobs: &[Blob]) -> Result<Vec<u8>> {
    let mut entries = Vec::with_capacity(blobs.len());
    let mut offset = 0u64;
    for b in blobs {
        let length = 4 * b.data.len() as u64;
        entries.push(BlobEntry {
            name: b.name.clone(),
            shape: b.shape.clone(),
            offset,
            length,
        });
        offset += length;
    }
    let header = serde_json::to_vec(&Header { meta, blobs: entries })
        .map_err(|e| FormatError::Header(e.to_string()))?;
    let header_len = u32::try_from(header.len()).map_err(|_| FormatError::Header("header too large".into()))?;
    let mut out = Vec::with_capacity(PREAMBLE + header.len() + offset as usize);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&header);
    for b in blobs {
        for x in &b.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode<M: DeserializeOwned>(bytes: &[u8]) -> Result<(M, Vec<Blob>), FormatError> {
    let head = &bytes[..bytes.len().min(4)];
    if head != &MAGIC[..head.len()] {
        return Err(FormatError::BadMagic(head.to_vec()));
    }
    if bytes.len() < PREAMBLE {
        return Err(FormatError::TruncatedHeader);
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("four bytes"));
    let version = word(4);
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let header_end = PREAMBLE + word(8) as usize;
    if bytes.len() < header_end {
        return Err(FormatError::TruncatedHeader);
    }
    let header: Header<M> =
        serde_json::from_slice(&bytes[PREAMBLE..header_end]).map_err(|e| FormatError::Header(e.to_string()))?;
    let section = &bytes[header_end..];
    let mut blobs = Vec::with_capacity(header.blobs.len());
    for entry in header.blobs {
        let elements: usize = entry.shape.iter().product();
        let expected = 4 * elements as u64;
        if entry.length != expected {
            return Err(FormatError::SizeMismatch {
                blob: entry.name,
                expected,
                actual: entry.length,
            });
        }
        let end = entry.offset.checked_add(entry.length).unwrap_or(u64::MAX);
        if end > section.len() as u64 {
            return Err(FormatError::Truncated {
                blob: entry.name,
                start: entry.offset,
                end,
                available: section.len() as u64,
            });
        }
        let raw = &section[entry.offset as usize..end as usize];
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("four bytes")))
            .collect();
        blobs.push(Blob {
            name: entry.name,
            shape: entry.shape,
            data,
        });
    }
    Ok((header.meta, blobs))
}

#[derive(Serialize, Deserialize)]
struct ModelMeta {
    kind: String,
    config: AtcnConfig,
    language: Option<String>,
    /// Vocabulary characters as codepoints, in id order from id 2.
    vocab: Vec<u32>,
}

const MODEL_KIND: &str = "atcn-model";

impl AtcnModel<f32> {
    /// Parameters followed by batch-norm running statistics.
    pub fn blobs(&self) -> Vec<Blob> {
        let mut out: Vec<Blob> = self
            .parameters()
            .into_iter()
            .map(|(name, t)| Blob {
                name,
                shape: t.shape().to_vec(),
                data: t.data().to_vec(),
            })
            .collect();
        for (i, block) in self.blocks.iter().enumerate() {
            for (j, bn) in block.norms.iter().enumerate() {
                for (stat, values) in [("running_mean", &bn.running_mean), ("running_var", &bn.running_var)] {
                    out.push(Blob {
                        name: format!("block{i}.bn{j}.{stat}"),
                        shape: vec![values.len()],
                        data: values.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let meta = ModelMeta {
            kind: MODEL_KIND.into(),
            config: self.config.clone(),
            language: self.language.clone(),
            vocab: self.vocab.chars().iter().map(|&c| c as u32).collect(),
        };
        encode(&meta, &self.blobs())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (meta, blobs): (ModelMeta, _) = decode(bytes)?;
        if meta.kind != MODEL_KIND {
            return Err(FormatError::Header(format!("file holds {:?}, not a model", meta.kind)).into());
        }
        let chars = meta
            .vocab
            .iter()
            .map(|&u| char::from_u32(u).ok_or_else(|| FormatError::Header(format!("invalid codepoint {u}"))))
            .collect::<Result<Vec<char>, _>>()?;
        let vocab = CharVocab::from_chars(chars.iter().copied())?;
        if vocab.chars() != chars.as_slice() {
            return Err(FormatError::Header("vocabulary is not sorted and distinct".into()).into());
        }
        meta.config.validate().map_err(|e| FormatError::Header(e.to_string()))?;
        let mut model = AtcnModel::zeroed(meta.config, vocab, meta.language)?;
        let mut by_name: std::collections::HashMap<String, Blob> =
            blobs.into_iter().map(|b| (b.name.clone(), b)).collect();
        let mut take = |name: &str, expected: &[usize]| -> Result<Vec<f32>, FormatError> {
            let blob = by_name
                .remove(name)
                .ok_or_else(|| FormatError::Header(format!("missing blob {name:?}")))?;
            if blob.shape != expected {
                let n = |s: &[usize]| 4 * s.iter().product::<usize>() as u64;
                return Err(FormatError::SizeMismatch {
                    blob: name.to_string(),
                    expected: n(expected),
                    actual: n(&blob.shape),
                });
            }
            Ok(blob.data)
        };
        let names: Vec<(String, Vec<usize>)> = model
            .parameters()
            .into_iter()
            .map(|(n, t)| (n, t.shape().to_vec()))
            .collect();
        for ((name, shape), param) in names.iter().zip(model.parameters_mut()) {
            param.data_mut().copy_from_slice(&take(name, shape)?);
        }
        for (i, block) in model.blocks.iter_mut().enumerate() {
            for (j, bn) in block.norms.iter_mut().enumerate() {
                let c = bn.channels();
                bn.running_mean = take(&format!("block{i}.bn{j}.running_mean"), &[c])?;
                bn.running_var = take(&format!("block{i}.bn{j}.running_var"), &[c])?;
            }
        }
        if let Some(extra) = by_name.keys().min() {
            return Err(FormatError::Header(format!("unexpected blob {extra:?}")).into());
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).map_err(|e| DiacriticsError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| DiacriticsError::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
