//! Model (de)serialization.
//!
//! Layout: magic `SVLM`, u32 version, then three length-prefixed sections —
//! CONFIG (six u32 dims plus the u64 seed), VOCAB (token count, then each
//! token as u32 length + UTF-8 bytes), TENSORS (each tensor as u64 element
//! count + little-endian f32 data, in the canonical parameter order of
//! `Weights::param_slices`). Every multi-byte integer is little-endian.
//! Failures name the byte offset they were detected at.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Result, SvError};
use crate::lm::config::ModelConfig;
use crate::lm::model::{ModelBundle, Weights};
use crate::lm::tokenizer::Tokenizer;

/// File magic for model bundles.
pub const MODEL_MAGIC: [u8; 4] = *b"SVLM";
/// Current model format version.
pub const MODEL_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

/// Serializes a model to its byte representation.
#[must_use]
pub fn model_to_bytes(model: &ModelBundle) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());

    let mut config = Vec::with_capacity(32);
    for dim in [
        model.config.n_layers,
        model.config.n_heads,
        model.config.d_model,
        model.config.d_head,
        model.config.vocab_size,
        model.config.max_seq_len,
    ] {
        config.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    config.extend_from_slice(&model.config.seed.to_le_bytes());
    push_section(&mut out, &config);

    let mut vocab = Vec::new();
    vocab.extend_from_slice(&(model.tokenizer.vocab_size() as u32).to_le_bytes());
    for token in model.tokenizer.tokens() {
        vocab.extend_from_slice(&(token.len() as u32).to_le_bytes());
        vocab.extend_from_slice(token.as_bytes());
    }
    push_section(&mut out, &vocab);

    let slices = model.weights.param_slices();
    let tensor_bytes: usize = slices.iter().map(|s| 8 + 4 * s.len()).sum();
    let mut tensors = Vec::with_capacity(tensor_bytes);
    for slice in slices {
        tensors.extend_from_slice(&(slice.len() as u64).to_le_bytes());
        for &v in slice {
            tensors.extend_from_slice(&v.to_le_bytes());
        }
    }
    push_section(&mut out, &tensors);
    out
}

fn push_section(out: &mut Vec<u8>, payload: &[u8]) {
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
}

/// Writes a model file.
///
/// # Errors
/// Propagates I/O failures.
pub fn save_model(model: &ModelBundle, path: &Path) -> Result<()> {
    fs::write(path, model_to_bytes(model))?;
    Ok(())
}

/// Hex SHA-256 of the serialized model, used by provenance records.
#[must_use]
pub fn model_digest(model: &ModelBundle) -> String {
    let digest = Sha256::digest(model_to_bytes(model));
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

/// Byte reader that reports the offset of any malformed field.
struct Reader<'a> {
    buf: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, offset: 0 }
    }

    fn fail<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(SvError::Format {
            offset: self.offset as u64,
            reason: reason.into(),
        })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.offset + n > self.buf.len() {
            return self.fail(format!(
                "unexpected end of file: needed {n} bytes, {} remain",
                self.buf.len() - self.offset
            ));
        }
        let out = &self.buf[self.offset..self.offset + n];
        self.offset += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let bytes = self.take(4)?;
        Ok(u32::from_le_bytes(bytes.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        let bytes = self.take(8)?;
        Ok(u64::from_le_bytes(bytes.try_into().expect("8 bytes")))
    }

    fn section(&mut self) -> Result<Reader<'a>> {
        let len = self.u64()? as usize;
        let payload = self.take(len)?;
        Ok(Reader {
            buf: payload,
            offset: 0,
        })
    }
}

/// Parses a model from bytes.
///
/// # Errors
/// Format error (naming the offset) for bad magic, unsupported version,
/// truncation, or dimension mismatches.
pub fn model_from_bytes(bytes: &[u8]) -> Result<ModelBundle> {
    let mut r = Reader::new(bytes);
    let magic = r.take(4)?;
    if magic != MODEL_MAGIC {
        return Err(SvError::Format {
            offset: 0,
            reason: format!("bad magic {magic:?}, expected {MODEL_MAGIC:?}"),
        });
    }
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return Err(SvError::Format {
            offset: 4,
            reason: format!("file format version {version}, this reader supports {MODEL_VERSION}"),
        });
    }

    let mut config_sec = r.section()?;
    let n_layers = config_sec.u32()? as usize;
    let n_heads = config_sec.u32()? as usize;
    let d_model = config_sec.u32()? as usize;
    let d_head = config_sec.u32()? as usize;
    let vocab_size = config_sec.u32()? as usize;
    let max_seq_len = config_sec.u32()? as usize;
    let seed = config_sec.u64()?;
    let config = ModelConfig {
        n_layers,
        n_heads,
        d_model,
        d_head,
        vocab_size,
        max_seq_len,
        seed,
    };
    config.validate()?;

    let mut vocab_sec = r.section()?;
    let count = vocab_sec.u32()? as usize;
    if count != config.vocab_size {
        return vocab_sec.fail(format!(
            "vocabulary holds {count} tokens but config.vocab_size is {}",
            config.vocab_size
        ));
    }
    let mut tokens = Vec::with_capacity(count);
    for _ in 0..count {
        let len = vocab_sec.u32()? as usize;
        let raw = vocab_sec.take(len)?;
        match std::str::from_utf8(raw) {
            Ok(s) => tokens.push(s.to_string()),
            Err(e) => return vocab_sec.fail(format!("invalid UTF-8 in token: {e}")),
        }
    }
    let tokenizer = Tokenizer::from_token_list(tokens)?;

    let mut tensor_sec = r.section()?;
    let mut weights = Weights::zeros_like(&config)?;
    for (i, slice) in weights.param_slices_mut().into_iter().enumerate() {
        let stored = tensor_sec.u64()? as usize;
        if stored != slice.len() {
            return tensor_sec.fail(format!(
                "tensor {i} holds {stored} elements, expected {}",
                slice.len()
            ));
        }
        let raw = tensor_sec.take(4 * stored)?;
        for (j, chunk) in raw.chunks_exact(4).enumerate() {
            slice[j] = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        }
    }

    Ok(ModelBundle {
        config,
        tokenizer,
        weights,
    })
}

/// Reads a model file.
///
/// # Errors
/// I/O failures plus everything [`model_from_bytes`] reports.
pub fn load_model(path: &Path) -> Result<ModelBundle> {
    let bytes = fs::read(path)?;
    model_from_bytes(&bytes)
}
