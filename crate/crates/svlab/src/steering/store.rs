//! Steering-vector persistence: a JSON-lines metadata sidecar next to a
//! little-endian binary blob.
//!
//! The sidecar (`<stem>.json`) holds one JSON record describing the vector:
//! its kind, source task, extraction settings, tensor shape, the blob file
//! name, and the blob's SHA-256. The blob (`<stem>.bin`) is a `SVLB` magic,
//! a `u32` format version, a `u64` element count, and the tensor as `f32`
//! little-endian values.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SvError};
use crate::steering::fv::FunctionVector;
use crate::steering::icv::InContextVector;
use crate::steering::Steering;
use crate::tasks::DemoKind;

const BLOB_MAGIC: &[u8; 4] = b"SVLB";
const BLOB_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum StoredMeta {
    Icv {
        source_task: String,
        strength: f32,
        renormalize: bool,
        n_demos: usize,
        demo_kind: DemoKind,
        centered: bool,
        seed: u64,
        n_layers: usize,
        d_model: usize,
        blob: String,
        sha256: String,
    },
    Fv {
        source_task: String,
        head_set: Vec<(usize, usize)>,
        target_layers: Vec<usize>,
        k: usize,
        d_model: usize,
        blob: String,
        sha256: String,
    },
}

fn blob_bytes(data: &[f32]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(16 + data.len() * 4);
    bytes.extend_from_slice(BLOB_MAGIC);
    bytes.extend_from_slice(&BLOB_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(data.len() as u64).to_le_bytes());
    for &v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

fn parse_blob(bytes: &[u8], expected_len: usize) -> Result<Vec<f32>> {
    let fail = |offset: u64, reason: String| SvError::Format { offset, reason };
    if bytes.len() < 4 || &bytes[..4] != BLOB_MAGIC {
        return Err(fail(0, "missing SVLB magic".to_string()));
    }
    if bytes.len() < 8 {
        return Err(fail(4, "truncated before version".to_string()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != BLOB_VERSION {
        return Err(fail(
            4,
            format!("blob version {version}, this build reads {BLOB_VERSION}"),
        ));
    }
    if bytes.len() < 16 {
        return Err(fail(8, "truncated before element count".to_string()));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    if count != expected_len {
        return Err(fail(
            8,
            format!("blob holds {count} values, metadata promises {expected_len}"),
        ));
    }
    let want = 16 + count * 4;
    if bytes.len() != want {
        return Err(fail(
            16,
            format!("blob is {} bytes, expected {want}", bytes.len()),
        ));
    }
    Ok(bytes[16..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes `<stem>.json` and `<stem>.bin` for the vector and returns both
/// paths (metadata first).
///
/// # Errors
/// I/O errors from writing either file.
pub fn save_steering(steering: &Steering, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let meta_path = stem.with_extension("json");
    let blob_path = stem.with_extension("bin");
    let blob_name = blob_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| SvError::input(format!("bad vector path {}", stem.display())))?
        .to_string();
    let (data, meta) = match steering {
        Steering::Icv(icv) => {
            let data: Vec<f32> = icv.direction.iter().copied().collect();
            let bytes = blob_bytes(&data);
            let meta = StoredMeta::Icv {
                source_task: icv.source_task.clone(),
                strength: icv.strength,
                renormalize: icv.renormalize,
                n_demos: icv.n_demos,
                demo_kind: icv.demo_kind,
                centered: icv.centered,
                seed: icv.seed,
                n_layers: icv.direction.nrows(),
                d_model: icv.direction.ncols(),
                blob: blob_name,
                sha256: hex_digest(&bytes),
            };
            (bytes, meta)
        }
        Steering::Fv(fv) => {
            let data: Vec<f32> = fv.vector.iter().copied().collect();
            let bytes = blob_bytes(&data);
            let meta = StoredMeta::Fv {
                source_task: fv.source_task.clone(),
                head_set: fv.head_set.clone(),
                target_layers: fv.target_layers.clone(),
                k: fv.k,
                d_model: fv.vector.len(),
                blob: blob_name,
                sha256: hex_digest(&bytes),
            };
            (bytes, meta)
        }
    };
    fs::write(&blob_path, &data)?;
    let mut line = serde_json::to_string(&meta)?;
    line.push('\n');
    fs::write(&meta_path, line)?;
    Ok((meta_path, blob_path))
}

/// Reads a vector back from its metadata sidecar, verifying the blob's
/// magic, version, length, and SHA-256.
///
/// # Errors
/// Format errors for a corrupt or mismatched blob; JSON errors for a bad
/// sidecar.
pub fn load_steering(meta_path: &Path) -> Result<Steering> {
    let raw = fs::read_to_string(meta_path)?;
    let line = raw
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| SvError::input(format!("{} is empty", meta_path.display())))?;
    let meta: StoredMeta = serde_json::from_str(line)?;
    let dir = meta_path.parent().unwrap_or_else(|| Path::new("."));
    match meta {
        StoredMeta::Icv {
            source_task,
            strength,
            renormalize,
            n_demos,
            demo_kind,
            centered,
            seed,
            n_layers,
            d_model,
            blob,
            sha256,
        } => {
            let bytes = fs::read(dir.join(&blob))?;
            if hex_digest(&bytes) != sha256 {
                return Err(SvError::Format {
                    offset: 0,
                    reason: format!("{blob}: SHA-256 mismatch with metadata"),
                });
            }
            let data = parse_blob(&bytes, n_layers * d_model)?;
            let direction = Array2::from_shape_vec((n_layers, d_model), data)
                .map_err(|e| SvError::input(format!("direction shape: {e}")))?;
            Ok(Steering::Icv(InContextVector {
                direction,
                strength,
                renormalize,
                n_demos,
                demo_kind,
                source_task,
                centered,
                seed,
            }))
        }
        StoredMeta::Fv {
            source_task,
            head_set,
            target_layers,
            k,
            d_model,
            blob,
            sha256,
        } => {
            let bytes = fs::read(dir.join(&blob))?;
            if hex_digest(&bytes) != sha256 {
                return Err(SvError::Format {
                    offset: 0,
                    reason: format!("{blob}: SHA-256 mismatch with metadata"),
                });
            }
            let data = parse_blob(&bytes, d_model)?;
            Ok(Steering::Fv(FunctionVector {
                vector: Array1::from_vec(data),
                head_set,
                target_layers,
                k,
                source_task,
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample_icv() -> InContextVector {
        InContextVector {
            direction: array![[0.5_f32, 0.5], [0.5, 0.5]],
            strength: 1.5,
            renormalize: true,
            n_demos: 5,
            demo_kind: DemoKind::Style2,
            source_task: "antonym".to_string(),
            centered: false,
            seed: 42,
        }
    }

    fn sample_fv() -> FunctionVector {
        FunctionVector {
            vector: array![1.0_f32, -2.0, 0.25],
            head_set: vec![(1, 0), (0, 3)],
            target_layers: vec![1],
            k: 2,
            source_task: "capitalize".to_string(),
        }
    }

    #[test]
    fn icv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("vec-icv");
        let icv = sample_icv();
        let (meta, blob) = save_steering(&Steering::Icv(icv.clone()), &stem).unwrap();
        assert!(meta.ends_with("vec-icv.json"));
        assert!(blob.ends_with("vec-icv.bin"));
        match load_steering(&meta).unwrap() {
            Steering::Icv(loaded) => assert_eq!(loaded, icv),
            Steering::Fv(_) => panic!("expected an in-context vector"),
        }
    }

    #[test]
    fn fv_round_trip_and_byte_stability() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("vec-fv");
        let fv = sample_fv();
        save_steering(&Steering::Fv(fv.clone()), &stem).unwrap();
        let first_meta = fs::read(stem.with_extension("json")).unwrap();
        let first_blob = fs::read(stem.with_extension("bin")).unwrap();
        save_steering(&Steering::Fv(fv.clone()), &stem).unwrap();
        assert_eq!(first_meta, fs::read(stem.with_extension("json")).unwrap());
        assert_eq!(first_blob, fs::read(stem.with_extension("bin")).unwrap());
        match load_steering(&stem.with_extension("json")).unwrap() {
            Steering::Fv(loaded) => assert_eq!(loaded, fv),
            Steering::Icv(_) => panic!("expected a function vector"),
        }
    }

    #[test]
    fn corrupt_magic_reports_offset_zero() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("vec");
        save_steering(&Steering::Icv(sample_icv()), &stem).unwrap();
        let blob_path = stem.with_extension("bin");
        let mut bytes = fs::read(&blob_path).unwrap();
        bytes[0] = b'X';
        fs::write(&blob_path, &bytes).unwrap();
        // The digest now mismatches before the magic is even checked.
        match load_steering(&stem.with_extension("json")) {
            Err(SvError::Format { .. }) => {}
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_blob_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("vec");
        save_steering(&Steering::Fv(sample_fv()), &stem).unwrap();
        let blob_path = stem.with_extension("bin");
        let bytes = fs::read(&blob_path).unwrap();
        let err = parse_blob(&bytes[..bytes.len() - 2], 3).unwrap_err();
        assert!(matches!(err, SvError::Format { offset: 16, .. }));
    }
}
