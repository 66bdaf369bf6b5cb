//! Attention dumps: a JSON header next to a raw little-endian f32 payload.
//!
//! For a sample key `K` the files are `K.json` and `K.bin`. The payload holds
//! `n_layers * n_heads * seq_len * seq_len` values in `[layer][head][query][key]`
//! order.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array4;
use refattn_core::AttentionTensor;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};

pub const VERSION: u32 = 1;
pub const DTYPE: &str = "f32";
pub const LAYOUT: &str = "[layer][head][query][key]";
pub const BYTE_ORDER: &str = "little";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub version: u32,
    pub n_layers: usize,
    pub n_heads: usize,
    pub seq_len: usize,
    pub dtype: String,
    pub layout: String,
    pub byte_order: String,
    /// Positions before the prompt (an instruction prefix). They take part
    /// in the rollout but are never scored.
    #[serde(default)]
    pub prefix_len: usize,
}

impl DumpHeader {
    pub fn new(n_layers: usize, n_heads: usize, seq_len: usize, prefix_len: usize) -> Self {
        DumpHeader {
            version: VERSION,
            n_layers,
            n_heads,
            seq_len,
            dtype: DTYPE.into(),
            layout: LAYOUT.into(),
            byte_order: BYTE_ORDER.into(),
            prefix_len,
        }
    }

    pub fn payload_len(&self) -> Option<usize> {
        self.n_layers
            .checked_mul(self.n_heads)?
            .checked_mul(self.seq_len.checked_mul(self.seq_len)?)?
            .checked_mul(4)
    }

    fn check(&self) -> Result<(), String> {
        if self.version != VERSION {
            return Err(format!("unsupported version {}", self.version));
        }
        if self.dtype != DTYPE || self.layout != LAYOUT || self.byte_order != BYTE_ORDER {
            return Err(format!(
                "expected dtype {DTYPE:?}, layout {LAYOUT:?}, byte_order {BYTE_ORDER:?}"
            ));
        }
        if self.n_layers == 0 || self.n_heads == 0 || self.seq_len == 0 {
            return Err("dimensions must be positive".into());
        }
        if self.prefix_len >= self.seq_len {
            return Err("prefix covers the whole sequence".into());
        }
        if self.payload_len().is_none() {
            return Err("dimensions overflow".into());
        }
        Ok(())
    }
}

/// Header and payload paths for a sample key inside `dir`.
pub fn dump_paths(dir: &Path, key: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{key}.json")), dir.join(format!("{key}.bin")))
}

pub fn encode_payload(weights: &Array4<f32>) -> Vec<u8> {
    weights.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Write `K.json` and `K.bin` into `dir`.
pub fn write_dump(dir: &Path, key: &str, weights: &Array4<f32>, prefix_len: usize) -> Result<()> {
    let (l, h, q, k) = weights.dim();
    let (header_path, payload_path) = dump_paths(dir, key);
    if q != k {
        return Err(HarnessError::Format {
            path: header_path,
            message: format!("attention maps must be square, got {q}x{k}"),
        });
    }
    let header = DumpHeader::new(l, h, q, prefix_len);
    header.check().map_err(|message| HarnessError::Format { path: header_path.clone(), message })?;
    let mut text = serde_json::to_string_pretty(&header).expect("header serializes");
    text.push('\n');
    fs::write(&header_path, text).map_err(io_err(&header_path))?;
    fs::write(&payload_path, encode_payload(weights)).map_err(io_err(&payload_path))
}

/// Read the header at `header_path` and its sibling `.bin` payload.
pub fn read_dump(header_path: &Path) -> Result<(DumpHeader, AttentionTensor)> {
    let format = |message: String| HarnessError::Format { path: header_path.to_path_buf(), message };
    let text = fs::read_to_string(header_path).map_err(io_err(header_path))?;
    let header: DumpHeader = serde_json::from_str(&text).map_err(|e| format(e.to_string()))?;
    header.check().map_err(format)?;
    let payload_path = header_path.with_extension("bin");
    let bytes = fs::read(&payload_path).map_err(io_err(&payload_path))?;
    let expected = header.payload_len().expect("checked");
    if bytes.len() != expected {
        return Err(HarnessError::Format {
            path: payload_path,
            message: format!("payload is {} bytes, header implies {expected}", bytes.len()),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let n = header.seq_len;
    let weights = Array4::from_shape_vec((header.n_layers, header.n_heads, n, n), values).expect("length checked");
    let tensor = AttentionTensor::new(weights).map_err(|source| HarnessError::Tensor {
        path: payload_path,
        source,
    })?;
    Ok((header, tensor))
}

/// Load and validate the dump whose header is at `path`.
pub fn load_attention_dump(path: &Path) -> Result<AttentionTensor> {
    read_dump(path).map(|(_, t)| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use refattn_core::TensorError;

    fn lower_uniform(l: usize, h: usize, n: usize) -> Array4<f32> {
        Array4::from_shape_fn((l, h, n, n), |(_, _, q, k)| if k <= q { 1.0 / (q + 1) as f32 } else { 0.0 })
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let w = lower_uniform(2, 3, 5);
        write_dump(dir.path(), "abc-1", &w, 0).unwrap();
        let (header_path, payload_path) = dump_paths(dir.path(), "abc-1");
        assert_eq!(fs::metadata(&payload_path).unwrap().len(), 4 * 2 * 3 * 25);
        let (header, t) = read_dump(&header_path).unwrap();
        assert_eq!(header, DumpHeader::new(2, 3, 5, 0));
        assert_eq!((t.n_layers(), t.n_heads(), t.seq_len()), (2, 3, 5));
        assert_eq!(t.weights().mapv(|v| v as f32), w);
    }

    #[test]
    fn header_without_prefix_field_parses() {
        let text = r#"{"version":1,"n_layers":1,"n_heads":1,"seq_len":2,"dtype":"f32","layout":"[layer][head][query][key]","byte_order":"little"}"#;
        let h: DumpHeader = serde_json::from_str(text).unwrap();
        assert_eq!(h.prefix_len, 0);
    }

    #[test]
    fn truncated_payload_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        write_dump(dir.path(), "k", &lower_uniform(1, 1, 4), 0).unwrap();
        let (header_path, payload_path) = dump_paths(dir.path(), "k");
        let bytes = fs::read(&payload_path).unwrap();
        fs::write(&payload_path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(read_dump(&header_path), Err(HarnessError::Format { .. })));
    }

    #[test]
    fn bad_header_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        write_dump(dir.path(), "k", &lower_uniform(1, 1, 2), 0).unwrap();
        let (header_path, _) = dump_paths(dir.path(), "k");
        let text = fs::read_to_string(&header_path).unwrap().replace("little", "big");
        fs::write(&header_path, text).unwrap();
        assert!(matches!(read_dump(&header_path), Err(HarnessError::Format { .. })));
        fs::write(&header_path, "{").unwrap();
        assert!(matches!(read_dump(&header_path), Err(HarnessError::Format { .. })));
    }

    #[test]
    fn half_row_is_tensor_error_naming_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = lower_uniform(2, 2, 4);
        w[[1, 0, 2, 0]] = 0.0;
        w[[1, 0, 2, 1]] = 0.25;
        w[[1, 0, 2, 2]] = 0.25;
        write_dump(dir.path(), "k", &w, 0).unwrap();
        let (header_path, _) = dump_paths(dir.path(), "k");
        match read_dump(&header_path) {
            Err(HarnessError::Tensor { source: TensorError::RowSum { layer: 1, head: 0, row: 2, sum }, .. }) => {
                assert!((sum - 0.5).abs() < 1e-6)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn future_mass_is_tensor_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = lower_uniform(1, 1, 3);
        w[[0, 0, 0, 0]] = 0.5;
        w[[0, 0, 0, 2]] = 0.5;
        write_dump(dir.path(), "k", &w, 0).unwrap();
        let (header_path, _) = dump_paths(dir.path(), "k");
        assert!(matches!(
            read_dump(&header_path),
            Err(HarnessError::Tensor { source: TensorError::NotCausal { row: 0, key: 2, .. }, .. })
        ));
    }
}
