//! Scripted attention dumps that stand in for a model.
//!
//! Oracle dumps send every predicting row's attention to the reference
//! positions of the token it predicts. Uniform dumps spread each row evenly
//! over all visible positions. Both are single-layer, single-head.

use std::path::Path;

use ndarray::Array4;
use rayon::prelude::*;
use refattn_core::Sample;

use crate::dump::write_dump;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptKind {
    Oracle,
    Uniform,
}

impl std::str::FromStr for ScriptKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oracle" => Ok(ScriptKind::Oracle),
            "uniform" => Ok(ScriptKind::Uniform),
            other => Err(format!("unknown dump kind {other:?} (oracle or uniform)")),
        }
    }
}

/// Weights 1/2, 1/4, ..., with the last two equal: exact in f32 and summing
/// to exactly 1.
fn dyadic(m: usize) -> Vec<f32> {
    let mut w: Vec<f32> = (1..m).map(|k| 0.5f32.powi(k as i32)).collect();
    w.push(0.5f32.powi(m as i32 - 1));
    w
}

pub fn oracle_weights(s: &Sample) -> Array4<f32> {
    let n = s.seq_len();
    let mut w = Array4::<f32>::zeros((1, 1, n, n));
    for q in 0..n {
        w[[0, 0, q, q]] = 1.0;
    }
    for (i, refs) in s.mask.iter().enumerate() {
        let q = s.target_position(i) - 1;
        w[[0, 0, q, q]] = 0.0;
        if refs.len() <= 100 {
            for (&p, v) in refs.iter().zip(dyadic(refs.len())) {
                w[[0, 0, q, p]] = v;
            }
        } else {
            for &p in refs {
                w[[0, 0, q, p]] = 1.0 / refs.len() as f32;
            }
        }
    }
    w
}

pub fn uniform_weights(s: &Sample) -> Array4<f32> {
    let n = s.seq_len();
    Array4::from_shape_fn((1, 1, n, n), |(_, _, q, k)| if k <= q { 1.0 / (q + 1) as f32 } else { 0.0 })
}

/// Write one dump per sample into `dir`.
pub fn write_scripted_dumps(samples: &[Sample], dir: &Path, kind: ScriptKind) -> Result<()> {
    samples.par_iter().try_for_each(|s| {
        let w = match kind {
            ScriptKind::Oracle => oracle_weights(s),
            ScriptKind::Uniform => uniform_weights(s),
        };
        write_dump(dir, &s.key(), &w, 0)
    })
}
