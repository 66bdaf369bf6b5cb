//! Attention rollout over per-layer, per-head attention maps.

mod score;
mod stats;

pub use score::{attention_score, attention_score_at, group_scores, ScoreSample};
pub use stats::{welch_t, WelchResult};

use ndarray::{s, Array2, Array4, ArrayView2, Axis};
use thiserror::Error;

use crate::error::{Error, Result};

/// Row sums of ingested attention may drift this far from 1.
pub const INGEST_TOLERANCE: f64 = 1e-4;
/// Row sums of matrices computed here stay this close to 1.
pub const INTERNAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("layer {layer} head {head} row {row}: mass {value} at future key {key}")]
    NotCausal { layer: usize, head: usize, row: usize, key: usize, value: f64 },
    #[error("layer {layer} head {head} row {row}: row sums to {sum}")]
    RowSum { layer: usize, head: usize, row: usize, sum: f64 },
    #[error("layer {layer} head {head} row {row}: weight {value} outside [0, 1]")]
    OutOfRange { layer: usize, head: usize, row: usize, value: f64 },
    #[error("attention maps must be square, got {queries}x{keys}")]
    NotSquare { queries: usize, keys: usize },
    #[error("tensor has no layers or heads")]
    Empty,
}

/// Post-softmax attention weights indexed `[layer][head][query][key]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionTensor {
    weights: Array4<f64>,
}

impl AttentionTensor {
    /// Wraps `weights` after checking causality and row-stochasticity to
    /// [`INGEST_TOLERANCE`].
    pub fn new(weights: Array4<f64>) -> Result<Self, TensorError> {
        let t = AttentionTensor { weights };
        t.check(INGEST_TOLERANCE)?;
        Ok(t)
    }

    pub fn check(&self, tolerance: f64) -> Result<(), TensorError> {
        let (layers, heads, queries, keys) = self.weights.dim();
        if queries != keys {
            return Err(TensorError::NotSquare { queries, keys });
        }
        if layers == 0 || heads == 0 {
            return Err(TensorError::Empty);
        }
        for layer in 0..layers {
            for head in 0..heads {
                check_matrix(self.weights.slice(s![layer, head, .., ..]), tolerance).map_err(|e| e.at(layer, head))?;
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> &Array4<f64> {
        &self.weights
    }

    pub fn n_layers(&self) -> usize {
        self.weights.dim().0
    }

    pub fn n_heads(&self) -> usize {
        self.weights.dim().1
    }

    pub fn seq_len(&self) -> usize {
        self.weights.dim().2
    }
}

impl TensorError {
    fn at(self, layer: usize, head: usize) -> Self {
        match self {
            TensorError::NotCausal { row, key, value, .. } => TensorError::NotCausal { layer, head, row, key, value },
            TensorError::RowSum { row, sum, .. } => TensorError::RowSum { layer, head, row, sum },
            TensorError::OutOfRange { row, value, .. } => TensorError::OutOfRange { layer, head, row, value },
            other => other,
        }
    }
}

fn check_matrix(m: ArrayView2<'_, f64>, tolerance: f64) -> Result<(), TensorError> {
    let (queries, keys) = m.dim();
    if queries != keys {
        return Err(TensorError::NotSquare { queries, keys });
    }
    for (row, r) in m.outer_iter().enumerate() {
        let mut sum = 0.0;
        for (key, &value) in r.iter().enumerate() {
            if !(-tolerance..=1.0 + tolerance).contains(&value) {
                return Err(TensorError::OutOfRange { layer: 0, head: 0, row, value });
            }
            if key > row && value.abs() > tolerance {
                return Err(TensorError::NotCausal { layer: 0, head: 0, row, key, value });
            }
            sum += value;
        }
        if (sum - 1.0).abs() > tolerance {
            return Err(TensorError::RowSum { layer: 0, head: 0, row, sum });
        }
    }
    Ok(())
}

/// Mean over heads, one matrix per layer.
pub fn head_average(t: &AttentionTensor) -> Vec<Array2<f64>> {
    t.weights
        .outer_iter()
        .map(|layer| layer.mean_axis(Axis(0)).expect("at least one head"))
        .collect()
}

fn normalize_rows(mut m: Array2<f64>) -> Array2<f64> {
    for mut row in m.outer_iter_mut() {
        let sum = row.sum();
        if sum > 0.0 {
            row /= sum;
        }
    }
    m
}

/// `(m + I)` with every row rescaled to sum to 1.
pub fn residual_mix(m: &Array2<f64>) -> Array2<f64> {
    let n = m.nrows();
    normalize_rows(m + &Array2::<f64>::eye(n))
}

/// How each layer matrix is prepared before the product.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RolloutMode {
    /// Account for the residual stream: `(A + I)` row-normalized.
    #[default]
    Residual,
    /// Use the attention maps as given (rows renormalized only).
    Raw,
}

impl std::str::FromStr for RolloutMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "residual" => Ok(RolloutMode::Residual),
            "raw" => Ok(RolloutMode::Raw),
            other => Err(Error::InvalidInput(format!("unknown rollout mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for RolloutMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RolloutMode::Residual => "residual",
            RolloutMode::Raw => "raw",
        })
    }
}

/// Token-to-token influence after composing all layers.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutMatrix {
    influence: Array2<f64>,
}

impl RolloutMatrix {
    pub fn from_matrix(influence: Array2<f64>) -> Result<Self> {
        check_matrix(influence.view(), INTERNAL_TOLERANCE)?;
        Ok(RolloutMatrix { influence })
    }

    pub fn influence(&self) -> &Array2<f64> {
        &self.influence
    }

    pub fn seq_len(&self) -> usize {
        self.influence.nrows()
    }

    pub fn row(&self, q: usize) -> ndarray::ArrayView1<'_, f64> {
        self.influence.row(q)
    }
}

/// Product `Â_L · … · Â_1` of the prepared layer matrices, given in
/// input-to-output order.
pub fn rollout(layers: &[Array2<f64>], mode: RolloutMode) -> Result<RolloutMatrix> {
    let first = layers.first().ok_or_else(|| Error::Shape("rollout needs at least one layer".into()))?;
    let n = first.nrows();
    let mut acc: Option<Array2<f64>> = None;
    for (l, m) in layers.iter().enumerate() {
        if m.dim() != (n, n) {
            return Err(Error::Shape(format!("layer {l} is {:?}, expected ({n}, {n})", m.dim())));
        }
        // ingested maps are only stochastic to within their storage precision
        let m = normalize_rows(m.clone());
        let prepared = match mode {
            RolloutMode::Residual => residual_mix(&m),
            RolloutMode::Raw => m,
        };
        acc = Some(match acc {
            None => prepared,
            Some(a) => prepared.dot(&a),
        });
    }
    RolloutMatrix::from_matrix(acc.expect("non-empty"))
}

/// Head-average then roll out a whole tensor.
pub fn rollout_tensor(t: &AttentionTensor, mode: RolloutMode) -> Result<RolloutMatrix> {
    rollout(&head_average(t), mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array4};

    fn tensor_from(layers: &[Vec<Array2<f64>>]) -> AttentionTensor {
        let n = layers[0][0].nrows();
        let mut w = Array4::zeros((layers.len(), layers[0].len(), n, n));
        for (l, heads) in layers.iter().enumerate() {
            for (h, m) in heads.iter().enumerate() {
                w.slice_mut(s![l, h, .., ..]).assign(m);
            }
        }
        AttentionTensor::new(w).unwrap()
    }

    #[test]
    fn single_head_average_is_identity_op() {
        let m = array![[1.0, 0.0], [0.3, 0.7]];
        let t = tensor_from(&[vec![m.clone()]]);
        assert_eq!(head_average(&t), vec![m]);
    }

    #[test]
    fn two_heads_average() {
        let a = array![[1.0, 0.0], [1.0, 0.0]];
        let b = array![[1.0, 0.0], [0.0, 1.0]];
        let t = tensor_from(&[vec![a, b]]);
        assert_eq!(head_average(&t)[0], array![[1.0, 0.0], [0.5, 0.5]]);
    }

    #[test]
    fn residual_mix_examples() {
        let eye = Array2::<f64>::eye(3);
        assert_eq!(residual_mix(&eye), eye);
        let m = array![[1.0, 0.0], [1.0, 0.0]];
        assert_eq!(residual_mix(&m), array![[1.0, 0.0], [0.5, 0.5]]);
    }

    #[test]
    fn single_layer_rollout_is_mixed_layer() {
        let m = array![[1.0, 0.0, 0.0], [0.2, 0.8, 0.0], [0.1, 0.1, 0.8]];
        let r = rollout(std::slice::from_ref(&m), RolloutMode::Residual).unwrap();
        assert_eq!(r.influence(), &residual_mix(&m));
        let raw = rollout(std::slice::from_ref(&m), RolloutMode::Raw).unwrap();
        assert_eq!(raw.influence(), &m);
    }

    #[test]
    fn rollout_rejects_bad_shapes() {
        assert!(matches!(rollout(&[], RolloutMode::Raw), Err(Error::Shape(_))));
        let layers = vec![Array2::<f64>::eye(2), Array2::<f64>::eye(3)];
        assert!(matches!(rollout(&layers, RolloutMode::Raw), Err(Error::Shape(_))));
    }

    #[test]
    fn tensor_validation() {
        let mut w = Array4::<f64>::zeros((1, 2, 2, 2));
        w[[0, 0, 0, 0]] = 1.0;
        w[[0, 0, 1, 0]] = 1.0;
        w[[0, 1, 0, 1]] = 1.0;
        w[[0, 1, 1, 1]] = 1.0;
        assert!(matches!(
            AttentionTensor::new(w.clone()),
            Err(TensorError::NotCausal { layer: 0, head: 1, row: 0, key: 1, .. })
        ));
        w[[0, 1, 0, 1]] = 0.0;
        w[[0, 1, 0, 0]] = 0.5;
        assert!(matches!(
            AttentionTensor::new(w.clone()),
            Err(TensorError::RowSum { layer: 0, head: 1, row: 0, .. })
        ));
        w[[0, 1, 0, 0]] = 1.0 + 5e-5;
        let t = AttentionTensor::new(w).unwrap();
        assert_eq!((t.n_layers(), t.n_heads(), t.seq_len()), (1, 2, 2));
        assert_eq!(
            AttentionTensor::new(Array4::zeros((0, 1, 2, 2))),
            Err(TensorError::Empty)
        );
    }

    #[test]
    fn mode_parses() {
        assert_eq!("raw".parse::<RolloutMode>().unwrap(), RolloutMode::Raw);
        assert_eq!(RolloutMode::default().to_string(), "residual");
        assert!("mean".parse::<RolloutMode>().is_err());
    }
}
