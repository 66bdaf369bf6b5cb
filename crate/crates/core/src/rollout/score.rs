//! Attention mass on reference tokens.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

use super::RolloutMatrix;

/// Per-target scores of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSample {
    pub rows: Vec<f64>,
    pub mean: f64,
}

impl ScoreSample {
    pub fn from_rows(rows: Vec<f64>) -> Self {
        let mean = if rows.is_empty() {
            f64::NAN
        } else {
            rows.iter().sum::<f64>() / rows.len() as f64
        };
        ScoreSample { rows, mean }
    }
}

/// For target token i, the row of the position that predicts it (one before
/// the token itself) summed over the reference positions of i.
pub fn attention_score(r: &RolloutMatrix, s: &Sample) -> Result<ScoreSample> {
    attention_score_at(r, s, 0)
}

/// Like [`attention_score`] for a rollout whose sequence starts with `offset`
/// extra positions (an instruction prefix) before the prompt.
pub fn attention_score_at(r: &RolloutMatrix, s: &Sample, offset: usize) -> Result<ScoreSample> {
    if r.seq_len() != offset + s.seq_len() {
        return Err(Error::Shape(format!(
            "rollout covers {} positions, sample has {} after a prefix of {offset}",
            r.seq_len(),
            s.seq_len()
        )));
    }
    if s.mask.len() != s.target.len() || s.target.is_empty() {
        return Err(Error::Shape("mask must have one non-empty entry per target token".into()));
    }
    let rows = s
        .mask
        .iter()
        .enumerate()
        .map(|(i, refs)| {
            let row = r.row(offset + s.target_position(i) - 1);
            refs.iter().map(|&p| row[offset + p]).sum::<f64>()
        })
        .collect();
    Ok(ScoreSample::from_rows(rows))
}

/// Split sample means into (correct, error) groups.
pub fn group_scores(scores: &[ScoreSample], correct: &[bool]) -> Result<(Vec<f64>, Vec<f64>)> {
    if scores.len() != correct.len() {
        return Err(Error::Shape(format!(
            "{} scores but {} labels",
            scores.len(),
            correct.len()
        )));
    }
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (s, &c) in scores.iter().zip(correct) {
        if c { &mut ok } else { &mut bad }.push(s.mean);
    }
    Ok((ok, bad))
}
