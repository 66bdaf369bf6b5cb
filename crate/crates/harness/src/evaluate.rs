//! Accuracy and attention statistics per task and split.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use refattn_core::{
    attention_score_at, rollout_tensor, welch_t, RolloutMode, Sample, ScoreSample, Split, TaskId, WelchResult,
};
use serde::{Deserialize, Serialize};

use crate::dump::{dump_paths, read_dump};
use crate::error::{HarnessError, Result};
use crate::predictions::{exact_match_accuracy, token_accuracy, Prediction, PredictionRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub rollout: RolloutMode,
    pub alpha: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { rollout: RolloutMode::Residual, alpha: 0.05 }
    }
}

/// Attention scores of one outcome group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreGroup {
    pub n: usize,
    /// Mean of per-sample mean scores; `None` for an empty group.
    pub mean: Option<f64>,
}

impl ScoreGroup {
    fn of(values: &[f64]) -> Self {
        ScoreGroup { n: values.len(), mean: mean(values) }
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub task: TaskId,
    pub split: Split,
    pub n_samples: usize,
    pub n_correct: usize,
    pub n_error: usize,
    pub exact_match_pct: f64,
    pub token_accuracy_pct: f64,
    /// Samples with an attention dump.
    pub n_scored: usize,
    pub n_missing_dumps: usize,
    /// Mean over samples of the per-sample mean score.
    pub mean_attention: Option<f64>,
    /// Mean over every scored answer token.
    pub pooled_attention: Option<f64>,
    pub correct: ScoreGroup,
    pub error: ScoreGroup,
    /// Correct vs error groups; absent unless both have two or more samples
    /// and some spread.
    pub welch: Option<WelchResult>,
    pub significant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rollout: String,
    pub entries: Vec<SplitReport>,
}

impl EvalReport {
    pub fn entry(&self, task: TaskId, split: Split) -> Option<&SplitReport> {
        self.entries.iter().find(|e| e.task == task && e.split == split)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| refattn_core::Error::Parse(e.to_string()).into())
    }
}

struct Scored<'a> {
    sample: &'a Sample,
    record: PredictionRecord,
    score: Option<ScoreSample>,
}

fn score_sample(sample: &Sample, dumps: &Path, mode: RolloutMode) -> Result<Option<ScoreSample>> {
    let (header_path, _) = dump_paths(dumps, &sample.key());
    if !header_path.exists() {
        return Ok(None);
    }
    let (header, tensor) = read_dump(&header_path)?;
    let r = rollout_tensor(&tensor, mode)?;
    let score = attention_score_at(&r, sample, header.prefix_len).map_err(|e| HarnessError::Format {
        path: header_path.clone(),
        message: e.to_string(),
    })?;
    Ok(Some(score))
}

/// Score `predictions` against `samples`, reading attention dumps from
/// `dumps` when given. Samples without a prediction are skipped.
pub fn evaluate(
    samples: &[Sample],
    predictions: &[Prediction],
    dumps: Option<&Path>,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let mut by_key: HashMap<String, &Sample> = HashMap::with_capacity(samples.len());
    for s in samples {
        if by_key.insert(s.key(), s).is_some() {
            return Err(HarnessError::Mismatch(format!("dataset has two samples keyed {}", s.key())));
        }
    }
    let mut seen = HashMap::with_capacity(predictions.len());
    let mut pairs = Vec::with_capacity(predictions.len());
    for p in predictions {
        let key = p.key();
        let sample = *by_key
            .get(&key)
            .ok_or_else(|| HarnessError::Mismatch(format!("prediction {key} matches no dataset sample")))?;
        if seen.insert(key.clone(), ()).is_some() {
            return Err(HarnessError::Mismatch(format!("two predictions for {key}")));
        }
        pairs.push((sample, p));
    }
    if pairs.len() < samples.len() {
        warn!("{} dataset samples have no prediction and are skipped", samples.len() - pairs.len());
    }

    let scored: Vec<Scored<'_>> = pairs
        .par_iter()
        .map(|&(sample, p)| {
            let record = PredictionRecord::score(sample, &p.predicted);
            let score = match dumps {
                Some(dir) => score_sample(sample, dir, opts.rollout)?,
                None => None,
            };
            Ok(Scored { sample, record, score })
        })
        .collect::<Result<_>>()?;

    let mut groups: BTreeMap<(TaskId, Split), Vec<&Scored<'_>>> = BTreeMap::new();
    for s in &scored {
        groups.entry((s.sample.task, s.sample.split)).or_default().push(s);
    }
    let entries = groups
        .into_iter()
        .map(|((task, split), items)| split_report(task, split, &items, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport { rollout: opts.rollout.to_string(), entries })
}

fn split_report(task: TaskId, split: Split, items: &[&Scored<'_>], opts: &EvalOptions) -> Result<SplitReport> {
    let records: Vec<PredictionRecord> = items.iter().map(|s| s.record.clone()).collect();
    let n_correct = records.iter().filter(|r| r.exact_match).count();
    let mut correct = Vec::new();
    let mut error = Vec::new();
    let mut pooled = Vec::new();
    for s in items {
        if let Some(score) = &s.score {
            pooled.extend_from_slice(&score.rows);
            if s.record.exact_match { &mut correct } else { &mut error }.push(score.mean);
        }
    }
    let n_scored = correct.len() + error.len();
    let n_missing_dumps = items.len() - n_scored;
    if n_missing_dumps > 0 {
        warn!("{task} {split}: {n_missing_dumps} samples have no attention dump");
    }
    let all: Vec<f64> = correct.iter().chain(&error).copied().collect();
    let welch = if correct.len() >= 2 && error.len() >= 2 { welch_t(&correct, &error).ok() } else { None };
    Ok(SplitReport {
        task,
        split,
        n_samples: items.len(),
        n_correct,
        n_error: items.len() - n_correct,
        exact_match_pct: exact_match_accuracy(&records)?,
        token_accuracy_pct: token_accuracy(&records)?,
        n_scored,
        n_missing_dumps,
        mean_attention: mean(&all),
        pooled_attention: mean(&pooled),
        correct: ScoreGroup::of(&correct),
        error: ScoreGroup::of(&error),
        significant: welch.as_ref().map(|w| w.significant(opts.alpha)),
        welch,
    })
}
