//! Model predictions and their scoring against the reference answers.

use std::fs;
use std::path::Path;

use refattn_core::{detokenize, Error as CoreError, Sample, Token};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub seed: u64,
    pub config_digest: String,
    /// Predicted answer text, one character per token.
    pub predicted: String,
}

impl Prediction {
    pub fn key(&self) -> String {
        refattn_core::sample_key(&self.config_digest, self.seed)
    }

    /// The reference answer, as a perfect model would emit it.
    pub fn perfect(s: &Sample) -> Self {
        Prediction {
            seed: s.seed,
            config_digest: s.config_digest.clone(),
            predicted: detokenize(&s.target),
        }
    }
}

pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<()> {
    let mut out = String::new();
    for p in preds {
        out.push_str(&serde_json::to_string(p).expect("prediction serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| HarnessError::Record {
                path: path.to_path_buf(),
                line: n + 1,
                source: CoreError::Parse(e.to_string()),
            })
        })
        .collect()
}

/// A prediction scored against its sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub seed: u64,
    pub config_digest: String,
    pub predicted: Vec<Token>,
    /// One flag per target token; positions past the end of the prediction
    /// are wrong.
    pub token_correct: Vec<bool>,
    pub exact_match: bool,
}

impl PredictionRecord {
    pub fn score(sample: &Sample, predicted: &str) -> Self {
        let predicted: Vec<Token> = predicted.chars().map(Token::new).collect();
        let token_correct = sample
            .target
            .iter()
            .enumerate()
            .map(|(i, t)| predicted.get(i) == Some(t))
            .collect();
        PredictionRecord {
            seed: sample.seed,
            config_digest: sample.config_digest.clone(),
            exact_match: predicted == sample.target,
            predicted,
            token_correct,
        }
    }

    pub fn predicted_len(&self) -> usize {
        self.predicted.len()
    }
}

/// Percentage of predictions equal to the full answer.
pub fn exact_match_accuracy(records: &[PredictionRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(CoreError::Stat("no predictions to score".into()).into());
    }
    let hits = records.iter().filter(|r| r.exact_match).count();
    Ok(100.0 * hits as f64 / records.len() as f64)
}

/// Percentage of answer tokens predicted correctly, pooled over records.
pub fn token_accuracy(records: &[PredictionRecord]) -> Result<f64> {
    let total: usize = records.iter().map(|r| r.token_correct.len()).sum();
    if total == 0 {
        return Err(CoreError::Stat("no answer tokens to score".into()).into());
    }
    let hits: usize = records.iter().map(|r| r.token_correct.iter().filter(|&&c| c).count()).sum();
    Ok(100.0 * hits as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use refattn_core::{sample_from_prompt, tokenize_chars, Split, TaskId};

    fn sample() -> Sample {
        sample_from_prompt(TaskId::Reversal, &tokenize_chars("abc=").unwrap(), None, Split::Id, 3, "d").unwrap()
    }

    #[test]
    fn scoring() {
        let s = sample();
        let r = PredictionRecord::score(&s, "cba");
        assert!(r.exact_match);
        assert_eq!(r.token_correct, vec![true; 3]);

        let r = PredictionRecord::score(&s, "cb");
        assert!(!r.exact_match);
        assert_eq!(r.token_correct, vec![true, true, false]);
        assert_eq!(r.predicted_len(), 2);

        let r = PredictionRecord::score(&s, "cbaa");
        assert!(!r.exact_match);
        assert_eq!(r.token_correct, vec![true; 3]);
        assert_eq!(r.predicted_len(), 4);

        let r = PredictionRecord::score(&s, "");
        assert_eq!(r.token_correct, vec![false; 3]);
    }

    #[test]
    fn accuracies() {
        let s = sample();
        let good = PredictionRecord::score(&s, "cba");
        let bad = PredictionRecord::score(&s, "xba");
        assert_eq!(exact_match_accuracy(&[good.clone(), good.clone()]).unwrap(), 100.0);
        assert_eq!(exact_match_accuracy(&[good.clone(), bad.clone()]).unwrap(), 50.0);
        assert!((token_accuracy(&[good, bad]).unwrap() - 500.0 / 6.0).abs() < 1e-12);
        assert!(exact_match_accuracy(&[]).is_err());
    }

    #[test]
    fn engineered_rate() {
        let s = sample();
        let good = PredictionRecord::score(&s, "cba");
        let bad = PredictionRecord::score(&s, "abc");
        let mut records = vec![good; 6573];
        records.extend(vec![bad; 10_000 - 6573]);
        assert!((exact_match_accuracy(&records).unwrap() - 65.73).abs() < 1e-9);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let preds = vec![Prediction::perfect(&sample()), Prediction { seed: 9, config_digest: "e".into(), predicted: "".into() }];
        write_predictions(&path, &preds).unwrap();
        assert_eq!(read_predictions(&path).unwrap(), preds);
    }
}
