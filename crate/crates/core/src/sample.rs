//! Task instances as stored in datasets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::token::{self, Token};

/// Per target token, the sorted absolute positions (into prompt ++ target)
/// of the tokens it depends on.
pub type Mask = Vec<Vec<usize>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    Reversal,
    Addition,
    Multiplication,
    Fflm,
    ValueAssignment,
    Successor,
}

impl TaskId {
    pub const ALL: [TaskId; 6] = [
        TaskId::Reversal,
        TaskId::Addition,
        TaskId::Multiplication,
        TaskId::Fflm,
        TaskId::ValueAssignment,
        TaskId::Successor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskId::Reversal => "reversal",
            TaskId::Addition => "addition",
            TaskId::Multiplication => "multiplication",
            TaskId::Fflm => "fflm",
            TaskId::ValueAssignment => "value_assignment",
            TaskId::Successor => "successor",
        }
    }

    /// Human-readable label used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            TaskId::Reversal => "String Reversal",
            TaskId::Addition => "Long Addition",
            TaskId::Multiplication => "Long Multiplication",
            TaskId::Fflm => "FFLM",
            TaskId::ValueAssignment => "Value Assignment",
            TaskId::Successor => "Successor",
        }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        TaskId::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| Error::InvalidInput(format!("unknown task {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split {
    #[serde(rename = "ID")]
    Id,
    #[serde(rename = "OOD")]
    Ood,
}

impl Split {
    pub const ALL: [Split; 2] = [Split::Id, Split::Ood];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Id => "ID",
            Split::Ood => "OOD",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ID" => Ok(Split::Id),
            "OOD" => Ok(Split::Ood),
            _ => Err(Error::InvalidInput(format!("unknown split {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub task: TaskId,
    pub split: Split,
    pub seed: u64,
    #[serde(with = "token::as_text")]
    pub prompt: Vec<Token>,
    #[serde(with = "token::as_text")]
    pub target: Vec<Token>,
    pub mask: Mask,
    pub config_digest: String,
}

impl Sample {
    /// Prompt followed by target.
    pub fn sequence(&self) -> Vec<Token> {
        self.prompt.iter().chain(&self.target).copied().collect()
    }

    pub fn seq_len(&self) -> usize {
        self.prompt.len() + self.target.len()
    }

    /// Absolute position of target token `i`.
    pub fn target_position(&self, i: usize) -> usize {
        self.prompt.len() + i
    }

    /// Identifier shared by datasets, prediction files and attention dumps.
    pub fn key(&self) -> String {
        sample_key(&self.config_digest, self.seed)
    }
}

pub fn sample_key(config_digest: &str, seed: u64) -> String {
    format!("{config_digest}-{seed}")
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("mask has {found} entries but target has {expected} tokens")]
    EntryCount { expected: usize, found: usize },

    #[error("mask entry for target {target} is empty")]
    Empty { target: usize },

    #[error("mask entry for target {target} references position {position}, not strictly before {limit}")]
    NotPast {
        target: usize,
        position: usize,
        limit: usize,
    },

    #[error("mask entry for target {target} is not sorted at position {position}")]
    Unsorted { target: usize, position: usize },

    #[error("mask entry for target {target} repeats position {position}")]
    Duplicate { target: usize, position: usize },
}

/// Check the structural mask invariants: one entry per target token, each
/// non-empty, strictly increasing, and strictly before its target.
pub fn validate_mask(s: &Sample) -> Result<(), MaskError> {
    check_mask(s.prompt.len(), s.target.len(), &s.mask)
}

pub(crate) fn check_mask(prompt_len: usize, target_len: usize, mask: &Mask) -> Result<(), MaskError> {
    if mask.len() != target_len {
        return Err(MaskError::EntryCount {
            expected: target_len,
            found: mask.len(),
        });
    }
    for (target, entry) in mask.iter().enumerate() {
        let limit = prompt_len + target;
        if entry.is_empty() {
            return Err(MaskError::Empty { target });
        }
        let mut prev: Option<usize> = None;
        for &position in entry {
            if position >= limit {
                return Err(MaskError::NotPast {
                    target,
                    position,
                    limit,
                });
            }
            match prev {
                Some(p) if p == position => return Err(MaskError::Duplicate { target, position }),
                Some(p) if p > position => return Err(MaskError::Unsorted { target, position }),
                _ => {}
            }
            prev = Some(position);
        }
    }
    Ok(())
}

/// One JSON record, no trailing newline.
pub fn serialize_sample(s: &Sample) -> Result<String> {
    validate_mask(s)?;
    serde_json::to_string(s).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_sample(line: &str) -> Result<Sample> {
    let s: Sample = serde_json::from_str(line.trim_end()).map_err(|e| Error::Parse(e.to_string()))?;
    if s.prompt.is_empty() {
        return Err(Error::parse("empty prompt"));
    }
    validate_mask(&s)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::tokenize_chars;

    fn successor_sample() -> Sample {
        Sample {
            task: TaskId::Successor,
            split: Split::Id,
            seed: 9,
            prompt: tokenize_chars("234").unwrap(),
            target: tokenize_chars("235").unwrap(),
            mask: vec![vec![0], vec![1, 2], vec![2]],
            config_digest: "abc".into(),
        }
    }

    #[test]
    fn round_trip() {
        let s = successor_sample();
        let line = serialize_sample(&s).unwrap();
        assert!(!line.contains('\n'));
        assert_eq!(parse_sample(&line).unwrap(), s);
    }

    #[test]
    fn record_fields() {
        let line = serialize_sample(&successor_sample()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        for k in ["task", "split", "seed", "prompt", "target", "mask", "config_digest"] {
            assert!(keys.contains(&k), "{k} missing from {line}");
        }
        assert_eq!(v["prompt"], "234");
        assert_eq!(v["split"], "ID");
        assert_eq!(v["task"], "successor");
    }

    #[test]
    fn truncated_line_is_parse_error() {
        let line = serialize_sample(&successor_sample()).unwrap();
        let cut = &line[..line.len() - 5];
        assert!(matches!(parse_sample(cut), Err(Error::Parse(_))));
    }

    #[test]
    fn future_reference_is_mask_error() {
        let mut s = successor_sample();
        s.mask[0] = vec![3];
        let line = serde_json::to_string(&s).unwrap();
        assert!(matches!(
            parse_sample(&line),
            Err(Error::Mask(MaskError::NotPast { target: 0, position: 3, .. }))
        ));
        assert!(serialize_sample(&s).is_err());
    }

    #[test]
    fn duplicate_position_is_mask_error() {
        let mut s = successor_sample();
        s.mask[1] = vec![1, 1];
        let line = serde_json::to_string(&s).unwrap();
        assert!(matches!(
            parse_sample(&line),
            Err(Error::Mask(MaskError::Duplicate { target: 1, position: 1 }))
        ));
    }

    #[test]
    fn self_reference_is_rejected() {
        let mut s = successor_sample();
        // target 1 sits at absolute position 4
        s.mask[1] = vec![2, 4];
        assert_eq!(
            validate_mask(&s),
            Err(MaskError::NotPast { target: 1, position: 4, limit: 4 })
        );
    }

    #[test]
    fn empty_entry_and_count() {
        let mut s = successor_sample();
        s.mask[2].clear();
        assert_eq!(validate_mask(&s), Err(MaskError::Empty { target: 2 }));
        s.mask.pop();
        assert!(matches!(validate_mask(&s), Err(MaskError::EntryCount { expected: 3, found: 2 })));
    }

    #[test]
    fn unsorted_entry() {
        let mut s = successor_sample();
        s.mask[1] = vec![2, 1];
        assert_eq!(validate_mask(&s), Err(MaskError::Unsorted { target: 1, position: 1 }));
    }

    #[test]
    fn task_names_parse() {
        for t in TaskId::ALL {
            assert_eq!(t.name().parse::<TaskId>().unwrap(), t);
        }
        assert_eq!("value-assignment".parse::<TaskId>().unwrap(), TaskId::ValueAssignment);
        assert_eq!("ood".parse::<Split>().unwrap(), Split::Ood);
    }
}
