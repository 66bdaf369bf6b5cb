//! The six task generators.
//!
//! Each task lives in its own module as an instance type: a structured,
//! already-valid problem that renders to prompt tokens, target tokens and a
//! reference mask. Everything else in this module dispatches over the task id.
//!
//! Conventions shared by all tasks:
//! - one token per character, no whitespace tokens;
//! - `+`, `*` and `=` are structural separators and never appear in a mask;
//! - mask positions index the concatenation prompt ++ target.

mod addition;
mod fflm;
mod multiplication;
mod reversal;
mod successor;
mod value_assignment;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sample::{check_mask, Mask, Sample, Split, TaskId};
use crate::token::Token;

pub use addition::{Addition, AdditionConfig};
pub use fflm::{Fflm, FflmConfig};
pub use multiplication::{Multiplication, MultiplicationConfig};
pub use reversal::{Reversal, ReversalConfig};
pub use successor::{Successor, SuccessorConfig};
pub use value_assignment::{ValueAssignment, ValueAssignmentConfig};

/// Inclusive integer range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: u64,
    pub max: u64,
}

impl IntRange {
    pub const fn new(min: u64, max: u64) -> Self {
        IntRange { min, max }
    }

    pub const fn exactly(v: u64) -> Self {
        IntRange { min: v, max: v }
    }

    pub fn contains(&self, v: u64) -> bool {
        self.min <= v && v <= self.max
    }

    pub(crate) fn sample(&self, rng: &mut RngStream) -> u64 {
        rng.range_inclusive(self.min, self.max)
    }

    pub(crate) fn check(&self, name: &str, floor: u64) -> Result<()> {
        if self.min > self.max {
            return Err(Error::config(format!("{name}: min {} > max {}", self.min, self.max)));
        }
        if self.min < floor {
            return Err(Error::config(format!("{name}: min must be at least {floor}")));
        }
        Ok(())
    }
}

/// Task-specific difficulty knobs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskParams {
    Reversal(ReversalConfig),
    Addition(AdditionConfig),
    Multiplication(MultiplicationConfig),
    Fflm(FflmConfig),
    ValueAssignment(ValueAssignmentConfig),
    Successor(SuccessorConfig),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskConfig {
    pub split: Split,
    #[serde(flatten)]
    pub params: TaskParams,
}

impl TaskConfig {
    pub fn task(&self) -> TaskId {
        match self.params {
            TaskParams::Reversal(_) => TaskId::Reversal,
            TaskParams::Addition(_) => TaskId::Addition,
            TaskParams::Multiplication(_) => TaskId::Multiplication,
            TaskParams::Fflm(_) => TaskId::Fflm,
            TaskParams::ValueAssignment(_) => TaskId::ValueAssignment,
            TaskParams::Successor(_) => TaskId::Successor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.params {
            TaskParams::Reversal(c) => c.validate(),
            TaskParams::Addition(c) => c.validate(),
            TaskParams::Multiplication(c) => c.validate(),
            TaskParams::Fflm(c) => c.validate(),
            TaskParams::ValueAssignment(c) => c.validate(),
            TaskParams::Successor(c) => c.validate(),
        }
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let hash = Sha256::digest(json.as_bytes());
        hex::encode(&hash[..8])
    }
}

const ALPHANUMERIC: &str = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
const LETTERS: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

/// The in- and out-of-distribution parameter sets used for evaluation.
pub fn preset_config(task: TaskId, split: Split) -> TaskConfig {
    let ood = split == Split::Ood;
    let params = match task {
        TaskId::Reversal => TaskParams::Reversal(ReversalConfig {
            len_range: if ood { IntRange::new(11, 50) } else { IntRange::new(1, 10) },
            alphabet: ALPHANUMERIC.into(),
        }),
        TaskId::Addition => TaskParams::Addition(AdditionConfig {
            n_operands: 2,
            digit_len_range: if ood { IntRange::new(5, 10) } else { IntRange::new(1, 4) },
            pad_with_zeros: false,
        }),
        TaskId::Multiplication => TaskParams::Multiplication(MultiplicationConfig {
            digit_len_range: if ood { IntRange::new(4, 6) } else { IntRange::new(1, 3) },
            pad_with_zeros: false,
        }),
        TaskId::Fflm => TaskParams::Fflm(FflmConfig {
            n_registers: 2,
            n_commands_range: if ood { IntRange::new(11, 100) } else { IntRange::exactly(10) },
            use_flip: true,
        }),
        TaskId::ValueAssignment => TaskParams::ValueAssignment(ValueAssignmentConfig {
            n_tuples_range: if ood { IntRange::new(10, 50) } else { IntRange::exactly(5) },
            string_len_range: if ood { IntRange::new(10, 20) } else { IntRange::exactly(5) },
            input_alphabet: LETTERS.into(),
            output_alphabet: "01".into(),
        }),
        TaskId::Successor => TaskParams::Successor(SuccessorConfig {
            start_range: if ood { IntRange::new(100, 900) } else { IntRange::new(1, 90) },
            series_len_range: if ood { IntRange::new(5, 6) } else { IntRange::new(2, 4) },
        }),
    };
    TaskConfig { split, params }
}

/// A concrete, valid problem of one of the six tasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Reversal(Reversal),
    Addition(Addition),
    Multiplication(Multiplication),
    Fflm(Fflm),
    ValueAssignment(ValueAssignment),
    Successor(Successor),
}

macro_rules! dispatch {
    ($inst:expr, $x:ident => $body:expr) => {
        match $inst {
            Instance::Reversal($x) => $body,
            Instance::Addition($x) => $body,
            Instance::Multiplication($x) => $body,
            Instance::Fflm($x) => $body,
            Instance::ValueAssignment($x) => $body,
            Instance::Successor($x) => $body,
        }
    };
}

impl Instance {
    pub fn generate(cfg: &TaskConfig, rng: &mut RngStream) -> Instance {
        match &cfg.params {
            TaskParams::Reversal(c) => Instance::Reversal(Reversal::generate(c, rng)),
            TaskParams::Addition(c) => Instance::Addition(Addition::generate(c, rng)),
            TaskParams::Multiplication(c) => Instance::Multiplication(Multiplication::generate(c, rng)),
            TaskParams::Fflm(c) => Instance::Fflm(Fflm::generate(c, rng)),
            TaskParams::ValueAssignment(c) => Instance::ValueAssignment(ValueAssignment::generate(c, rng)),
            TaskParams::Successor(c) => Instance::Successor(Successor::generate(c, rng)),
        }
    }

    /// Recover an instance from its prompt. `target_len` is only consulted by
    /// tasks whose prompt does not fix the answer length (successor).
    pub fn parse(task: TaskId, prompt: &[Token], target_len: Option<usize>) -> Result<Instance> {
        if prompt.is_empty() {
            return Err(Error::parse("empty prompt"));
        }
        Ok(match task {
            TaskId::Reversal => Instance::Reversal(Reversal::parse(prompt)?),
            TaskId::Addition => Instance::Addition(Addition::parse(prompt)?),
            TaskId::Multiplication => Instance::Multiplication(Multiplication::parse(prompt)?),
            TaskId::Fflm => Instance::Fflm(Fflm::parse(prompt)?),
            TaskId::ValueAssignment => Instance::ValueAssignment(ValueAssignment::parse(prompt)?),
            TaskId::Successor => Instance::Successor(Successor::parse(prompt, target_len)?),
        })
    }

    pub fn task(&self) -> TaskId {
        match self {
            Instance::Reversal(_) => TaskId::Reversal,
            Instance::Addition(_) => TaskId::Addition,
            Instance::Multiplication(_) => TaskId::Multiplication,
            Instance::Fflm(_) => TaskId::Fflm,
            Instance::ValueAssignment(_) => TaskId::ValueAssignment,
            Instance::Successor(_) => TaskId::Successor,
        }
    }

    pub fn prompt(&self) -> Vec<Token> {
        dispatch!(self, x => x.prompt())
    }

    /// The unique correct answer.
    pub fn solve(&self) -> Vec<Token> {
        dispatch!(self, x => x.solve())
    }

    pub fn mask(&self) -> Mask {
        dispatch!(self, x => x.mask())
    }

    /// Layout signature. Two instances with equal shapes place every prompt
    /// token, and every target token at a shared index, at the same position.
    pub fn shape(&self) -> Vec<usize> {
        dispatch!(self, x => x.shape())
    }

    /// Target tokens whose value is fixed by the layout alone (separators,
    /// shift zeros). Their mask entry is a positional anchor.
    pub fn structural(&self) -> Vec<bool> {
        match self {
            Instance::Multiplication(m) => m.structural(),
            other => vec![false; other.solve().len()],
        }
    }

    /// A random neighbour with the same prompt layout, resampling input cells
    /// outside `frozen`. `None` when the draw violates the config.
    pub fn perturb(&self, cfg: &TaskConfig, frozen: &BTreeSet<usize>, rng: &mut RngStream) -> Option<Instance> {
        let mut cells = Resampler::new(frozen, rng);
        match (self, &cfg.params) {
            (Instance::Reversal(x), TaskParams::Reversal(c)) => x.perturb(c, &mut cells, rng).map(Instance::Reversal),
            (Instance::Addition(x), TaskParams::Addition(c)) => x.perturb(c, &mut cells, rng).map(Instance::Addition),
            (Instance::Multiplication(x), TaskParams::Multiplication(c)) => {
                x.perturb(c, &mut cells, rng).map(Instance::Multiplication)
            }
            (Instance::Fflm(x), TaskParams::Fflm(c)) => x.perturb(c, &mut cells, rng).map(Instance::Fflm),
            (Instance::ValueAssignment(x), TaskParams::ValueAssignment(c)) => {
                x.perturb(c, &mut cells, rng).map(Instance::ValueAssignment)
            }
            (Instance::Successor(x), TaskParams::Successor(c)) => x.perturb(c, &mut cells, rng).map(Instance::Successor),
            _ => None,
        }
    }

    pub fn to_sample(&self, split: Split, seed: u64, config_digest: String) -> Sample {
        Sample {
            task: self.task(),
            split,
            seed,
            prompt: self.prompt(),
            target: self.solve(),
            mask: self.mask(),
            config_digest,
        }
    }
}

/// Decides which input cells a perturbation redraws.
pub(crate) struct Resampler<'a> {
    frozen: &'a BTreeSet<usize>,
    rate: u64,
}

impl<'a> Resampler<'a> {
    fn new(frozen: &'a BTreeSet<usize>, rng: &mut RngStream) -> Self {
        // redraw probability 1/rate, rate in {1, 2, 4, 8}
        Resampler {
            frozen,
            rate: 1 << rng.below(4),
        }
    }

    pub(crate) fn is_frozen(&self, position: usize) -> bool {
        self.frozen.contains(&position)
    }

    pub(crate) fn redraw(&mut self, position: usize, rng: &mut RngStream) -> bool {
        !self.frozen.contains(&position) && rng.chance(1, self.rate)
    }
}

/// Uniform digit in `lo..=9`, drawn from the edges `{lo, 9}` a third of the
/// time so carry chains show up in perturbation searches.
pub(crate) fn edge_biased_digit(lo: u8, rng: &mut RngStream) -> u8 {
    if rng.chance(1, 3) {
        if rng.coin() {
            lo
        } else {
            9
        }
    } else {
        rng.range_inclusive(lo as u64, 9) as u8
    }
}

pub(crate) fn parse_digit(t: Token) -> Result<u8> {
    t.digit()
        .ok_or_else(|| Error::parse(format!("expected a digit, found {:?}", t.as_char())))
}

pub(crate) fn digits_tokens(digits: &[u8]) -> impl Iterator<Item = Token> + '_ {
    digits.iter().map(|&d| Token::from_digit(d))
}

/// Reference sets for column-wise addition with carries.
///
/// `columns[k]` holds the positions of the digits summed in column k and
/// `out_base` is the absolute position of output digit 0. Output digit k
/// depends on column k, plus, when a carry into k is possible, column k-1 and
/// output digit k-1; the latter only when column k-1 can itself receive a
/// carry (otherwise the column-(k-1) digits already fix the carry). The
/// carry into a column never exceeds 8 as long as at most 9 digits are summed
/// per column, so it is recoverable from column k-1 and output digit k-1.
pub(crate) fn column_sum_mask(columns: &[Vec<usize>], out_base: usize, out_len: usize) -> Mask {
    let mut max_carry = vec![0u64; out_len + 1];
    for k in 0..out_len {
        let live = columns.get(k).map_or(0, |c| c.len()) as u64;
        max_carry[k + 1] = (9 * live + max_carry[k]) / 10;
    }
    (0..out_len)
        .map(|k| {
            let mut refs: Vec<usize> = columns.get(k).cloned().unwrap_or_default();
            if k >= 1 && max_carry[k] > 0 {
                refs.extend(&columns[k - 1]);
                if max_carry[k - 1] > 0 {
                    refs.push(out_base + k - 1);
                }
            }
            refs.sort_unstable();
            refs.dedup();
            refs
        })
        .collect()
}

/// Generate one sample from `cfg` with the stream seeded by `seed`.
pub fn generate(cfg: &TaskConfig, seed: u64) -> Result<Sample> {
    cfg.validate()?;
    let mut rng = RngStream::new(seed);
    Ok(generate_with(cfg, &mut rng, cfg.digest()))
}

pub(crate) fn generate_with(cfg: &TaskConfig, rng: &mut RngStream, digest: String) -> Sample {
    let seed = rng.seed();
    let inst = Instance::generate(cfg, rng);
    let sample = inst.to_sample(cfg.split, seed, digest);
    debug_assert!(check_mask(sample.prompt.len(), sample.target.len(), &sample.mask).is_ok());
    sample
}

/// `n` samples; sample `k` uses seed `seed + k` (wrapping).
pub fn generate_many(cfg: &TaskConfig, n: usize, seed: u64) -> Result<Vec<Sample>> {
    cfg.validate()?;
    let digest = cfg.digest();
    Ok((0..n as u64)
        .map(|k| {
            let mut rng = RngStream::new(seed.wrapping_add(k));
            generate_with(cfg, &mut rng, digest.clone())
        })
        .collect())
}

/// Solve a prompt. `target_len` (in tokens) is required for successor, whose
/// prompt does not say how many numbers to emit, and ignored otherwise.
pub fn solve(task: TaskId, prompt: &[Token], target_len: Option<usize>) -> Result<Vec<Token>> {
    Ok(Instance::parse(task, prompt, target_len)?.solve())
}

/// Recompute the reference mask of a sample from its prompt and target.
pub fn reference_mask(task: TaskId, sample: &Sample) -> Result<Mask> {
    let inst = Instance::parse(task, &sample.prompt, Some(sample.target.len()))?;
    if inst.solve() != sample.target {
        return Err(Error::parse("target is not the solution of the prompt"));
    }
    Ok(inst.mask())
}

/// Build a sample directly from prompt text, e.g. a hand-written instance.
pub fn sample_from_prompt(
    task: TaskId,
    prompt: &[Token],
    target_len: Option<usize>,
    split: Split,
    seed: u64,
    config_digest: impl Into<String>,
) -> Result<Sample> {
    let inst = Instance::parse(task, prompt, target_len)?;
    Ok(inst.to_sample(split, seed, config_digest.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_digests_differ() {
        let mut digests = BTreeSet::new();
        for task in TaskId::ALL {
            for split in Split::ALL {
                let cfg = preset_config(task, split);
                cfg.validate().unwrap();
                assert_eq!(cfg.task(), task);
                digests.insert(cfg.digest());
            }
        }
        assert_eq!(digests.len(), 12);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = preset_config(TaskId::Fflm, Split::Ood);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"task\":\"fflm\""), "{json}");
        let back: TaskConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.digest(), cfg.digest());
    }

    #[test]
    fn generation_is_deterministic() {
        for task in TaskId::ALL {
            let cfg = preset_config(task, Split::Ood);
            let a = generate_many(&cfg, 20, 5).unwrap();
            let b = generate_many(&cfg, 20, 5).unwrap();
            assert_eq!(a, b);
            assert_eq!(generate(&cfg, 7).unwrap(), a[2]);
        }
    }

    #[test]
    fn generated_samples_are_consistent() {
        for task in TaskId::ALL {
            for split in Split::ALL {
                let cfg = preset_config(task, split);
                for s in generate_many(&cfg, 200, 1).unwrap() {
                    crate::sample::validate_mask(&s).unwrap();
                    assert_eq!(solve(task, &s.prompt, Some(s.target.len())).unwrap(), s.target);
                    assert_eq!(reference_mask(task, &s).unwrap(), s.mask);
                }
            }
        }
    }

    #[test]
    fn column_mask_single_operand_has_no_carry() {
        let cols = vec![vec![0], vec![1], vec![2]];
        assert_eq!(column_sum_mask(&cols, 10, 3), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn column_mask_two_operands() {
        // operands at 0..2 and 3..5, output at 10..
        let cols = vec![vec![0, 3], vec![1, 4], vec![2, 5]];
        let m = column_sum_mask(&cols, 10, 4);
        assert_eq!(m[0], vec![0, 3]);
        assert_eq!(m[1], vec![0, 1, 3, 4]);
        assert_eq!(m[2], vec![1, 2, 4, 5, 11]);
        assert_eq!(m[3], vec![2, 5, 12]);
    }

    #[test]
    fn bad_config_is_rejected() {
        let mut cfg = preset_config(TaskId::Addition, Split::Id);
        if let TaskParams::Addition(c) = &mut cfg.params {
            c.digit_len_range = IntRange::new(4, 1);
        }
        assert!(matches!(generate(&cfg, 0), Err(Error::Config(_))));
    }
}
