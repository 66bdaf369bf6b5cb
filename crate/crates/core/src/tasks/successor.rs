//! Successor: continue counting from a start value.
//!
//! `234` with five follow-up numbers answers `235236237238239`. Numbers are
//! written most-significant digit first with no separator. The prompt does
//! not state the series length, so parsing needs the answer length.

use serde::{Deserialize, Serialize};

use super::{edge_biased_digit, parse_digit, IntRange, Resampler};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sample::Mask;
use crate::token::Token;

const MAX_START: u64 = 1_000_000_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessorConfig {
    pub start_range: IntRange,
    /// How many numbers follow the start.
    pub series_len_range: IntRange,
}

impl SuccessorConfig {
    pub fn validate(&self) -> Result<()> {
        self.start_range.check("start_range", 1)?;
        self.series_len_range.check("series_len_range", 1)?;
        if self.start_range.max > MAX_START || self.series_len_range.max > 10_000 {
            return Err(Error::config("successor ranges too large"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Successor {
    start: u64,
    count: usize,
}

fn digits_msb(n: u64) -> Vec<u8> {
    n.to_string().bytes().map(|b| b - b'0').collect()
}

fn digit_count(n: u64) -> usize {
    n.checked_ilog10().map_or(1, |l| l as usize + 1)
}

impl Successor {
    pub fn new(start: u64, count: usize) -> Self {
        Successor { start, count }
    }

    pub(crate) fn generate(cfg: &SuccessorConfig, rng: &mut RngStream) -> Self {
        let start = cfg.start_range.sample(rng);
        let count = cfg.series_len_range.sample(rng) as usize;
        Successor { start, count }
    }

    pub(crate) fn parse(prompt: &[Token], target_len: Option<usize>) -> Result<Self> {
        let digits = prompt.iter().map(|&t| parse_digit(t)).collect::<Result<Vec<_>>>()?;
        if digits.len() > 1 && digits[0] == 0 {
            return Err(Error::parse("leading zero in successor start"));
        }
        if digits.len() > 16 {
            return Err(Error::parse("successor start too large"));
        }
        let start = digits.iter().fold(0u64, |acc, &d| acc * 10 + d as u64);
        let target_len = target_len.ok_or_else(|| Error::parse("successor needs the answer length"))?;
        let mut count = 0;
        let mut len = 0;
        while len < target_len {
            count += 1;
            len += digit_count(start + count as u64);
        }
        if len != target_len || count == 0 {
            return Err(Error::parse(format!(
                "answer length {target_len} does not end on a number boundary"
            )));
        }
        Ok(Successor { start, count })
    }

    fn numbers(&self) -> impl Iterator<Item = u64> {
        let start = self.start;
        (0..=self.count as u64).map(move |k| start + k)
    }

    pub(crate) fn prompt(&self) -> Vec<Token> {
        digits_msb(self.start).into_iter().map(Token::from_digit).collect()
    }

    pub(crate) fn solve(&self) -> Vec<Token> {
        self.numbers()
            .skip(1)
            .flat_map(digits_msb)
            .map(Token::from_digit)
            .collect()
    }

    /// A digit of number m depends on the digit of the same order in m-1 and
    /// every lower-order digit of m-1 (a carry ripples through trailing 9s).
    /// When m gains a digit, each of its digits references all of m-1.
    pub(crate) fn mask(&self) -> Mask {
        let mut mask = Vec::new();
        let mut prev_start = 0;
        let mut prev_len = digit_count(self.start);
        for n in self.numbers().skip(1) {
            let len = digit_count(n);
            let prev_end = prev_start + prev_len;
            for idx in 0..len {
                if len == prev_len {
                    // idx counts from the most significant digit
                    mask.push((prev_start + idx..prev_end).collect());
                } else {
                    mask.push((prev_start..prev_end).collect());
                }
            }
            prev_start = prev_end;
            prev_len = len;
        }
        mask
    }

    /// Only the prompt width fixes positions; the answer grows to the right.
    pub(crate) fn shape(&self) -> Vec<usize> {
        vec![digit_count(self.start)]
    }

    pub(crate) fn perturb(&self, cfg: &SuccessorConfig, cells: &mut Resampler<'_>, rng: &mut RngStream) -> Option<Self> {
        let mut digits = digits_msb(self.start);
        let start = if rng.chance(1, 4) {
            // land some number of the series on a run of trailing 9s
            let m = rng.below(self.count as u64 + 1);
            let nines = rng.range_inclusive(1, digits.len() as u64) as u32;
            let unit = 10u64.pow(nines);
            let n = self.start + m;
            (n - n % unit + unit - 1).checked_sub(m)?
        } else {
            let width = digits.len();
            for (idx, d) in digits.iter_mut().enumerate() {
                if cells.redraw(idx, rng) {
                    *d = edge_biased_digit(if idx == 0 && width > 1 { 1 } else { 0 }, rng);
                }
            }
            digits.iter().fold(0u64, |acc, &d| acc * 10 + d as u64)
        };
        cfg.start_range
            .contains(start)
            .then_some(Successor { start, count: self.count })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::{detokenize, tokenize_chars};

    #[test]
    fn table_row() {
        let s = Successor::parse(&tokenize_chars("234").unwrap(), Some(18)).unwrap();
        assert_eq!(s.count, 6);
        assert_eq!(detokenize(&s.solve()), "235236237238239240");
    }

    #[test]
    fn single_step() {
        let s = Successor::new(1, 1);
        assert_eq!(detokenize(&s.solve()), "2");
        assert_eq!(s.mask(), vec![vec![0]]);
    }

    #[test]
    fn carry_ripples_through_lower_digits() {
        // 239 -> 240: prompt at 0..3
        let s = Successor::new(239, 1);
        assert_eq!(s.mask(), vec![vec![0, 1, 2], vec![1, 2], vec![2]]);
    }

    #[test]
    fn growth_references_whole_previous_number() {
        // 99 -> 100 -> 101
        let s = Successor::new(99, 2);
        assert_eq!(detokenize(&s.solve()), "100101");
        let m = s.mask();
        assert_eq!(&m[..3], &[vec![0, 1], vec![0, 1], vec![0, 1]]);
        assert_eq!(&m[3..], &[vec![2, 3, 4], vec![3, 4], vec![4]]);
        assert_eq!(s.shape(), vec![2]);
    }

    #[test]
    fn parse_needs_boundary() {
        let p = tokenize_chars("9").unwrap();
        assert!(Successor::parse(&p, Some(2)).is_ok());
        assert!(Successor::parse(&p, Some(3)).is_err());
        assert!(Successor::parse(&p, None).is_err());
        assert!(Successor::parse(&tokenize_chars("012").unwrap(), Some(3)).is_err());
    }
}
