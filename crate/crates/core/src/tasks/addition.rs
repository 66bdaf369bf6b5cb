//! Long addition, digits least-significant first.
//!
//! `1240+4335+3440=` reads as 421 + 5334 + 443 and answers `8916` (6198).
//! The answer has one digit per column of the widest operand, followed by the
//! final carry only when it is non-zero.

use serde::{Deserialize, Serialize};

use super::{column_sum_mask, digits_tokens, edge_biased_digit, parse_digit, IntRange, Resampler};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sample::Mask;
use crate::token::Token;

/// More operands than this could push a column carry to 10 or beyond, at
/// which point it can no longer be read off one output digit.
pub const MAX_OPERANDS: usize = 9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditionConfig {
    pub n_operands: usize,
    pub digit_len_range: IntRange,
    /// Pad every operand with high zeros to `digit_len_range.max` digits.
    pub pad_with_zeros: bool,
}

impl AdditionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_OPERANDS).contains(&self.n_operands) {
            return Err(Error::config(format!("n_operands must be in 2..={MAX_OPERANDS}")));
        }
        self.digit_len_range.check("digit_len_range", 1)?;
        if self.digit_len_range.max > 64 {
            return Err(Error::config("digit_len_range.max above 64"));
        }
        Ok(())
    }
}

/// Draw a number of `len` significant digits, LSB first.
pub(crate) fn random_number(len: usize, rng: &mut RngStream) -> Vec<u8> {
    (0..len)
        .map(|k| {
            let lo = if k + 1 == len && len > 1 { 1 } else { 0 };
            rng.range_inclusive(lo, 9) as u8
        })
        .collect()
}

/// Number of significant digits, at least 1.
pub(crate) fn natural_len(digits: &[u8]) -> usize {
    digits.iter().rposition(|&d| d != 0).map_or(1, |p| p + 1)
}

/// Whether a rendered operand could have come from the generator.
pub(crate) fn operand_fits(digits: &[u8], range: &IntRange, padded: bool) -> bool {
    let natural = natural_len(digits);
    let width_ok = if padded {
        digits.len() as u64 == range.max
    } else {
        natural == digits.len()
    };
    width_ok && range.contains(natural as u64)
}

/// Redraw the free digits of one operand placed at `base`.
pub(crate) fn perturb_operand(
    digits: &mut [u8],
    base: usize,
    padded: bool,
    cells: &mut Resampler<'_>,
    rng: &mut RngStream,
) {
    let width = digits.len();
    for (k, d) in digits.iter_mut().enumerate() {
        if cells.redraw(base + k, rng) {
            let lo = if !padded && width > 1 && k + 1 == width { 1 } else { 0 };
            *d = edge_biased_digit(lo, rng);
        }
    }
}

/// Parse digits between separators, LSB first.
pub(crate) fn parse_operand(tokens: &[Token]) -> Result<Vec<u8>> {
    if tokens.is_empty() {
        return Err(Error::parse("empty operand"));
    }
    tokens.iter().map(|&t| parse_digit(t)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Addition {
    /// Rendered operands, LSB first.
    operands: Vec<Vec<u8>>,
}

impl Addition {
    pub(crate) fn generate(cfg: &AdditionConfig, rng: &mut RngStream) -> Self {
        let operands = (0..cfg.n_operands)
            .map(|_| {
                let len = cfg.digit_len_range.sample(rng) as usize;
                let mut digits = random_number(len, rng);
                if cfg.pad_with_zeros {
                    digits.resize(cfg.digit_len_range.max as usize, 0);
                }
                digits
            })
            .collect();
        Addition { operands }
    }

    pub(crate) fn parse(prompt: &[Token]) -> Result<Self> {
        let Some((last, body)) = prompt.split_last() else {
            return Err(Error::parse("empty prompt"));
        };
        if last.as_char() != '=' {
            return Err(Error::parse("addition prompt must end with '='"));
        }
        let operands = body
            .split(|t| t.as_char() == '+')
            .map(parse_operand)
            .collect::<Result<Vec<_>>>()?;
        if !(2..=MAX_OPERANDS).contains(&operands.len()) {
            return Err(Error::parse(format!("addition needs 2..={MAX_OPERANDS} operands")));
        }
        Ok(Addition { operands })
    }

    fn width(&self) -> usize {
        self.operands.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Start position of each operand in the prompt.
    fn offsets(&self) -> Vec<usize> {
        let mut pos = 0;
        self.operands
            .iter()
            .map(|op| {
                let start = pos;
                pos += op.len() + 1;
                start
            })
            .collect()
    }

    pub(crate) fn prompt(&self) -> Vec<Token> {
        let mut out = Vec::new();
        for (j, op) in self.operands.iter().enumerate() {
            if j > 0 {
                out.push(Token::new('+'));
            }
            out.extend(digits_tokens(op));
        }
        out.push(Token::new('='));
        out
    }

    fn prompt_len(&self) -> usize {
        self.operands.iter().map(|op| op.len() + 1).sum()
    }

    fn sum_digits(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.width() + 1);
        let mut carry = 0u32;
        for k in 0..self.width() {
            let column: u32 = self.operands.iter().filter_map(|op| op.get(k)).map(|&d| d as u32).sum();
            let total = column + carry;
            out.push((total % 10) as u8);
            carry = total / 10;
        }
        if carry > 0 {
            debug_assert!(carry < 10);
            out.push(carry as u8);
        }
        out
    }

    pub(crate) fn solve(&self) -> Vec<Token> {
        digits_tokens(&self.sum_digits()).collect()
    }

    pub(crate) fn mask(&self) -> Mask {
        let offsets = self.offsets();
        let columns: Vec<Vec<usize>> = (0..self.width())
            .map(|k| {
                self.operands
                    .iter()
                    .zip(&offsets)
                    .filter(|(op, _)| k < op.len())
                    .map(|(_, &base)| base + k)
                    .collect()
            })
            .collect();
        column_sum_mask(&columns, self.prompt_len(), self.sum_digits().len())
    }

    /// Operand widths; the answer length is free (a final carry may or may
    /// not follow).
    pub(crate) fn shape(&self) -> Vec<usize> {
        self.operands.iter().map(Vec::len).collect()
    }

    pub(crate) fn perturb(&self, cfg: &AdditionConfig, cells: &mut Resampler<'_>, rng: &mut RngStream) -> Option<Self> {
        let mut next = self.clone();
        let offsets = self.offsets();
        for (op, &base) in next.operands.iter_mut().zip(&offsets) {
            perturb_operand(op, base, cfg.pad_with_zeros, cells, rng);
        }
        next.operands
            .iter()
            .all(|op| operand_fits(op, &cfg.digit_len_range, cfg.pad_with_zeros))
            .then_some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::{detokenize, tokenize_chars};

    fn parse(s: &str) -> Addition {
        Addition::parse(&tokenize_chars(s).unwrap()).unwrap()
    }

    #[test]
    fn table_row() {
        assert_eq!(detokenize(&parse("1240+4335+3440=").solve()), "8916");
    }

    #[test]
    fn zero_plus_zero() {
        let a = parse("0+0=");
        assert_eq!(detokenize(&a.solve()), "0");
        assert_eq!(a.mask(), vec![vec![0, 2]]);
    }

    #[test]
    fn first_digit_references_only_column_zero() {
        let a = parse("12+34=");
        assert_eq!(a.mask()[0], vec![0, 3]);
    }

    #[test]
    fn carry_digits_reference_previous_column() {
        // 99 + 99 = 198 -> "891"; prompt "99+99=" has length 6
        let a = parse("99+99=");
        assert_eq!(detokenize(&a.solve()), "891");
        let m = a.mask();
        assert_eq!(m[1], vec![0, 1, 3, 4]);
        // final carry: top column and output digit 1
        assert_eq!(m[2], vec![1, 4, 7]);
    }

    #[test]
    fn uneven_operands() {
        // 5 + 999 = 1004 -> "4001"
        let a = parse("5+999=");
        assert_eq!(detokenize(&a.solve()), "4001");
        let m = a.mask();
        assert_eq!(m[0], vec![0, 2]);
        assert_eq!(m[1], vec![0, 2, 3]);
        assert_eq!(m[2], vec![3, 4, 7]);
        assert_eq!(m[3], vec![4, 8]);
    }

    #[test]
    fn malformed() {
        for bad in ["12+34", "12+=", "1=", "1a+2=", "1+2+3+4+5+6+7+8+9+1="] {
            assert!(Addition::parse(&tokenize_chars(bad).unwrap()).is_err(), "{bad}");
        }
    }

    #[test]
    fn padding_extends_to_max() {
        let cfg = AdditionConfig {
            n_operands: 3,
            digit_len_range: IntRange::new(1, 4),
            pad_with_zeros: true,
        };
        let mut rng = RngStream::new(1);
        for _ in 0..50 {
            let a = Addition::generate(&cfg, &mut rng);
            assert!(a.operands.iter().all(|op| op.len() == 4));
            assert!(a.operands.iter().all(|op| operand_fits(op, &cfg.digit_len_range, true)));
        }
    }
}
