//! Long multiplication with written partial products, LSB first.
//!
//! `9900*9900=` (99 x 99) answers `1980+0198+0000+0000=1089`: one partial
//! product per multiplier digit, shifted by its place and zero-padded to the
//! width of the final product, then the product itself.

use serde::{Deserialize, Serialize};

use super::addition::{natural_len, operand_fits, parse_operand, perturb_operand, random_number};
use super::{column_sum_mask, digits_tokens, IntRange, Resampler};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sample::Mask;
use crate::token::Token;

/// Partial products summed per column; see `addition::MAX_OPERANDS`.
pub const MAX_DIGITS: u64 = 9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicationConfig {
    pub digit_len_range: IntRange,
    pub pad_with_zeros: bool,
}

impl MultiplicationConfig {
    pub fn validate(&self) -> Result<()> {
        self.digit_len_range.check("digit_len_range", 1)?;
        if self.digit_len_range.max > MAX_DIGITS {
            return Err(Error::config(format!("digit_len_range.max above {MAX_DIGITS}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiplication {
    multiplicand: Vec<u8>,
    multiplier: Vec<u8>,
}

/// Layout of the answer, derived once per instance.
struct Layout {
    /// Unshifted partial product digits, `multiplicand.len() + 1` each.
    rows: Vec<Vec<u8>>,
    product: Vec<u8>,
    /// Width of every written number in the answer.
    width: usize,
}

impl Multiplication {
    pub(crate) fn generate(cfg: &MultiplicationConfig, rng: &mut RngStream) -> Self {
        let mut draw = || {
            let len = cfg.digit_len_range.sample(rng) as usize;
            let mut digits = random_number(len, rng);
            if cfg.pad_with_zeros {
                digits.resize(cfg.digit_len_range.max as usize, 0);
            }
            digits
        };
        let multiplicand = draw();
        let multiplier = draw();
        Multiplication { multiplicand, multiplier }
    }

    pub(crate) fn parse(prompt: &[Token]) -> Result<Self> {
        let Some((last, body)) = prompt.split_last() else {
            return Err(Error::parse("empty prompt"));
        };
        if last.as_char() != '=' {
            return Err(Error::parse("multiplication prompt must end with '='"));
        }
        let parts: Vec<&[Token]> = body.split(|t| t.as_char() == '*').collect();
        let [a, b] = parts.as_slice() else {
            return Err(Error::parse("multiplication needs exactly two operands"));
        };
        let multiplier = parse_operand(b)?;
        if multiplier.len() as u64 > MAX_DIGITS {
            return Err(Error::parse(format!("multiplier longer than {MAX_DIGITS} digits")));
        }
        Ok(Multiplication {
            multiplicand: parse_operand(a)?,
            multiplier,
        })
    }

    fn layout(&self) -> Layout {
        let wa = self.multiplicand.len();
        let rows: Vec<Vec<u8>> = self
            .multiplier
            .iter()
            .map(|&b| {
                let mut row = Vec::with_capacity(wa + 1);
                let mut carry = 0u32;
                for &a in &self.multiplicand {
                    let t = a as u32 * b as u32 + carry;
                    row.push((t % 10) as u8);
                    carry = t / 10;
                }
                row.push(carry as u8);
                row
            })
            .collect();
        let full = wa + self.multiplier.len() + 1;
        let mut product = Vec::with_capacity(full);
        let mut carry = 0u32;
        for k in 0..full {
            let column: u32 = rows
                .iter()
                .enumerate()
                .filter_map(|(j, row)| k.checked_sub(j).and_then(|m| row.get(m)))
                .map(|&d| d as u32)
                .sum();
            let t = column + carry;
            product.push((t % 10) as u8);
            carry = t / 10;
        }
        debug_assert_eq!(carry, 0);
        let width = natural_len(&product);
        product.truncate(width);
        Layout { rows, product, width }
    }

    /// Digit `k` of partial product `j` as written, or `None` when the cell
    /// is a shift or overflow zero.
    fn row_cell(&self, j: usize, k: usize) -> Option<usize> {
        let m = k.checked_sub(j)?;
        (m <= self.multiplicand.len()).then_some(m)
    }

    fn prompt_len(&self) -> usize {
        self.multiplicand.len() + self.multiplier.len() + 2
    }

    fn multiplier_pos(&self, j: usize) -> usize {
        self.multiplicand.len() + 1 + j
    }

    pub(crate) fn prompt(&self) -> Vec<Token> {
        let mut out: Vec<Token> = digits_tokens(&self.multiplicand).collect();
        out.push(Token::new('*'));
        out.extend(digits_tokens(&self.multiplier));
        out.push(Token::new('='));
        out
    }

    pub(crate) fn solve(&self) -> Vec<Token> {
        let layout = self.layout();
        let mut out = Vec::new();
        for (j, row) in layout.rows.iter().enumerate() {
            for k in 0..layout.width {
                let d = self.row_cell(j, k).map_or(0, |m| row[m]);
                out.push(Token::from_digit(d));
            }
            debug_assert!((layout.width..self.multiplicand.len() + 1 + j)
                .all(|k| self.row_cell(j, k).map_or(0, |m| row[m]) == 0));
            let sep = if j + 1 == layout.rows.len() { '=' } else { '+' };
            out.push(Token::new(sep));
        }
        out.extend(digits_tokens(&layout.product));
        out
    }

    /// Partial-product digit m of row j depends on multiplier digit j,
    /// multiplicand digits m and m-1, and the row's previous digit (its carry
    /// witness) from m = 2 on; the carry into m = 1 is fixed by a0 * bj alone.
    /// Shift/overflow zeros reference multiplier digit j, separators the digit
    /// before them. Final digits follow column addition over the live
    /// partial-product cells.
    pub(crate) fn mask(&self) -> Mask {
        let layout = self.layout();
        let width = layout.width;
        let stride = width + 1;
        let base = self.prompt_len();
        let wa = self.multiplicand.len();
        let mut mask = Vec::new();
        for j in 0..self.multiplier.len() {
            let row_base = base + j * stride;
            for k in 0..width {
                let mut refs = vec![self.multiplier_pos(j)];
                if let Some(m) = self.row_cell(j, k) {
                    if m < wa {
                        refs.push(m);
                    }
                    if m >= 1 {
                        refs.push(m - 1);
                    }
                    if m >= 2 {
                        refs.push(row_base + k - 1);
                    }
                }
                refs.sort_unstable();
                mask.push(refs);
            }
            mask.push(vec![row_base + width - 1]);
        }
        let columns: Vec<Vec<usize>> = (0..width)
            .map(|k| {
                (0..self.multiplier.len())
                    .filter(|&j| self.row_cell(j, k).is_some())
                    .map(|j| base + j * stride + k)
                    .collect()
            })
            .collect();
        let out_base = base + self.multiplier.len() * stride;
        mask.extend(column_sum_mask(&columns, out_base, width));
        mask
    }

    pub(crate) fn structural(&self) -> Vec<bool> {
        let width = self.layout().width;
        let natural = |d: &[u8]| d.len() == 1 || d.last() != Some(&0);
        let multi_digit = self.multiplicand.len().max(self.multiplier.len()) > 1;
        if width == 1 && multi_digit && natural(&self.multiplicand) && natural(&self.multiplier) {
            // only a zero factor keeps the product of an unpadded multi-digit factor at one digit
            return vec![true; self.solve().len()];
        }
        let mut flags = Vec::new();
        for j in 0..self.multiplier.len() {
            flags.extend((0..width).map(|k| self.row_cell(j, k).is_none()));
            flags.push(true);
        }
        flags.extend(std::iter::repeat_n(false, width));
        flags
    }

    pub(crate) fn shape(&self) -> Vec<usize> {
        vec![self.multiplicand.len(), self.multiplier.len(), self.layout().width]
    }

    pub(crate) fn perturb(
        &self,
        cfg: &MultiplicationConfig,
        cells: &mut Resampler<'_>,
        rng: &mut RngStream,
    ) -> Option<Self> {
        let mut next = self.clone();
        let b_base = self.multiplicand.len() + 1;
        perturb_operand(&mut next.multiplicand, 0, cfg.pad_with_zeros, cells, rng);
        perturb_operand(&mut next.multiplier, b_base, cfg.pad_with_zeros, cells, rng);
        let fits = |d: &[u8]| operand_fits(d, &cfg.digit_len_range, cfg.pad_with_zeros);
        (fits(&next.multiplicand) && fits(&next.multiplier)).then_some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::{detokenize, tokenize_chars};

    fn parse(s: &str) -> Multiplication {
        Multiplication::parse(&tokenize_chars(s).unwrap()).unwrap()
    }

    #[test]
    fn table_row() {
        assert_eq!(detokenize(&parse("9900*9900=").solve()), "1980+0198+0000+0000=1089");
    }

    #[test]
    fn one_times_one() {
        let m = parse("1*1=");
        assert_eq!(detokenize(&m.solve()), "1=1");
        // prompt "1*1=" is 4 long: row digit at 4, '=' at 5, product at 6
        assert_eq!(m.mask(), vec![vec![0, 2], vec![4], vec![4]]);
    }

    #[test]
    fn row_masks() {
        // 25 * 3 = 75: row "57" then width 2 product "57"
        let m = parse("52*3=");
        assert_eq!(detokenize(&m.solve()), "57=57");
        let mask = m.mask();
        // b0 at 3; row digit 0: {a0, b0}; digit 1: {a1, a0, b0}
        assert_eq!(mask[0], vec![0, 3]);
        assert_eq!(mask[1], vec![0, 1, 3]);
        assert_eq!(mask[2], vec![6]);
    }

    #[test]
    fn zero_product_is_fixed_by_layout() {
        assert!(parse("53*0=").structural().iter().all(|&f| f));
        assert!(!parse("0*5=").structural().iter().all(|&f| f));
        assert!(!parse("30*00=").structural().iter().all(|&f| f));
    }

    #[test]
    fn shift_zeros_are_structural() {
        let m = parse("9900*9900=");
        let flags = m.structural();
        let text: Vec<char> = detokenize(&m.solve()).chars().collect();
        assert_eq!(flags.len(), text.len());
        // row 1 starts at index 5 with a shift zero
        assert!(flags[5]);
        assert!(!flags[6]);
        // separators
        for (i, c) in text.iter().enumerate() {
            if matches!(c, '+' | '=') {
                assert!(flags[i]);
            }
        }
        // product digits never structural
        assert!(flags[flags.len() - 4..].iter().all(|f| !f));
    }

    #[test]
    fn malformed() {
        for bad in ["12*34", "12=", "1*2*3=", "*2=", "1*1234567890="] {
            assert!(Multiplication::parse(&tokenize_chars(bad).unwrap()).is_err(), "{bad}");
        }
    }
}
