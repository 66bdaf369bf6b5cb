//! String reversal: `s0 s1 .. s(L-1) =` -> `s(L-1) .. s0`.

use serde::{Deserialize, Serialize};

use super::{IntRange, Resampler};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sample::Mask;
use crate::token::Token;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReversalConfig {
    pub len_range: IntRange,
    /// Symbols the input is drawn from.
    pub alphabet: String,
}

impl ReversalConfig {
    pub fn validate(&self) -> Result<()> {
        self.len_range.check("len_range", 1)?;
        let symbols = self.symbols();
        let mut unique = symbols.clone();
        unique.sort_unstable();
        unique.dedup();
        if unique.len() != symbols.len() {
            return Err(Error::config("alphabet has repeated symbols"));
        }
        if symbols.len() < 2 {
            return Err(Error::config("alphabet needs at least 2 symbols"));
        }
        if symbols.iter().any(|c| matches!(c, '=' | '+' | '*') || c.is_whitespace()) {
            return Err(Error::config("alphabet may not contain separators or whitespace"));
        }
        Ok(())
    }

    fn symbols(&self) -> Vec<char> {
        self.alphabet.chars().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reversal {
    input: Vec<char>,
}

impl Reversal {
    pub fn new(input: impl Into<Vec<char>>) -> Result<Self> {
        let input = input.into();
        if input.is_empty() || input.contains(&'=') {
            return Err(Error::parse("reversal input must be non-empty and free of '='"));
        }
        Ok(Reversal { input })
    }

    pub(crate) fn generate(cfg: &ReversalConfig, rng: &mut RngStream) -> Self {
        let symbols = cfg.symbols();
        let len = cfg.len_range.sample(rng) as usize;
        let input = (0..len).map(|_| *rng.pick(&symbols)).collect();
        Reversal { input }
    }

    pub(crate) fn parse(prompt: &[Token]) -> Result<Self> {
        match prompt.split_last() {
            Some((last, body)) if last.as_char() == '=' => {
                Reversal::new(body.iter().map(|t| t.as_char()).collect::<Vec<_>>())
            }
            _ => Err(Error::parse("reversal prompt must end with '='")),
        }
    }

    pub(crate) fn prompt(&self) -> Vec<Token> {
        self.input.iter().map(|&c| Token::new(c)).chain([Token::new('=')]).collect()
    }

    pub(crate) fn solve(&self) -> Vec<Token> {
        self.input.iter().rev().map(|&c| Token::new(c)).collect()
    }

    /// Output i copies input L-1-i.
    pub(crate) fn mask(&self) -> Mask {
        let len = self.input.len();
        (0..len).map(|i| vec![len - 1 - i]).collect()
    }

    pub(crate) fn shape(&self) -> Vec<usize> {
        vec![self.input.len()]
    }

    pub(crate) fn perturb(&self, cfg: &ReversalConfig, cells: &mut Resampler<'_>, rng: &mut RngStream) -> Option<Self> {
        let symbols = cfg.symbols();
        let mut next = self.clone();
        for (pos, c) in next.input.iter_mut().enumerate() {
            if cells.redraw(pos, rng) {
                *c = *rng.pick(&symbols);
            }
        }
        Some(next)
    }
}
