//! Value assignment: translate a query symbol by symbol through a table.
//!
//! `B1E0D1A1C0ABBEDACABCD` is the table B->1, E->0, D->1, A->1, C->0 written
//! as key/value pairs, followed by the query `ABBEDACABCD`; the answer is
//! `11101101101`. Keys and values come from disjoint alphabets, so the table
//! ends where a key is followed by another key.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{IntRange, Resampler};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sample::Mask;
use crate::token::Token;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueAssignmentConfig {
    pub n_tuples_range: IntRange,
    pub string_len_range: IntRange,
    pub input_alphabet: String,
    pub output_alphabet: String,
}

impl ValueAssignmentConfig {
    pub fn validate(&self) -> Result<()> {
        self.n_tuples_range.check("n_tuples_range", 1)?;
        self.string_len_range.check("string_len_range", 1)?;
        let input: HashSet<char> = self.input_alphabet.chars().collect();
        let output: HashSet<char> = self.output_alphabet.chars().collect();
        if input.len() != self.input_alphabet.chars().count() || output.len() != self.output_alphabet.chars().count() {
            return Err(Error::config("alphabets may not repeat symbols"));
        }
        if output.is_empty() {
            return Err(Error::config("output alphabet is empty"));
        }
        if !input.is_disjoint(&output) {
            return Err(Error::config("input and output alphabets must be disjoint"));
        }
        if self.n_tuples_range.max > input.len() as u64 {
            return Err(Error::config("more table entries than input symbols"));
        }
        if input.iter().chain(&output).any(|c| matches!(c, '=' | '+' | '*') || c.is_whitespace()) {
            return Err(Error::config("alphabets may not contain separators or whitespace"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueAssignment {
    table: Vec<(char, char)>,
    query: Vec<char>,
}

impl ValueAssignment {
    pub(crate) fn generate(cfg: &ValueAssignmentConfig, rng: &mut RngStream) -> Self {
        let mut keys: Vec<char> = cfg.input_alphabet.chars().collect();
        let values: Vec<char> = cfg.output_alphabet.chars().collect();
        let n = cfg.n_tuples_range.sample(rng) as usize;
        rng.shuffle(&mut keys);
        keys.truncate(n);
        let table: Vec<(char, char)> = keys.iter().map(|&k| (k, *rng.pick(&values))).collect();
        let len = cfg.string_len_range.sample(rng) as usize;
        let query = (0..len).map(|_| *rng.pick(&keys)).collect();
        ValueAssignment { table, query }
    }

    pub(crate) fn parse(prompt: &[Token]) -> Result<Self> {
        let chars: Vec<char> = prompt.iter().map(|t| t.as_char()).collect();
        let mut table = Vec::new();
        let mut keys = HashSet::new();
        let mut pos = 0;
        while pos + 1 < chars.len() && !keys.contains(&chars[pos + 1]) && chars[pos + 1] != chars[pos] {
            if !keys.insert(chars[pos]) {
                return Err(Error::parse(format!("table key {:?} repeated", chars[pos])));
            }
            table.push((chars[pos], chars[pos + 1]));
            pos += 2;
        }
        let query: Vec<char> = chars[pos..].to_vec();
        if table.is_empty() || query.is_empty() {
            return Err(Error::parse("value assignment needs a table and a query"));
        }
        if let Some(c) = query.iter().find(|c| !keys.contains(c)) {
            return Err(Error::parse(format!("query symbol {c:?} missing from the table")));
        }
        let values: HashSet<char> = table.iter().map(|&(_, v)| v).collect();
        if !keys.is_disjoint(&values) {
            return Err(Error::parse("table keys and values overlap"));
        }
        Ok(ValueAssignment { table, query })
    }

    fn lookup(&self) -> HashMap<char, usize> {
        self.table.iter().enumerate().map(|(j, &(k, _))| (k, j)).collect()
    }

    pub(crate) fn prompt(&self) -> Vec<Token> {
        self.table
            .iter()
            .flat_map(|&(k, v)| [k, v])
            .chain(self.query.iter().copied())
            .map(Token::new)
            .collect()
    }

    pub(crate) fn solve(&self) -> Vec<Token> {
        let index = self.lookup();
        self.query.iter().map(|q| Token::new(self.table[index[q]].1)).collect()
    }

    /// Query symbol i, the matching key and its value.
    pub(crate) fn mask(&self) -> Mask {
        let index = self.lookup();
        let query_base = 2 * self.table.len();
        self.query
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let j = index[q];
                vec![2 * j, 2 * j + 1, query_base + i]
            })
            .collect()
    }

    pub(crate) fn shape(&self) -> Vec<usize> {
        vec![self.table.len(), self.query.len()]
    }

    pub(crate) fn perturb(
        &self,
        cfg: &ValueAssignmentConfig,
        cells: &mut Resampler<'_>,
        rng: &mut RngStream,
    ) -> Option<Self> {
        let input: Vec<char> = cfg.input_alphabet.chars().collect();
        let output: Vec<char> = cfg.output_alphabet.chars().collect();
        let mut next = self.clone();
        let n = next.table.len();
        for j in 0..n {
            if cells.redraw(2 * j, rng) {
                let c = *rng.pick(&input);
                // a key already in use swaps places, keeping the table a bijection
                match next.table.iter().position(|&(k, _)| k == c) {
                    Some(other) if other != j && !cells.is_frozen(2 * other) => {
                        let old = next.table[j].0;
                        next.table[other].0 = old;
                        next.table[j].0 = c;
                    }
                    Some(_) => {}
                    None => next.table[j].0 = c,
                }
            }
            if cells.redraw(2 * j + 1, rng) {
                next.table[j].1 = *rng.pick(&output);
            }
        }
        let keys: Vec<char> = next.table.iter().map(|&(k, _)| k).collect();
        let query_base = 2 * n;
        for (i, q) in next.query.iter_mut().enumerate() {
            let pos = query_base + i;
            if cells.redraw(pos, rng) || (!keys.contains(q) && !cells.is_frozen(pos)) {
                *q = *rng.pick(&keys);
            }
        }
        next.query.iter().all(|q| keys.contains(q)).then_some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::{detokenize, tokenize_chars};

    fn parse(s: &str) -> ValueAssignment {
        ValueAssignment::parse(&tokenize_chars(s).unwrap()).unwrap()
    }

    #[test]
    fn table_row() {
        let va = parse("B1E0D1A1C0ABBEDACABCD");
        assert_eq!(va.table.len(), 5);
        assert_eq!(detokenize(&va.solve()), "11101101101");
    }

    #[test]
    fn single_tuple() {
        let va = parse("A0A");
        assert_eq!(detokenize(&va.solve()), "0");
        assert_eq!(va.mask(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn mask_points_at_key_value_and_query() {
        let va = parse("A0B1BA");
        assert_eq!(va.mask(), vec![vec![2, 3, 4], vec![0, 1, 5]]);
    }

    #[test]
    fn malformed() {
        for bad in ["A0", "A0B", "A0A0A", "AB"] {
            assert!(ValueAssignment::parse(&tokenize_chars(bad).unwrap()).is_err(), "{bad}");
        }
    }

    #[test]
    fn generated_instances_reparse() {
        let cfg = ValueAssignmentConfig {
            n_tuples_range: IntRange::new(1, 50),
            string_len_range: IntRange::new(1, 20),
            input_alphabet: "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz".into(),
            output_alphabet: "01".into(),
        };
        cfg.validate().unwrap();
        let mut rng = RngStream::new(5);
        for _ in 0..300 {
            let va = ValueAssignment::generate(&cfg, &mut rng);
            assert_eq!(ValueAssignment::parse(&va.prompt()).unwrap(), va);
        }
    }
}
