//! Flip-flop language modelling over several one-bit registers.
//!
//! The prompt is a list of `op register value` triples with ops `w` (write),
//! `r` (read), `i` (ignore) and `f` (flip), ending in a bare `r register`.
//! Reads inside the prompt show the value they return; `i` and `f` carry a
//! random payload bit that has no effect. The answer is the bit returned by
//! the final read.

use serde::{Deserialize, Serialize};

use super::{IntRange, Resampler};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sample::Mask;
use crate::token::Token;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FflmConfig {
    pub n_registers: u8,
    /// Commands per instance, counting the final read.
    pub n_commands_range: IntRange,
    pub use_flip: bool,
}

impl FflmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=10).contains(&self.n_registers) {
            return Err(Error::config("n_registers must be in 1..=10"));
        }
        self.n_commands_range.check("n_commands_range", 2)
    }

    fn ops(&self) -> &'static [Op] {
        if self.use_flip {
            &[Op::Write, Op::Read, Op::Ignore, Op::Flip]
        } else {
            &[Op::Write, Op::Read, Op::Ignore]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    Write,
    Read,
    Ignore,
    Flip,
}

impl Op {
    fn symbol(self) -> char {
        match self {
            Op::Write => 'w',
            Op::Read => 'r',
            Op::Ignore => 'i',
            Op::Flip => 'f',
        }
    }

    fn from_symbol(c: char) -> Option<Op> {
        Some(match c {
            'w' => Op::Write,
            'r' => Op::Read,
            'i' => Op::Ignore,
            'f' => Op::Flip,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Command {
    op: Op,
    register: u8,
    /// Written bit for `w`, ignored payload for `i`/`f`; unused for reads.
    payload: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fflm {
    /// All commands but the final read.
    body: Vec<Command>,
    query: u8,
}

/// Register file where unwritten registers hold no value.
struct Machine {
    regs: [Option<u8>; 10],
}

impl Machine {
    fn new() -> Self {
        Machine { regs: [None; 10] }
    }

    /// Apply one command; `None` if it reads an unwritten register.
    fn step(&mut self, c: &Command) -> Option<Option<u8>> {
        let reg = &mut self.regs[c.register as usize];
        match c.op {
            Op::Write => *reg = Some(c.payload),
            Op::Flip => *reg = reg.map(|v| v ^ 1),
            Op::Ignore => {}
            Op::Read => return reg.map(Some),
        }
        Some(None)
    }
}

impl Fflm {
    pub(crate) fn generate(cfg: &FflmConfig, rng: &mut RngStream) -> Self {
        loop {
            let n = cfg.n_commands_range.sample(rng) as usize;
            let mut machine = Machine::new();
            let mut body = Vec::with_capacity(n - 1);
            while body.len() < n - 1 {
                let op = *rng.pick(cfg.ops());
                let register = rng.below(cfg.n_registers as u64) as u8;
                let payload = rng.below(2) as u8;
                let c = Command {
                    op,
                    register,
                    payload: if op == Op::Read { 0 } else { payload },
                };
                // reads of unwritten registers are redrawn
                if machine.step(&c).is_some() {
                    body.push(c);
                }
            }
            let written: Vec<u8> = (0..cfg.n_registers).filter(|&r| machine.regs[r as usize].is_some()).collect();
            if !written.is_empty() {
                let query = *rng.pick(&written);
                return Fflm { body, query };
            }
        }
    }

    pub(crate) fn parse(prompt: &[Token]) -> Result<Self> {
        if prompt.len() < 2 || prompt.len() % 3 != 2 {
            return Err(Error::parse("fflm prompt must be triples followed by `r register`"));
        }
        let chars: Vec<char> = prompt.iter().map(|t| t.as_char()).collect();
        let register = |c: char| {
            c.to_digit(10)
                .map(|d| d as u8)
                .ok_or_else(|| Error::parse(format!("bad register {c:?}")))
        };
        let bit = |c: char| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::parse(format!("bad bit {c:?}"))),
        };
        let mut body = Vec::new();
        let mut machine = Machine::new();
        for t in chars[..chars.len() - 2].chunks(3) {
            let op = Op::from_symbol(t[0]).ok_or_else(|| Error::parse(format!("bad command {:?}", t[0])))?;
            let c = Command {
                op,
                register: register(t[1])?,
                payload: bit(t[2])?,
            };
            match machine.step(&c) {
                None => return Err(Error::parse("read of an unwritten register")),
                Some(Some(v)) if v != c.payload => {
                    return Err(Error::parse("in-prompt read shows the wrong value"))
                }
                _ => {}
            }
            body.push(Command {
                payload: if op == Op::Read { 0 } else { c.payload },
                ..c
            });
        }
        if chars[chars.len() - 2] != 'r' {
            return Err(Error::parse("fflm prompt must end with a read"));
        }
        let query = register(chars[chars.len() - 1])?;
        if machine.regs[query as usize].is_none() {
            return Err(Error::parse("final read of an unwritten register"));
        }
        Ok(Fflm { body, query })
    }

    pub(crate) fn prompt(&self) -> Vec<Token> {
        let mut machine = Machine::new();
        let mut out = Vec::with_capacity(3 * self.body.len() + 2);
        for c in &self.body {
            let shown = match machine.step(c) {
                Some(Some(v)) => v,
                _ => c.payload,
            };
            out.push(Token::new(c.op.symbol()));
            out.push(Token::from_digit(c.register));
            out.push(Token::from_digit(shown));
        }
        out.push(Token::new('r'));
        out.push(Token::from_digit(self.query));
        out
    }

    pub(crate) fn solve(&self) -> Vec<Token> {
        let mut machine = Machine::new();
        for c in &self.body {
            machine.step(c);
        }
        let v = machine.regs[self.query as usize].expect("queried register was written");
        vec![Token::from_digit(v)]
    }

    /// Final read's register operand, the bit of the last write to that
    /// register, and every later flip of it (command and operand).
    pub(crate) fn mask(&self) -> Mask {
        let last_write = self
            .body
            .iter()
            .rposition(|c| c.op == Op::Write && c.register == self.query)
            .expect("queried register was written");
        let mut refs = vec![3 * last_write + 2];
        for (idx, c) in self.body.iter().enumerate().skip(last_write + 1) {
            if c.op == Op::Flip && c.register == self.query {
                refs.extend([3 * idx, 3 * idx + 1]);
            }
        }
        refs.push(3 * self.body.len() + 1);
        vec![refs]
    }

    pub(crate) fn shape(&self) -> Vec<usize> {
        vec![self.body.len() + 1]
    }

    pub(crate) fn perturb(&self, cfg: &FflmConfig, cells: &mut Resampler<'_>, rng: &mut RngStream) -> Option<Self> {
        let mut next = self.clone();
        for (idx, c) in next.body.iter_mut().enumerate() {
            if cells.redraw(3 * idx, rng) {
                c.op = *rng.pick(cfg.ops());
            }
            if cells.redraw(3 * idx + 1, rng) {
                c.register = rng.below(cfg.n_registers as u64) as u8;
            }
            if cells.redraw(3 * idx + 2, rng) {
                c.payload = rng.below(2) as u8;
            }
            if c.op == Op::Read {
                c.payload = 0;
            }
        }
        if cells.redraw(3 * self.body.len() + 1, rng) {
            next.query = rng.below(cfg.n_registers as u64) as u8;
        }
        let mut machine = Machine::new();
        if next.body.iter().any(|c| machine.step(c).is_none()) {
            return None;
        }
        machine.regs[next.query as usize]?;
        Some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::{detokenize, tokenize_chars};

    fn parse(s: &str) -> Fflm {
        Fflm::parse(&tokenize_chars(s).unwrap()).unwrap()
    }

    #[test]
    fn table_row() {
        let f = parse("w11i11f10r10f10r1");
        assert_eq!(detokenize(&f.solve()), "1");
        assert_eq!(detokenize(&f.prompt()), "w11i11f10r10f10r1");
        assert_eq!(f.mask(), vec![vec![2, 6, 7, 12, 13, 16]]);
    }

    #[test]
    fn write_then_read() {
        let f = parse("w01r0");
        assert_eq!(detokenize(&f.solve()), "1");
        assert_eq!(f.mask(), vec![vec![2, 4]]);
    }

    #[test]
    fn flips_of_other_registers_are_ignored() {
        let f = parse("w01w10f10r0");
        assert_eq!(detokenize(&f.solve()), "1");
        assert_eq!(f.mask(), vec![vec![2, 10]]);
    }

    #[test]
    fn malformed() {
        for bad in ["r0", "w01r", "w01r1", "w01r00r0", "x01r0", "w02r0"] {
            assert!(Fflm::parse(&tokenize_chars(bad).unwrap()).is_err(), "{bad}");
        }
    }

    #[test]
    fn generated_reads_are_consistent() {
        let cfg = FflmConfig {
            n_registers: 3,
            n_commands_range: IntRange::new(2, 40),
            use_flip: true,
        };
        let mut rng = RngStream::new(11);
        for _ in 0..200 {
            let f = Fflm::generate(&cfg, &mut rng);
            assert_eq!(Fflm::parse(&f.prompt()).unwrap(), f);
        }
    }

    #[test]
    fn no_flip_config_never_flips() {
        let cfg = FflmConfig {
            n_registers: 2,
            n_commands_range: IntRange::exactly(30),
            use_flip: false,
        };
        let mut rng = RngStream::new(2);
        for _ in 0..50 {
            let f = Fflm::generate(&cfg, &mut rng);
            assert!(!detokenize(&f.prompt()).contains('f'));
        }
    }
}
