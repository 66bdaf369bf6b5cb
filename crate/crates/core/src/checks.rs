//! Randomized checks that reference masks are sufficient and necessary.
//!
//! Sufficiency: take an instance X and a target index i, redraw every input
//! cell outside the mask of i to get Y. When X and Y share their layout,
//! agree on the mask of i and on every referenced value, the answers at i
//! must agree.
//!
//! Necessity: for a reference position p of target i, search for two
//! same-layout instances that agree on the rest of the mask but whose answers
//! at i differ. Finding one shows the mask without p is not sufficient. The
//! search visits up to a fixed number of instances near the sampled one and
//! buckets them by their values on the reduced mask, so any two visited
//! instances may form the pair.

use std::collections::{BTreeSet, HashMap};

use crate::rng::RngStream;
use crate::tasks::{Instance, TaskConfig};
use crate::token::Token;

/// An instance with its rendered sequence and mask.
struct Rendered {
    inst: Instance,
    sequence: Vec<Token>,
    prompt_len: usize,
    target_len: usize,
    mask: Vec<Vec<usize>>,
}

impl Rendered {
    fn new(inst: Instance) -> Self {
        let prompt = inst.prompt();
        let target = inst.solve();
        let mask = inst.mask();
        let prompt_len = prompt.len();
        let target_len = target.len();
        let mut sequence = prompt;
        sequence.extend(target);
        Rendered { inst, sequence, prompt_len, target_len, mask }
    }

    fn answer(&self, i: usize) -> Option<Token> {
        (i < self.target_len).then(|| self.sequence[self.prompt_len + i])
    }

    fn agrees_on(&self, other: &Rendered, positions: &[usize]) -> bool {
        positions
            .iter()
            .all(|&p| self.sequence.get(p).is_some() && self.sequence.get(p) == other.sequence.get(p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficiencyViolation {
    pub seed: u64,
    pub target_index: usize,
    pub prompt: String,
    pub other_prompt: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SufficiencyReport {
    /// Distinct comparable pairs examined.
    pub pairs: usize,
    pub violations: Vec<SufficiencyViolation>,
}

fn text(tokens: &[Token]) -> String {
    crate::token::detokenize(tokens)
}

/// Examine `n_pairs` comparable pairs drawn from `cfg`, seeds from `seed` up.
pub fn check_sufficiency(cfg: &TaskConfig, n_pairs: usize, seed: u64) -> SufficiencyReport {
    let mut report = SufficiencyReport::default();
    let attempt_budget = n_pairs.saturating_mul(100).max(100);
    for k in 0..attempt_budget as u64 {
        if report.pairs >= n_pairs {
            break;
        }
        let s = seed.wrapping_add(k);
        let mut rng = RngStream::new(s);
        let x = Rendered::new(Instance::generate(cfg, &mut rng));
        let i = rng.index(x.target_len);
        let refs = &x.mask[i];
        let frozen: BTreeSet<usize> = refs.iter().copied().collect();
        let Some(y) = x.inst.perturb(cfg, &frozen, &mut rng) else { continue };
        if y == x.inst || y.shape() != x.inst.shape() {
            continue;
        }
        let y = Rendered::new(y);
        if y.mask.get(i) != Some(refs) || !x.agrees_on(&y, refs) {
            continue;
        }
        report.pairs += 1;
        if x.answer(i) != y.answer(i) {
            report.violations.push(SufficiencyViolation {
                seed: s,
                target_index: i,
                prompt: text(&x.sequence[..x.prompt_len]),
                other_prompt: text(&y.sequence[..y.prompt_len]),
            });
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NecessityMiss {
    pub seed: u64,
    pub target_index: usize,
    pub position: usize,
    pub prompt: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NecessityReport {
    pub triples: usize,
    pub witnessed: usize,
    /// Triples whose target token is fixed by layout alone.
    pub structural: usize,
    pub misses: Vec<NecessityMiss>,
}

impl NecessityReport {
    /// Share of examined triples with a witness.
    pub fn rate(&self) -> f64 {
        if self.triples == 0 {
            return 0.0;
        }
        self.witnessed as f64 / self.triples as f64
    }
}

/// Options for [`check_necessity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NecessityOptions {
    pub triples: usize,
    pub trials: usize,
    /// Skip target tokens whose value the layout fixes (separators, shift
    /// zeros); their mask entries anchor position only.
    pub skip_structural: bool,
}

impl Default for NecessityOptions {
    fn default() -> Self {
        NecessityOptions { triples: 1000, trials: 1000, skip_structural: true }
    }
}

/// Sample (instance, target index, reference position) triples and search
/// for a witness pair for each.
pub fn check_necessity(cfg: &TaskConfig, opts: NecessityOptions, seed: u64) -> NecessityReport {
    let mut report = NecessityReport::default();
    let none = BTreeSet::new();
    let mut k = 0u64;
    while report.triples < opts.triples {
        let s = seed.wrapping_add(k);
        k += 1;
        let mut rng = RngStream::new(s);
        let x = Rendered::new(Instance::generate(cfg, &mut rng));
        let i = rng.index(x.target_len);
        if x.inst.structural()[i] {
            report.structural += 1;
            if opts.skip_structural {
                continue;
            }
        }
        let refs = &x.mask[i];
        let p = *rng.pick(refs);
        let rest: Vec<usize> = refs.iter().copied().filter(|&q| q != p).collect();
        let frozen: BTreeSet<usize> = rest.iter().copied().collect();
        let shape = x.inst.shape();
        report.triples += 1;
        // Bucket every visited instance by its values on the reduced mask;
        // two entries in one bucket with different answers form a witness.
        let key = |r: &Rendered| -> Option<Vec<Token>> { rest.iter().map(|&q| r.sequence.get(q).copied()).collect() };
        let mut seen: HashMap<Vec<Token>, Option<Token>> = HashMap::new();
        seen.insert(key(&x).expect("mask inside sequence"), x.answer(i));
        let mut walk = x.inst.clone();
        let found = (0..opts.trials).any(|t| {
            let candidate = match t % 3 {
                0 => x.inst.perturb(cfg, &frozen, &mut rng),
                1 => walk.perturb(cfg, &none, &mut rng),
                _ => walk.perturb(cfg, &frozen, &mut rng),
            };
            let Some(c) = candidate.filter(|c| c.shape() == shape) else { return false };
            if t % 3 == 1 {
                walk = c.clone();
            }
            let c = Rendered::new(c);
            let Some(k) = key(&c) else { return false };
            let answer = c.answer(i);
            match seen.get(&k) {
                Some(&prev) => prev != answer,
                None => {
                    seen.insert(k, answer);
                    false
                }
            }
        });
        if found {
            report.witnessed += 1;
        } else {
            report.misses.push(NecessityMiss {
                seed: s,
                target_index: i,
                position: p,
                prompt: text(&x.sequence[..x.prompt_len]),
            });
        }
    }
    report
}
