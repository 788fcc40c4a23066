//! Explicit-state model checking over all `2^n` configurations.
//!
//! The transition graph has one edge per privileged move. Closure is checked
//! directly on the legitimate configurations. Convergence under every central
//! demon holds iff the subgraph induced by illegitimate configurations is
//! acyclic; this is decided by repeatedly peeling illegitimate configurations
//! all of whose moves lead to already-resolved configurations. Whatever cannot
//! be peeled can reach an illegitimate cycle.

use std::collections::VecDeque;

use serde::Serialize;

use super::{node_bit, privileged_mask, NodeId, RingConfig};
use crate::error::{Error, Result};

/// Largest ring size the exhaustive checks accept.
pub const MAX_CHECK_SIZE: usize = 20;

const UNBOUNDED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoveWitness {
    pub before: RingConfig,
    pub node: NodeId,
    pub after: RingConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub n: usize,
    pub holds: bool,
    pub counterexample: Option<MoveWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    pub n: usize,
    pub holds: bool,
    /// Longest demon execution from an illegitimate configuration before a
    /// legitimate one is reached. Present iff `holds`.
    pub max_moves_to_legitimate: Option<u32>,
    /// Illegitimate configurations `c_0 -> c_1 -> ... -> c_0`, each step a
    /// privileged move. Present iff not `holds`. The first element is not repeated.
    pub witness_cycle: Option<Vec<RingConfig>>,
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_CHECK_SIZE {
        return Err(Error::Capacity {
            what: "model-checked ring size",
            value: n,
            max: MAX_CHECK_SIZE,
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "ring size must be at least 2, got {n}"
        )));
    }
    Ok(())
}

fn is_legit_word(n: usize, word: u64) -> bool {
    privileged_mask(n, word).count_ones() == 1
}

/// Successor words of `word` under every privileged move.
fn successors(n: usize, word: u64) -> impl Iterator<Item = u64> {
    let mask = privileged_mask(n, word);
    (0..n).filter_map(move |i| {
        let b = node_bit(n, i);
        (mask & b != 0).then_some(word ^ b)
    })
}

/// Predecessor words: configurations with a privileged move into `word`.
fn predecessors(n: usize, word: u64) -> impl Iterator<Item = u64> {
    (0..n).filter_map(move |i| {
        let b = node_bit(n, i);
        let p = word ^ b;
        (privileged_mask(n, p) & b != 0).then_some(p)
    })
}

pub fn check_closure(n: usize) -> Result<ClosureReport> {
    check_capacity(n)?;
    for word in 0..1u64 << n {
        if !is_legit_word(n, word) {
            continue;
        }
        let mask = privileged_mask(n, word);
        let after = word ^ mask;
        if !is_legit_word(n, after) {
            let node = (0..n).find(|&i| node_bit(n, i) == mask).expect("single bit");
            return Ok(ClosureReport {
                n,
                holds: false,
                counterexample: Some(MoveWitness {
                    before: RingConfig { n, word },
                    node,
                    after: RingConfig { n, word: after },
                }),
            });
        }
    }
    Ok(ClosureReport {
        n,
        holds: true,
        counterexample: None,
    })
}

/// Worst-case distance to the legitimate set for every configuration.
#[derive(Debug, Clone)]
pub struct ConvergenceAnalysis {
    n: usize,
    dist: Vec<u32>,
}

impl ConvergenceAnalysis {
    pub fn new(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let size = 1usize << n;
        let mut dist = vec![0u32; size];
        let mut pending = vec![0u32; size];
        let mut queue = VecDeque::new();

        for word in 0..size as u64 {
            if is_legit_word(n, word) {
                continue;
            }
            let out = successors(n, word)
                .filter(|&s| !is_legit_word(n, s))
                .count() as u32;
            pending[word as usize] = out;
            dist[word as usize] = 1;
            if out == 0 {
                queue.push_back(word);
            }
        }

        let mut resolved = vec![false; size];
        while let Some(word) = queue.pop_front() {
            resolved[word as usize] = true;
            let d = dist[word as usize];
            for p in predecessors(n, word) {
                if is_legit_word(n, p) {
                    continue;
                }
                let slot = &mut dist[p as usize];
                *slot = (*slot).max(d + 1);
                pending[p as usize] -= 1;
                if pending[p as usize] == 0 {
                    queue.push_back(p);
                }
            }
        }

        for word in 0..size as u64 {
            if !is_legit_word(n, word) && !resolved[word as usize] {
                dist[word as usize] = UNBOUNDED;
            }
        }
        Ok(Self { n, dist })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Longest number of moves a demon can make from `cfg` before reaching a
    /// legitimate configuration; `None` when it can avoid that forever.
    pub fn distance(&self, cfg: &RingConfig) -> Option<u32> {
        debug_assert_eq!(cfg.n(), self.n);
        match self.dist[cfg.index() as usize] {
            UNBOUNDED => None,
            d => Some(d),
        }
    }

    pub fn holds(&self) -> bool {
        !self.dist.contains(&UNBOUNDED)
    }

    pub fn report(&self) -> ConvergenceReport {
        if self.holds() {
            return ConvergenceReport {
                n: self.n,
                holds: true,
                max_moves_to_legitimate: Some(self.dist.iter().copied().max().unwrap_or(0)),
                witness_cycle: None,
            };
        }
        ConvergenceReport {
            n: self.n,
            holds: false,
            max_moves_to_legitimate: None,
            witness_cycle: Some(self.witness_cycle()),
        }
    }

    /// Walks unbounded configurations until one repeats. Every unbounded
    /// configuration has an unbounded successor, so the walk cannot stop.
    fn witness_cycle(&self) -> Vec<RingConfig> {
        let n = self.n;
        let start = self
            .dist
            .iter()
            .position(|&d| d == UNBOUNDED)
            .expect("unbounded configuration") as u64;
        let mut path = vec![start];
        let mut seen = std::collections::HashMap::from([(start, 0usize)]);
        let mut word = start;
        loop {
            word = successors(n, word)
                .find(|&s| self.dist[s as usize] == UNBOUNDED)
                .expect("unbounded configuration has an unbounded successor");
            if let Some(&at) = seen.get(&word) {
                return path[at..]
                    .iter()
                    .map(|&w| RingConfig { n, word: w })
                    .collect();
            }
            seen.insert(word, path.len());
            path.push(word);
        }
    }
}

pub fn check_convergence(n: usize) -> Result<ConvergenceReport> {
    Ok(ConvergenceAnalysis::new(n)?.report())
}
