//! Classical semantics of the two-state token ring.
//!
//! Each node `i` holds one bit `x_i`. Node 0 is privileged when
//! `x_0 == x_{n-1}`; every other node is privileged when `x_i != x_{i-1}`.
//! A move flips the bit of the privileged node. A configuration is
//! legitimate when exactly one node is privileged; that node holds the token.

mod check;
mod demon;

pub use check::{
    check_closure, check_convergence, ClosureReport, ConvergenceAnalysis, ConvergenceReport,
    MoveWitness, MAX_CHECK_SIZE,
};
pub use demon::{run_demon, run_demon_with_faults, DemonPolicy, Trace, TraceEvent, TraceStatus, TraceStep};

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Index of a node in the ring, `0 <= i < n`.
pub type NodeId = usize;

/// Largest ring a [`RingConfig`] can hold.
pub const MAX_RING_SIZE: usize = 64;

/// A full assignment of the ring variables.
///
/// Stored as a basis index with `x_0` as the most significant of `n` bits, so
/// [`RingConfig::index`] is the same number the statevector uses for `|x_0 .. x_{n-1}>`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingConfig {
    n: usize,
    word: u64,
}

impl RingConfig {
    /// All-zero configuration of size `n`.
    pub fn zeros(n: usize) -> Result<Self> {
        check_size(n)?;
        Ok(Self { n, word: 0 })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        check_size(bits.len())?;
        let word = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Ok(Self { n: bits.len(), word })
    }

    /// Configuration whose ket index is `index`.
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        check_size(n)?;
        if n < 64 && index >> n != 0 {
            return Err(Error::InvalidArgument(format!(
                "index {index} does not fit in {n} bits"
            )));
        }
        Ok(Self { n, word: index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> u64 {
        self.word
    }

    /// Value of `x_i`.
    pub fn bit(&self, i: NodeId) -> Result<bool> {
        self.check_node(i)?;
        Ok(self.bit_unchecked(i))
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.bit_unchecked(i)).collect()
    }

    pub fn is_privileged(&self, i: NodeId) -> Result<bool> {
        self.check_node(i)?;
        Ok(self.guard(i))
    }

    /// Ascending list of privileged nodes. Never empty: the count is always odd.
    pub fn privileged_set(&self) -> Vec<NodeId> {
        (0..self.n).filter(|&i| self.guard(i)).collect()
    }

    pub fn privileged_count(&self) -> usize {
        privileged_mask(self.n, self.word).count_ones() as usize
    }

    pub fn is_legitimate(&self) -> bool {
        self.privileged_count() == 1
    }

    /// Executes the rule of node `i`, which must be privileged.
    pub fn apply_move(&self, i: NodeId) -> Result<Self> {
        self.check_node(i)?;
        if !self.guard(i) {
            return Err(Error::NotPrivileged {
                node: i,
                config: self.to_string(),
            });
        }
        Ok(self.flipped(i))
    }

    /// Flips `x_i` regardless of its guard (a transient fault).
    pub fn inject_bit_fault(&self, i: NodeId) -> Result<Self> {
        self.check_node(i)?;
        Ok(self.flipped(i))
    }

    /// Every configuration of an `n`-node ring in index order.
    pub fn all(n: usize) -> Result<impl Iterator<Item = RingConfig>> {
        check_size(n)?;
        if n >= 64 {
            return Err(Error::Capacity {
                what: "enumerated ring size",
                value: n,
                max: 63,
            });
        }
        Ok((0..1u64 << n).map(move |word| RingConfig { n, word }))
    }

    fn check_node(&self, i: NodeId) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::index("ring", i, self.n))
        }
    }

    fn bit_unchecked(&self, i: NodeId) -> bool {
        (self.word >> (self.n - 1 - i)) & 1 == 1
    }

    fn guard(&self, i: NodeId) -> bool {
        if i == 0 {
            self.bit_unchecked(0) == self.bit_unchecked(self.n - 1)
        } else {
            self.bit_unchecked(i) != self.bit_unchecked(i - 1)
        }
    }

    fn flipped(&self, i: NodeId) -> Self {
        Self {
            n: self.n,
            word: self.word ^ node_bit(self.n, i),
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "ring size must be at least 2, got {n}"
        )));
    }
    if n > MAX_RING_SIZE {
        return Err(Error::Capacity {
            what: "ring size",
            value: n,
            max: MAX_RING_SIZE,
        });
    }
    Ok(())
}

/// Word bit holding `x_i`.
pub(crate) fn node_bit(n: usize, i: NodeId) -> u64 {
    1u64 << (n - 1 - i)
}

/// Word whose set bits are the privileged nodes (same bit layout as the config).
pub(crate) fn privileged_mask(n: usize, word: u64) -> u64 {
    let low = if n == 64 { u64::MAX >> 1 } else { (1u64 << (n - 1)) - 1 };
    // bit for x_i (i >= 1) is x_i ^ x_{i-1}
    let diffs = (word ^ (word >> 1)) & low;
    let x0 = (word >> (n - 1)) & 1;
    let x_last = word & 1;
    diffs | ((1 ^ x0 ^ x_last) << (n - 1))
}

impl fmt::Display for RingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.bit_unchecked(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for RingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingConfig({self})")
    }
}

impl FromStr for RingConfig {
    type Err = Error;

    /// Parses a ket-order bitstring such as `"010"`.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "invalid ring bit {other:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

impl Serialize for RingConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
