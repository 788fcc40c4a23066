//! Exact statevector simulation.
//!
//! Basis index convention: qubit 0 is the most significant bit, so the ket
//! `|q_0 q_1 ... q_{m-1}>` reads left to right as the binary index. Every
//! bitstring produced here (distribution keys, sample outcomes) uses the
//! same order.

mod density;
mod distribution;

pub use density::{entropy, DensityMatrix, MAX_DENSITY_QUBITS};
pub use distribution::{bitstring, Distribution, ShotCounts, PRUNE_THRESHOLD};

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::synth::Circuit;

/// Largest register the dense simulator accepts (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Fires when the control is |1>.
    Positive,
    /// Fires when the control is |0>.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn pos(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Positive,
        }
    }

    pub fn neg(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    /// Rotation about Y by `theta` radians.
    Ry(usize, f64),
    Cx(usize, usize),
    Ccx(usize, usize, usize),
    Mcx { controls: Vec<Control>, target: usize },
}

impl Gate {
    pub fn target(&self) -> usize {
        match *self {
            Gate::H(t) | Gate::X(t) | Gate::Ry(t, _) | Gate::Cx(_, t) | Gate::Ccx(_, _, t) => t,
            Gate::Mcx { target, .. } => target,
        }
    }

    /// Controls as (qubit, polarity); empty for single-qubit gates.
    pub fn controls(&self) -> Vec<Control> {
        match self {
            Gate::H(_) | Gate::X(_) | Gate::Ry(..) => Vec::new(),
            Gate::Cx(c, _) => vec![Control::pos(*c)],
            Gate::Ccx(c1, c2, _) => vec![Control::pos(*c1), Control::pos(*c2)],
            Gate::Mcx { controls, .. } => controls.clone(),
        }
    }

    /// True for gates that permute basis states (X, CX, CCX, MCX).
    pub fn is_permutation(&self) -> bool {
        !matches!(self, Gate::H(_) | Gate::Ry(..))
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let target = self.target();
        if target >= m {
            return Err(Error::index("qubit register", target, m));
        }
        let controls = self.controls();
        for (k, c) in controls.iter().enumerate() {
            if c.qubit >= m {
                return Err(Error::index("qubit register", c.qubit, m));
            }
            if c.qubit == target {
                return Err(Error::InvalidArgument(format!(
                    "qubit {target} is both control and target"
                )));
            }
            if controls[..k].iter().any(|o| o.qubit == c.qubit) {
                return Err(Error::InvalidArgument(format!(
                    "qubit {} appears twice as a control",
                    c.qubit
                )));
            }
        }
        if let Gate::Ry(_, theta) = self {
            if !theta.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite angle {theta}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "h({q})"),
            Gate::X(q) => write!(f, "x({q})"),
            Gate::Ry(q, t) => write!(f, "ry({q}, {t})"),
            Gate::Cx(c, t) => write!(f, "cx({c}, {t})"),
            Gate::Ccx(a, b, t) => write!(f, "ccx({a}, {b}, {t})"),
            Gate::Mcx { controls, target } => {
                write!(f, "mcx(")?;
                for c in controls {
                    let sign = match c.polarity {
                        Polarity::Positive => '+',
                        Polarity::Negative => '-',
                    };
                    write!(f, "{}{sign}, ", c.qubit)?;
                }
                write!(f, "{target})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    m: usize,
    amps: Vec<Complex64>,
}

pub fn init_state(m: usize) -> Result<StateVector> {
    StateVector::new(m)
}

/// Runs `circuit` from the all-zeros state.
pub fn run(circuit: &Circuit) -> Result<StateVector> {
    let mut state = StateVector::new(circuit.num_qubits())?;
    for gate in circuit.gates() {
        state.apply(gate)?;
    }
    Ok(state)
}

impl StateVector {
    /// `|0...0>` on `m` qubits.
    pub fn new(m: usize) -> Result<Self> {
        check_qubits(m)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << m];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { m, amps })
    }

    /// Wraps explicit amplitudes; the length must be a power of two and the
    /// norm 1 within 1e-12.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let m = len.trailing_zeros() as usize;
        check_qubits(m)?;
        let state = Self { m, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized (|psi|^2 = {norm})"
            )));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.m
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Index bit holding qubit `q`.
    fn mask(&self, q: usize) -> usize {
        1 << (self.m - 1 - q)
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.m)?;
        let t = self.mask(gate.target());
        match *gate {
            Gate::H(_) => self.apply_single(t, [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]]),
            Gate::Ry(_, theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                self.apply_single(t, [[c, -s], [s, c]]);
            }
            _ => {
                let (mut care, mut want) = (0usize, 0usize);
                for c in gate.controls() {
                    let b = self.mask(c.qubit);
                    care |= b;
                    if c.polarity == Polarity::Positive {
                        want |= b;
                    }
                }
                for i in 0..self.amps.len() {
                    if i & t == 0 && i & care == want {
                        self.amps.swap(i, i | t);
                    }
                }
            }
        }
        Ok(())
    }

    /// Real 2x2 matrix `u` on the qubit with index bit `t`.
    fn apply_single(&mut self, t: usize, u: [[f64; 2]; 2]) {
        for i in 0..self.amps.len() {
            if i & t != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | t]);
            self.amps[i] = a0 * u[0][0] + a1 * u[0][1];
            self.amps[i | t] = a0 * u[1][0] + a1 * u[1][1];
        }
    }

    /// Probabilities of every basis state, entries below the prune threshold dropped.
    pub fn probabilities(&self) -> Distribution {
        let probs: Vec<f64> = self.amps.iter().map(|a| a.norm_sqr()).collect();
        Distribution::from_dense(self.m, &probs)
    }

    /// Dense marginal over `keep`; entry `k` is the probability that the kept
    /// qubits read the bits of `k` (first kept qubit most significant).
    pub fn marginal_dense(&self, keep: &[usize]) -> Result<Vec<f64>> {
        self.check_keep(keep)?;
        let masks: Vec<usize> = keep.iter().map(|&q| self.mask(q)).collect();
        let k = keep.len();
        let mut out = vec![0.0; 1 << k];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            out[gather(i, &masks, k)] += p;
        }
        Ok(out)
    }

    pub fn marginal(&self, keep: &[usize]) -> Result<Distribution> {
        Ok(Distribution::from_dense(keep.len(), &self.marginal_dense(keep)?))
    }

    /// `shots` independent draws from the marginal over `keep`.
    pub fn sample(&self, keep: &[usize], shots: u64, seed: u64) -> Result<ShotCounts> {
        let probs = self.marginal_dense(keep)?;
        ShotCounts::draw(keep.len(), &probs, shots, seed)
    }

    /// Partial trace of `|psi><psi|` over every qubit not in `keep`.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.check_keep(keep)?;
        let k = keep.len();
        if k > MAX_DENSITY_QUBITS {
            return Err(Error::Capacity {
                what: "reduced density qubits",
                value: k,
                max: MAX_DENSITY_QUBITS,
            });
        }
        let kept_masks: Vec<usize> = keep.iter().map(|&q| self.mask(q)).collect();
        let rest: Vec<usize> = (0..self.m).filter(|q| !keep.contains(q)).collect();
        let rest_masks: Vec<usize> = rest.iter().map(|&q| self.mask(q)).collect();

        // Columns of the 2^k x 2^(m-k) reshaped amplitude matrix, nonzero entries only.
        let mut columns: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); 1 << rest.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            columns[gather(i, &rest_masks, rest.len())].push((gather(i, &kept_masks, k), a));
        }
        let dim = 1 << k;
        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for col in &columns {
            for &(r, ar) in col {
                for &(c, ac) in col {
                    rho[r * dim + c] += ar * ac.conj();
                }
            }
        }
        Ok(DensityMatrix::from_entries_unchecked(k, rho))
    }

    fn check_keep(&self, keep: &[usize]) -> Result<()> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("qubit selection is empty".into()));
        }
        for (k, &q) in keep.iter().enumerate() {
            if q >= self.m {
                return Err(Error::index("qubit register", q, self.m));
            }
            if keep[..k].contains(&q) {
                return Err(Error::InvalidArgument(format!(
                    "qubit {q} selected twice"
                )));
            }
        }
        Ok(())
    }
}

fn check_qubits(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("register needs at least one qubit".into()));
    }
    if m > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "qubit count",
            value: m,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Packs the bits of `index` selected by `masks` into a `width`-bit number,
/// first mask most significant.
fn gather(index: usize, masks: &[usize], width: usize) -> usize {
    masks
        .iter()
        .enumerate()
        .filter(|(_, &b)| index & b != 0)
        .fold(0, |acc, (pos, _)| acc | 1 << (width - 1 - pos))
}
