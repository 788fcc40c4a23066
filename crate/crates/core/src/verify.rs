//! Ties the quantum construction back to the classical ring.
//!
//! The oracle never touches a statevector: it enumerates every ring
//! configuration, applies the schedule with the classical guard/move rules
//! and tallies the results with weight `2^-n`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qsim::{self, Distribution};
use crate::ring::{RingConfig, MAX_CHECK_SIZE};
use crate::synth::{schedule_circuit_with_flips, ScheduleSpec};

/// Tolerance for comparisons between exactly computable distributions.
pub const EXACT_TOL: f64 = 1e-9;

/// A single unconditional flip of x-qubit `target`, injected before the rule
/// at `position` (`position == order.len()` means after the last rule).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FaultSpec {
    pub position: usize,
    pub target: usize,
}

impl FaultSpec {
    pub fn validate(&self, spec: &ScheduleSpec) -> Result<()> {
        if self.position > spec.order.len() {
            return Err(Error::index(
                "fault positions",
                self.position,
                spec.order.len() + 1,
            ));
        }
        if self.target >= spec.n {
            return Err(Error::index("x register", self.target, spec.n));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomePair {
    pub expected: f64,
    pub actual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub tolerance: f64,
    pub tv_distance: f64,
    pub max_abs_diff: f64,
    pub pass: bool,
    pub per_outcome: BTreeMap<String, OutcomePair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub schedule: ScheduleSpec,
    /// Entropy of the reduced x register (equivalently of the ancillas).
    pub x_vs_anc_entropy: f64,
    /// The same quantity computed from the ancilla side; `None` without ancillas.
    pub anc_side_entropy: Option<f64>,
    /// Entropy of each x qubit against the rest of the full register.
    pub per_qubit_entropy: Vec<f64>,
    pub x_marginal_purity: f64,
}

/// Final x distribution of the schedule applied classically to every input.
pub fn oracle_distribution(spec: &ScheduleSpec, fault: Option<&FaultSpec>) -> Result<Distribution> {
    if let Some(f) = fault {
        f.validate(spec)?;
    }
    if spec.n > MAX_CHECK_SIZE {
        return Err(Error::Capacity {
            what: "oracle ring size",
            value: spec.n,
            max: MAX_CHECK_SIZE,
        });
    }
    let weight = 1.0 / (1u64 << spec.n) as f64;
    let mut dense = vec![0.0; 1 << spec.n];
    for input in RingConfig::all(spec.n)? {
        let out = classical_image(spec, fault, input)?;
        dense[out.index() as usize] += weight;
    }
    Ok(Distribution::from_dense(spec.n, &dense))
}

/// `input` pushed through the schedule: each rule fires iff its guard holds.
pub fn classical_image(
    spec: &ScheduleSpec,
    fault: Option<&FaultSpec>,
    input: RingConfig,
) -> Result<RingConfig> {
    let flip = |pos: usize, cfg: RingConfig| match fault {
        Some(f) if f.position == pos => cfg.inject_bit_fault(f.target),
        _ => Ok(cfg),
    };
    let mut cfg = input;
    for (pos, &node) in spec.order.iter().enumerate() {
        cfg = flip(pos, cfg)?;
        if cfg.is_privileged(node)? {
            cfg = cfg.apply_move(node)?;
        }
    }
    flip(spec.order.len(), cfg)
}

/// Missing outcomes count as probability 0. `pass` iff `max_abs_diff <= tol`.
pub fn compare_distributions(
    expected: &Distribution,
    actual: &Distribution,
    tol: f64,
) -> Result<ComparisonReport> {
    if expected.width != actual.width {
        return Err(Error::InvalidArgument(format!(
            "cannot compare distributions of width {} and {}",
            expected.width, actual.width
        )));
    }
    let keys: BTreeSet<&str> = expected.support().chain(actual.support()).collect();
    let mut per_outcome = BTreeMap::new();
    let mut l1 = 0.0;
    let mut max_abs_diff: f64 = 0.0;
    for key in keys {
        let pair = OutcomePair {
            expected: expected.get(key),
            actual: actual.get(key),
        };
        let d = (pair.expected - pair.actual).abs();
        l1 += d;
        max_abs_diff = max_abs_diff.max(d);
        per_outcome.insert(key.to_string(), pair);
    }
    Ok(ComparisonReport {
        tolerance: tol,
        tv_distance: (l1 / 2.0).min(1.0),
        max_abs_diff,
        pass: max_abs_diff <= tol,
        per_outcome,
    })
}

/// Simulated x marginal of the schedule circuit, with an optional fault gate.
pub fn simulated_distribution(spec: &ScheduleSpec, fault: Option<&FaultSpec>) -> Result<Distribution> {
    let flips: Vec<(usize, usize)> = fault.map(|f| (f.position, f.target)).into_iter().collect();
    let circuit = schedule_circuit_with_flips(spec, &flips)?;
    let state = qsim::run(&circuit)?;
    state.marginal(&circuit.layout().measured())
}

/// Simulated x marginal against the oracle, both with the same optional fault.
pub fn schedule_experiment(
    spec: &ScheduleSpec,
    fault: Option<&FaultSpec>,
    tol: f64,
) -> Result<ComparisonReport> {
    let expected = oracle_distribution(spec, fault)?;
    let actual = simulated_distribution(spec, fault)?;
    compare_distributions(&expected, &actual, tol)
}

pub fn fault_experiment(spec: &ScheduleSpec, fault: &FaultSpec) -> Result<ComparisonReport> {
    schedule_experiment(spec, Some(fault), EXACT_TOL)
}

pub fn entanglement_report(spec: &ScheduleSpec) -> Result<EntanglementReport> {
    let circuit = schedule_circuit_with_flips(spec, &[])?;
    let state = qsim::run(&circuit)?;
    let layout = circuit.layout();

    let x_rho = state.reduced_density(&layout.x_qubits())?;
    let anc_side_entropy = match layout.n_anc {
        0 => None,
        k if k <= qsim::MAX_DENSITY_QUBITS => Some(state.reduced_density(&layout.anc_qubits())?.entropy()),
        _ => None,
    };
    let per_qubit_entropy = layout
        .x_qubits()
        .into_iter()
        .map(|q| Ok(state.reduced_density(&[q])?.entropy()))
        .collect::<Result<Vec<_>>>()?;

    Ok(EntanglementReport {
        schedule: spec.clone(),
        x_vs_anc_entropy: x_rho.entropy(),
        anc_side_entropy,
        per_qubit_entropy,
        x_marginal_purity: x_rho.purity(),
    })
}
