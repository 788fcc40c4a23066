//! Circuit construction for the token ring.
//!
//! Register layout: ring variable `x_i` lives on qubit `i`, ancilla `j` on
//! qubit `n_x + j`. Only the x qubits are measured.
//!
//! A rule application for node `i` uses one fresh ancilla. The ancilla first
//! records the guard of node `i` (`x_i xor x_{i-1}` for `i >= 1`,
//! `not (x_0 xor x_{n-1})` for node 0) and then controls a flip of `x_i`. The
//! classical move alone is not injective (`f_1` sends both `000` and `010` to
//! `000`), and the single guard bit is exactly what makes it reversible. The
//! ancilla is left holding the guard value.

mod text;

pub use text::{emit, parse};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qsim::Gate;
use crate::ring::{NodeId, MAX_RING_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegisterLayout {
    pub n_x: usize,
    pub n_anc: usize,
}

impl RegisterLayout {
    pub fn new(n_x: usize, n_anc: usize) -> Result<Self> {
        if n_x == 0 {
            return Err(Error::InvalidArgument("layout needs at least one x qubit".into()));
        }
        Ok(Self { n_x, n_anc })
    }

    pub fn num_qubits(&self) -> usize {
        self.n_x + self.n_anc
    }

    pub fn x_index(&self, i: usize) -> Result<usize> {
        if i < self.n_x {
            Ok(i)
        } else {
            Err(Error::index("x register", i, self.n_x))
        }
    }

    pub fn anc_index(&self, j: usize) -> Result<usize> {
        if j < self.n_anc {
            Ok(self.n_x + j)
        } else {
            Err(Error::index("ancilla register", j, self.n_anc))
        }
    }

    pub fn x_qubits(&self) -> Vec<usize> {
        (0..self.n_x).collect()
    }

    pub fn anc_qubits(&self) -> Vec<usize> {
        (self.n_x..self.num_qubits()).collect()
    }

    /// The measured qubits: always the x register.
    pub fn measured(&self) -> Vec<usize> {
        self.x_qubits()
    }
}

/// Gate list over a [`RegisterLayout`], with the rule schedule it realizes
/// (empty for GHZ/W preparation).
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    layout: RegisterLayout,
    gates: Vec<Gate>,
    schedule: Vec<NodeId>,
}

impl Circuit {
    pub fn new(layout: RegisterLayout) -> Self {
        Self {
            layout,
            gates: Vec::new(),
            schedule: Vec::new(),
        }
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn schedule(&self) -> &[NodeId] {
        &self.schedule
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits())?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    pub(crate) fn set_schedule(&mut self, schedule: Vec<NodeId>) {
        self.schedule = schedule;
    }
}

/// Serialized rule applications on a ring of size `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleSpec {
    pub n: usize,
    pub order: Vec<NodeId>,
}

impl ScheduleSpec {
    /// Entries must be valid nodes; repeats are fine. An empty order is a valid
    /// value (the oracle accepts it) but [`schedule_circuit`] rejects it.
    pub fn new(n: usize, order: Vec<NodeId>) -> Result<Self> {
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
        if let Some(&bad) = order.iter().find(|&&i| i >= n) {
            return Err(Error::index("ring", bad, n));
        }
        Ok(Self { n, order })
    }
}

/// One H per x qubit `0..n`.
pub fn uniform_init(n: usize) -> Vec<Gate> {
    (0..n).map(Gate::H).collect()
}

/// H on qubit 0, then CX(0,1), CX(1,2), ...
pub fn ghz_circuit(n: usize) -> Result<Circuit> {
    check_width(n)?;
    let mut c = Circuit::new(RegisterLayout::new(n, 0)?);
    c.push(Gate::H(0))?;
    c.extend((1..n).map(|k| Gate::Cx(k - 1, k)))?;
    Ok(c)
}

/// Controlled-RY from the listed gates: RY(t, theta/2) CX(c, t) RY(t, -theta/2) CX(c, t).
fn controlled_ry(control: usize, target: usize, theta: f64) -> [Gate; 4] {
    [
        Gate::Ry(target, theta / 2.0),
        Gate::Cx(control, target),
        Gate::Ry(target, -theta / 2.0),
        Gate::Cx(control, target),
    ]
}

/// Cascade: X on qubit 0, then for each k a controlled rotation moves all but
/// `1/(n-k)` of qubit k's weight onto qubit k+1, and CX(k+1, k) clears qubit k
/// on that branch. All amplitudes end up real and equal to `1/sqrt(n)`.
pub fn w_circuit(n: usize) -> Result<Circuit> {
    check_width(n)?;
    let mut c = Circuit::new(RegisterLayout::new(n, 0)?);
    c.push(Gate::X(0))?;
    for k in 0..n - 1 {
        let theta = 2.0 * (1.0 / (n - k) as f64).sqrt().acos();
        c.extend(controlled_ry(k, k + 1, theta))?;
        c.push(Gate::Cx(k + 1, k))?;
    }
    Ok(c)
}

fn check_width(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "entangled state needs at least 2 qubits, got {n}"
        )));
    }
    Ok(())
}

/// Gates applying the rule of `node` with ancilla slot `anc` (which must be |0>).
pub fn rule_gates(layout: &RegisterLayout, node: NodeId, anc: usize) -> Result<Vec<Gate>> {
    let n = layout.n_x;
    if n < 2 {
        return Err(Error::InvalidArgument("ring needs at least 2 x qubits".into()));
    }
    let xi = layout.x_index(node)?;
    let a = layout.anc_index(anc)?;
    Ok(if node == 0 {
        let last = layout.x_index(n - 1)?;
        vec![Gate::Cx(last, a), Gate::Cx(xi, a), Gate::X(a), Gate::Cx(a, xi)]
    } else {
        let prev = layout.x_index(node - 1)?;
        vec![Gate::Cx(prev, a), Gate::Cx(xi, a), Gate::Cx(a, xi)]
    })
}

/// Incremental circuit assembly that hands each ancilla out at most once.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    circuit: Circuit,
    used: Vec<bool>,
    applied: Vec<NodeId>,
}

impl CircuitBuilder {
    pub fn new(layout: RegisterLayout) -> Self {
        Self {
            circuit: Circuit::new(layout),
            used: vec![false; layout.n_anc],
            applied: Vec::new(),
        }
    }

    pub fn gate(&mut self, gate: Gate) -> Result<&mut Self> {
        self.circuit.push(gate)?;
        Ok(self)
    }

    pub fn uniform_init(&mut self) -> Result<&mut Self> {
        self.circuit.extend(uniform_init(self.circuit.layout.n_x))?;
        Ok(self)
    }

    /// Appends the rule fragment for `node` on ancilla slot `anc`.
    pub fn rule(&mut self, node: NodeId, anc: usize) -> Result<&mut Self> {
        let gates = rule_gates(&self.circuit.layout, node, anc)?;
        if std::mem::replace(&mut self.used[anc], true) {
            return Err(Error::Construction(format!(
                "ancilla slot {anc} is already in use"
            )));
        }
        self.circuit.extend(gates)?;
        self.applied.push(node);
        Ok(self)
    }

    pub fn finish(mut self) -> Circuit {
        self.circuit.set_schedule(self.applied);
        self.circuit
    }
}

/// Uniform initialization followed by one rule fragment per schedule entry,
/// each on its own fresh ancilla.
pub fn schedule_circuit(spec: &ScheduleSpec) -> Result<Circuit> {
    if spec.order.is_empty() {
        return Err(Error::Construction("schedule order must be nonempty".into()));
    }
    schedule_circuit_with_flips(spec, &[])
}

/// As [`schedule_circuit`], with an X on x-qubit `target` inserted before the
/// rule at `position` for every `(position, target)` in `flips`
/// (`position == order.len()` appends after the last rule). Accepts an empty order.
pub fn schedule_circuit_with_flips(spec: &ScheduleSpec, flips: &[(usize, usize)]) -> Result<Circuit> {
    let steps = spec.order.len();
    for &(position, target) in flips {
        if position > steps {
            return Err(Error::index("schedule positions", position, steps + 1));
        }
        if target >= spec.n {
            return Err(Error::index("x register", target, spec.n));
        }
    }
    let layout = RegisterLayout::new(spec.n, steps)?;
    if layout.num_qubits() > crate::qsim::MAX_QUBITS {
        return Err(Error::Capacity {
            what: "qubit count",
            value: layout.num_qubits(),
            max: crate::qsim::MAX_QUBITS,
        });
    }
    let mut b = CircuitBuilder::new(layout);
    b.uniform_init()?;
    let flip_at = |b: &mut CircuitBuilder, pos: usize| -> Result<()> {
        for &(_, t) in flips.iter().filter(|(p, _)| *p == pos) {
            b.gate(Gate::X(t))?;
        }
        Ok(())
    };
    for (slot, &node) in spec.order.iter().enumerate() {
        flip_at(&mut b, slot)?;
        b.rule(node, slot)?;
    }
    flip_at(&mut b, steps)?;
    Ok(b.finish())
}
