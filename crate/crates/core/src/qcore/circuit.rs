use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling on simulated qubits: 2^26 double-precision complex
/// amplitudes take 1 GiB.
pub const MAX_QUBITS: usize = 26;

/// Active qubit limit. `QBS_MAX_QUBITS` may lower [`MAX_QUBITS`] but never
/// raise it; unparsable values are ignored.
pub fn qubit_limit() -> usize {
    std::env::var("QBS_MAX_QUBITS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map_or(MAX_QUBITS, |v| v.min(MAX_QUBITS))
}

pub(crate) fn check_capacity(requested: usize) -> Result<()> {
    let limit = qubit_limit();
    if requested > limit {
        return Err(Error::CapacityExceeded { requested, limit });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    CX,
    CCX,
    MCX,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::CX => "CX",
            GateKind::CCX => "CCX",
            GateKind::MCX => "MCX",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub controls: Vec<usize>,
    pub target: usize,
}

impl GateOp {
    pub fn h(target: usize) -> Self {
        Self { kind: GateKind::H, controls: Vec::new(), target }
    }

    pub fn x(target: usize) -> Self {
        Self { kind: GateKind::X, controls: Vec::new(), target }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self { kind: GateKind::CX, controls: vec![control], target }
    }

    pub fn ccx(c0: usize, c1: usize, target: usize) -> Self {
        Self { kind: GateKind::CCX, controls: vec![c0, c1], target }
    }

    pub fn mcx(controls: Vec<usize>, target: usize) -> Self {
        Self { kind: GateKind::MCX, controls, target }
    }

    /// NOT on `target` conditioned on all `controls`, using the narrowest
    /// gate kind for the control count (X, CX, CCX, then MCX).
    pub fn controlled_x(controls: Vec<usize>, target: usize) -> Self {
        let kind = match controls.len() {
            0 => GateKind::X,
            1 => GateKind::CX,
            2 => GateKind::CCX,
            _ => GateKind::MCX,
        };
        Self { kind, controls, target }
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().copied().chain(std::iter::once(self.target))
    }

    /// True for gates that permute basis states (everything but H).
    pub fn is_classical(&self) -> bool {
        self.kind != GateKind::H
    }

    pub(crate) fn control_mask(&self) -> u64 {
        self.controls.iter().fold(0, |m, &c| m | (1u64 << c))
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let (expected, ok) = match self.kind {
            GateKind::H | GateKind::X => ("0", self.controls.is_empty()),
            GateKind::CX => ("1", self.controls.len() == 1),
            GateKind::CCX => ("2", self.controls.len() == 2),
            GateKind::MCX => ("at least 1", !self.controls.is_empty()),
        };
        if !ok {
            return Err(Error::ControlArity {
                kind: self.kind.name(),
                expected,
                got: self.controls.len(),
            });
        }
        let mut seen = 0u64;
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { index: q, num_qubits });
            }
            if seen & (1 << q) != 0 {
                return Err(Error::DuplicateQubit(q));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    fn remapped(&self, map: &[usize]) -> Self {
        Self {
            kind: self.kind,
            controls: self.controls.iter().map(|&c| map[c]).collect(),
            target: map[self.target],
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.controls.is_empty() {
            write!(f, "{} q{}", self.kind, self.target)
        } else {
            let ctrls: Vec<String> = self.controls.iter().map(|c| format!("q{c}")).collect();
            write!(f, "{} [{}] -> q{}", self.kind, ctrls.join(","), self.target)
        }
    }
}

/// Ordered gate list over `num_qubits` qubits, all starting in |0>.
///
/// Gates are validated on insertion, so a `Circuit` value is always
/// simulable. Named registers are contiguous qubit ranges used for display
/// and for decoding measurements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<GateOp>,
    registers: BTreeMap<String, Range<usize>>,
}

/// Empty circuit on `num_qubits` qubits.
pub fn build_circuit(num_qubits: usize) -> Result<Circuit> {
    Circuit::new(num_qubits)
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::EmptyCircuit);
        }
        check_capacity(num_qubits)?;
        Ok(Self { num_qubits, gates: Vec::new(), registers: BTreeMap::new() })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: GateOp) -> Result<&mut Self> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// By-value form of [`Circuit::push`].
    pub fn append_gate(mut self, gate: GateOp) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    pub fn h(&mut self, target: usize) -> Result<&mut Self> {
        self.push(GateOp::h(target))
    }

    pub fn x(&mut self, target: usize) -> Result<&mut Self> {
        self.push(GateOp::x(target))
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(GateOp::cx(control, target))
    }

    pub fn ccx(&mut self, c0: usize, c1: usize, target: usize) -> Result<&mut Self> {
        self.push(GateOp::ccx(c0, c1, target))
    }

    pub fn mcx(&mut self, controls: Vec<usize>, target: usize) -> Result<&mut Self> {
        self.push(GateOp::mcx(controls, target))
    }

    /// Label the qubit range `range`. Overlapping labels are allowed; a
    /// repeated label replaces the old range.
    pub fn add_register(&mut self, label: impl Into<String>, range: Range<usize>) -> Result<&mut Self> {
        if range.end > self.num_qubits || range.start > range.end {
            return Err(Error::QubitOutOfRange { index: range.end, num_qubits: self.num_qubits });
        }
        self.registers.insert(label.into(), range);
        Ok(self)
    }

    pub fn register(&self, label: &str) -> Option<Range<usize>> {
        self.registers.get(label).cloned()
    }

    pub fn registers(&self) -> &BTreeMap<String, Range<usize>> {
        &self.registers
    }

    /// Append all gates of `fragment`, sending its qubit `k` to `map[k]`.
    /// Fragment registers are carried over under `prefix`.
    pub fn compose(&mut self, fragment: &Circuit, map: &[usize], prefix: &str) -> Result<&mut Self> {
        if map.len() != fragment.num_qubits {
            return Err(Error::Unsupported(format!(
                "qubit map has {} entries for a {}-qubit fragment",
                map.len(),
                fragment.num_qubits
            )));
        }
        for gate in &fragment.gates {
            self.push(gate.remapped(map))?;
        }
        for (label, range) in &fragment.registers {
            // Only contiguous images keep their label.
            let image: Vec<usize> = range.clone().map(|q| map[q]).collect();
            if let (Some(&first), true) = (image.first(), image.windows(2).all(|w| w[1] == w[0] + 1)) {
                let name = if prefix.is_empty() { label.clone() } else { format!("{prefix}{label}") };
                self.registers.insert(name, first..first + image.len());
            }
        }
        Ok(self)
    }

    /// Same qubits, gates in reverse order. Every gate in the set is an
    /// involution, so this is the inverse circuit.
    pub fn inverse(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().cloned().collect(),
            registers: self.registers.clone(),
        }
    }

    pub fn is_classical(&self) -> bool {
        self.gates.iter().all(GateOp::is_classical)
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }
}
