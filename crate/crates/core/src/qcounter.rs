//! Quantum counter (popcount into a binary register) and ripple-carry adder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Bitstring, Circuit, GateOp};

pub const CONTROL_REGISTER: &str = "ctrl";
pub const COUNTER_REGISTER: &str = "cnt";

/// Bits needed to hold every value `0..=p`: `ceil(log2(p + 1))`.
pub fn counter_width(p: usize) -> usize {
    (usize::BITS - p.leading_zeros()) as usize
}

/// `p` control qubits `s_0..s_{p-1}` at indices `0..p`, followed by `q`
/// counter qubits `u_0..u_{q-1}` (u_0 least significant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSpec {
    controls: usize,
    counter: usize,
}

impl CounterSpec {
    pub fn new(controls: usize, counter: usize) -> Result<Self> {
        if controls == 0 {
            return Err(Error::Unsupported("counter needs at least one control qubit".into()));
        }
        let needed = counter_width(controls);
        if counter < needed {
            return Err(Error::CounterTooNarrow { controls, needed, got: counter });
        }
        Ok(Self { controls, counter })
    }

    /// Narrowest valid counter for `controls` inputs.
    pub fn minimal(controls: usize) -> Result<Self> {
        Self::new(controls, counter_width(controls))
    }

    pub fn controls(&self) -> usize {
        self.controls
    }

    pub fn counter(&self) -> usize {
        self.counter
    }

    pub fn num_qubits(&self) -> usize {
        self.controls + self.counter
    }

    pub fn counter_qubit(&self, j: usize) -> usize {
        self.controls + j
    }
}

/// Order of the inner (counter-bit) loop. Only `Descending` counts; the
/// other order exists so self-checks can prove they catch a broken counter.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterOrder {
    Descending,
    Ascending,
}

/// Popcount circuit: for each control `s_i` (from `p-1` down to 0) and each
/// counter bit `u_j` (from `q-1` down to 0), an MCX with controls
/// `{s_i, u_0..u_{j-1}}` and target `u_j`.
///
/// The inner loop is an in-place increment conditioned on `s_i`: a bit
/// flips when every lower bit is 1, and visiting high bits first means each
/// test sees the pre-increment value.
pub fn build_counter(spec: CounterSpec) -> Result<Circuit> {
    build_counter_ordered(spec, CounterOrder::Descending)
}

#[doc(hidden)]
pub fn build_counter_ordered(spec: CounterSpec, order: CounterOrder) -> Result<Circuit> {
    let mut c = Circuit::new(spec.num_qubits())?;
    let bits: Vec<usize> = match order {
        CounterOrder::Descending => (0..spec.counter).rev().collect(),
        CounterOrder::Ascending => (0..spec.counter).collect(),
    };
    for i in (0..spec.controls).rev() {
        for &j in &bits {
            let mut controls = Vec::with_capacity(j + 1);
            controls.push(i);
            controls.extend((0..j).map(|k| spec.counter_qubit(k)));
            c.push(GateOp::controlled_x(controls, spec.counter_qubit(j)))?;
        }
    }
    c.add_register(CONTROL_REGISTER, 0..spec.controls)?;
    c.add_register(COUNTER_REGISTER, spec.controls..spec.num_qubits())?;
    Ok(c)
}

/// Counter gates in reverse order: subtracts the popcount (mod 2^q).
pub fn build_inverse_counter(spec: CounterSpec) -> Result<Circuit> {
    Ok(build_counter(spec)?.inverse())
}

/// Value of a counter register printed `u_{q-1}...u_0`.
pub fn decode_counter(bits: &str, q: usize) -> Result<u64> {
    if bits.len() != q {
        return Err(Error::BitstringLength { expected: q, got: bits.to_string() });
    }
    Ok(bits.parse::<Bitstring>()?.value())
}

/// Qubit layout of [`build_ripple_adder`]: A at `0..w`, B at `w..2w`, the
/// carry-in ancilla at `2w`, carry-out at `2w + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdderLayout {
    pub width: usize,
}

impl AdderLayout {
    pub fn a(&self, i: usize) -> usize {
        i
    }

    pub fn b(&self, i: usize) -> usize {
        self.width + i
    }

    pub fn carry_in(&self) -> usize {
        2 * self.width
    }

    pub fn carry_out(&self) -> usize {
        2 * self.width + 1
    }

    pub fn num_qubits(&self) -> usize {
        2 * self.width + 2
    }

    /// Basis index for operands `a`, `b` with cleared ancillas.
    pub fn encode(&self, a: u64, b: u64) -> u64 {
        a | (b << self.width)
    }

    /// `(a, b, carry_in, carry_out)` of a basis index.
    pub fn decode(&self, index: u64) -> (u64, u64, bool, bool) {
        let mask = (1u64 << self.width) - 1;
        (
            index & mask,
            (index >> self.width) & mask,
            (index >> self.carry_in()) & 1 == 1,
            (index >> self.carry_out()) & 1 == 1,
        )
    }
}

fn maj(c: &mut Circuit, x: usize, y: usize, z: usize) -> Result<()> {
    c.cx(z, y)?.cx(z, x)?.ccx(x, y, z)?;
    Ok(())
}

fn uma(c: &mut Circuit, x: usize, y: usize, z: usize) -> Result<()> {
    c.ccx(x, y, z)?.cx(z, x)?.cx(x, y)?;
    Ok(())
}

/// MAJ/UMA ripple-carry adder: `|a>|b>|0>|0> -> |a>|(a+b) mod 2^w>|0>|carry>`.
pub fn build_ripple_adder(width: usize) -> Result<Circuit> {
    if width == 0 {
        return Err(Error::Unsupported("adder width must be at least 1".into()));
    }
    let l = AdderLayout { width };
    let mut c = Circuit::new(l.num_qubits())?;
    maj(&mut c, l.carry_in(), l.b(0), l.a(0))?;
    for i in 1..width {
        maj(&mut c, l.a(i - 1), l.b(i), l.a(i))?;
    }
    c.cx(l.a(width - 1), l.carry_out())?;
    for i in (1..width).rev() {
        uma(&mut c, l.a(i - 1), l.b(i), l.a(i))?;
    }
    uma(&mut c, l.carry_in(), l.b(0), l.a(0))?;
    c.add_register("a", 0..width)?;
    c.add_register("b", width..2 * width)?;
    c.add_register("carry_in", l.carry_in()..l.carry_in() + 1)?;
    c.add_register("carry_out", l.carry_out()..l.carry_out() + 1)?;
    Ok(c)
}
