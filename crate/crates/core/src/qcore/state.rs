use num_complex::Complex64;
use serde::Serialize;

use super::circuit::{check_capacity, Circuit, GateKind, GateOp};
use crate::error::{Error, Result};

/// Amplitudes over the 2^n computational basis states; index bit `q` is
/// qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |0...0>.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: u64) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::EmptyCircuit);
        }
        check_capacity(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index as usize >= dim {
            return Err(Error::QubitOutOfRange { index: 64 - index.leading_zeros() as usize - 1, num_qubits });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_capacity(num_qubits)?;
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Basis index holding all the weight, if the state is a basis state.
    pub fn as_basis_state(&self, tol: f64) -> Option<u64> {
        let (idx, p) = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        ((1.0 - p).abs() <= tol).then_some(idx as u64)
    }

    /// Largest componentwise distance to `other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.num_qubits, other.num_qubits, "qubit counts differ");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let t = 1usize << gate.target;
        match gate.kind {
            GateKind::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..self.amplitudes.len() {
                    if i & t == 0 {
                        let a = self.amplitudes[i];
                        let b = self.amplitudes[i | t];
                        self.amplitudes[i] = (a + b) * s;
                        self.amplitudes[i | t] = (a - b) * s;
                    }
                }
            }
            GateKind::X | GateKind::CX | GateKind::CCX | GateKind::MCX => {
                let ctrl = gate.control_mask() as usize;
                let dim_mask = self.amplitudes.len() - 1;
                let free = dim_mask & !ctrl & !t;
                // Walk every subset of the free bits; each fixes one swapped pair.
                let mut sub = 0usize;
                loop {
                    let i = sub | ctrl;
                    self.amplitudes.swap(i, i | t);
                    if sub == free {
                        break;
                    }
                    sub = (sub.wrapping_sub(free)) & free;
                }
            }
        }
        Ok(())
    }

    /// JSON array of `[re, im]` pairs in basis-index order.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Pair(f64, f64);
        let pairs: Vec<Pair> = self.amplitudes.iter().map(|a| Pair(a.re, a.im)).collect();
        serde_json::to_value(pairs).expect("finite amplitudes serialize")
    }
}

/// Run `circuit` from |0...0>.
pub fn simulate(circuit: &Circuit) -> Result<StateVector> {
    simulate_from(circuit, StateVector::zero(circuit.num_qubits())?)
}

/// Run `circuit` from an arbitrary initial state.
pub fn simulate_from(circuit: &Circuit, mut state: StateVector) -> Result<StateVector> {
    if state.num_qubits() != circuit.num_qubits() {
        return Err(Error::Unsupported(format!(
            "state has {} qubits, circuit has {}",
            state.num_qubits(),
            circuit.num_qubits()
        )));
    }
    for gate in circuit.gates() {
        state.apply(gate)?;
    }
    Ok(state)
}

/// Image of basis state `input` under a permutation-only circuit.
///
/// Exact for circuits without H: every X-family gate maps one basis state to
/// one basis state, so tracking the index is equivalent to tracking the full
/// statevector. Used where the register is too wide for amplitudes.
pub fn evaluate_basis(circuit: &Circuit, input: u64) -> Result<u64> {
    if circuit.num_qubits() < 64 && input >> circuit.num_qubits() != 0 {
        return Err(Error::QubitOutOfRange {
            index: 63 - input.leading_zeros() as usize,
            num_qubits: circuit.num_qubits(),
        });
    }
    let mut idx = input;
    for (pos, gate) in circuit.gates().iter().enumerate() {
        if !gate.is_classical() {
            return Err(Error::NotClassical(pos));
        }
        let ctrl = gate.control_mask();
        if idx & ctrl == ctrl {
            idx ^= 1 << gate.target;
        }
    }
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::build_circuit;

    const TOL: f64 = 1e-12;

    /// Kronecker-product oracle: full 2^n x 2^n matrix of a single-qubit gate.
    fn kron_single(n: usize, target: usize, m: [[f64; 2]; 2]) -> Vec<Vec<f64>> {
        let dim = 1 << n;
        let mut out = vec![vec![0.0; dim]; dim];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                let others_equal = (r & !(1 << target)) == (c & !(1 << target));
                if others_equal {
                    *v = m[(r >> target) & 1][(c >> target) & 1];
                }
            }
        }
        out
    }

    #[test]
    fn hadamard_on_one_qubit() {
        let mut c = build_circuit(1).unwrap();
        c.h(0).unwrap();
        let s = simulate(&c).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - r).abs() < TOL);
        assert!((s.amplitudes()[1].re - r).abs() < TOL);
    }

    #[test]
    fn x_flips() {
        let mut c = build_circuit(1).unwrap();
        c.x(0).unwrap();
        let s = simulate(&c).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(0.0, 0.0));
        assert_eq!(s.amplitudes()[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn three_hadamards_match_tensor_oracle() {
        let mut c = build_circuit(3).unwrap();
        for q in 0..3 {
            c.h(q).unwrap();
        }
        let s = simulate(&c).unwrap();

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let h = [[r, r], [r, -r]];
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        for q in 0..3 {
            let m = kron_single(3, q, h);
            v = m.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        }
        for (a, expect) in s.amplitudes().iter().zip(&v) {
            assert!((a.re - expect).abs() < TOL);
            assert!(a.im.abs() < TOL);
            assert!((a.re - 1.0 / 8f64.sqrt()).abs() < TOL);
        }
    }

    #[test]
    fn mcx_only_fires_when_all_controls_set() {
        for input in 0..16u64 {
            let mut c = build_circuit(4).unwrap();
            c.mcx(vec![0, 1, 2], 3).unwrap();
            let s = simulate_from(&c, StateVector::basis(4, input).unwrap()).unwrap();
            let expected = if input & 0b111 == 0b111 { input ^ 0b1000 } else { input };
            assert_eq!(s.as_basis_state(TOL), Some(expected));
            assert_eq!(evaluate_basis(&c, input).unwrap(), expected);
        }
    }

    #[test]
    fn evaluate_basis_rejects_hadamard() {
        let mut c = build_circuit(2).unwrap();
        c.x(0).unwrap().h(1).unwrap();
        assert!(matches!(evaluate_basis(&c, 0), Err(Error::NotClassical(1))));
    }

    #[test]
    fn json_dump_is_pairs() {
        let mut c = build_circuit(1).unwrap();
        c.x(0).unwrap();
        let js = simulate(&c).unwrap().to_json();
        assert_eq!(js, serde_json::json!([[0.0, 0.0], [1.0, 0.0]]));
    }
}
