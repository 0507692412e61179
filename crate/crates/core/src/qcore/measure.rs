use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::circuit::Circuit;
use super::state::{simulate, StateVector};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, QbsRng};

/// A measured basis state. Bit `q` of `value` is qubit `q`; `Display`
/// renders the highest qubit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    value: u64,
    len: usize,
}

impl Bitstring {
    pub fn new(value: u64, len: usize) -> Self {
        debug_assert!(len >= 64 || value >> len == 0);
        Self { value, len }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, qubit: usize) -> bool {
        (self.value >> qubit) & 1 == 1
    }

    /// Sub-register `start..start+len` as its own bitstring.
    pub fn slice(&self, start: usize, len: usize) -> Bitstring {
        let mask = if len >= 64 { u64::MAX } else { (1u64 << len) - 1 };
        Bitstring::new((self.value >> start) & mask, len)
    }

    /// Bits in qubit order (qubit 0 first).
    pub fn to_little_endian_string(&self) -> String {
        (0..self.len).map(|q| if self.bit(q) { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.len).rev() {
            f.write_str(if self.bit(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses highest-qubit-first text, the same form `Display` prints.
impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > 64 || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::InvalidBitstring(s.to_string()));
        }
        let value = s.bytes().fold(0u64, |acc, b| (acc << 1) | u64::from(b == b'1'));
        Ok(Bitstring::new(value, s.len()))
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shot histogram. Counts always sum to `shots`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    num_qubits: usize,
    shots: u64,
    counts: BTreeMap<Bitstring, u64>,
}

impl CountsTable {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, value: u64) -> u64 {
        self.counts.get(&Bitstring::new(value, self.num_qubits)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Bitstring, u64)> + '_ {
        self.counts.iter().map(|(b, c)| (*b, *c))
    }

    /// Dense count vector indexed by basis state.
    pub fn dense(&self) -> Vec<u64> {
        let mut out = vec![0; 1 << self.num_qubits];
        for (b, c) in &self.counts {
            out[b.value() as usize] = *c;
        }
        out
    }
}

/// Inverse-CDF sampler over a statevector's measurement distribution.
///
/// Preparing once and drawing many shots is equivalent to re-running the
/// circuit for every shot: the simulation is exact and deterministic, so each
/// run would reproduce the same amplitudes.
#[derive(Debug, Clone)]
pub struct ShotSampler {
    num_qubits: usize,
    cumulative: Vec<f64>,
}

impl ShotSampler {
    pub fn new(state: &StateVector) -> Self {
        let mut acc = 0.0;
        let cumulative = state
            .amplitudes()
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Self { num_qubits: state.num_qubits(), cumulative }
    }

    pub fn for_circuit(circuit: &Circuit) -> Result<Self> {
        Ok(Self::new(&simulate(circuit)?))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn draw(&self, rng: &mut QbsRng) -> Bitstring {
        let total = *self.cumulative.last().expect("non-empty state");
        let u: f64 = rng.random::<f64>() * total;
        // First index whose cumulative mass exceeds u, skipping zero-probability states.
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        Bitstring::new(idx as u64, self.num_qubits)
    }

    pub fn sample(&self, shots: u64, seed: u64) -> Result<CountsTable> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut rng = rng_from_seed(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(self.draw(&mut rng)).or_insert(0) += 1;
        }
        Ok(CountsTable { num_qubits: self.num_qubits, shots, counts })
    }

    pub fn measure_once(&self, seed: u64) -> Bitstring {
        self.draw(&mut rng_from_seed(seed))
    }
}

/// Simulate `circuit` and draw `shots` measurements of every qubit.
pub fn sample(circuit: &Circuit, shots: u64, seed: u64) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    ShotSampler::for_circuit(circuit)?.sample(shots, seed)
}

/// One shot of `circuit`; equal to the single entry of `sample(circuit, 1, seed)`.
pub fn measure_once(circuit: &Circuit, seed: u64) -> Result<Bitstring> {
    Ok(ShotSampler::for_circuit(circuit)?.measure_once(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::build_circuit;

    fn hhh() -> Circuit {
        let mut c = build_circuit(3).unwrap();
        for q in 0..3 {
            c.h(q).unwrap();
        }
        c
    }

    #[test]
    fn deterministic_state_samples_one_outcome() {
        let mut c = build_circuit(1).unwrap();
        c.x(0).unwrap();
        let t = sample(&c, 100, 9).unwrap();
        assert_eq!(t.get(1), 100);
        assert_eq!(t.iter().count(), 1);
        assert_eq!(t.iter().next().unwrap().0.to_string(), "1");
    }

    #[test]
    fn uniform_counts_within_three_sigma() {
        // sigma = sqrt(1024 * 1/8 * 7/8) ~ 10.58
        let t = sample(&hhh(), 1024, 2024).unwrap();
        assert_eq!(t.shots(), 1024);
        assert_eq!(t.dense().iter().sum::<u64>(), 1024);
        for v in 0..8 {
            let c = t.get(v);
            assert!((96..=160).contains(&c), "state {v}: {c}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample(&hhh(), 1024, 5).unwrap(), sample(&hhh(), 1024, 5).unwrap());
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(matches!(sample(&hhh(), 0, 1), Err(Error::ZeroShots)));
    }

    #[test]
    fn measure_once_support_and_frequency() {
        let mut c = build_circuit(1).unwrap();
        c.h(0).unwrap();
        let sampler = ShotSampler::for_circuit(&c).unwrap();
        let ones = (0..10_000u64)
            .filter(|&s| {
                let b = sampler.measure_once(s);
                assert!(b.to_string() == "0" || b.to_string() == "1");
                b.value() == 1
            })
            .count();
        let frac = ones as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&frac), "{frac}");
        let mut x = build_circuit(1).unwrap();
        x.x(0).unwrap();
        assert_eq!(measure_once(&x, 77).unwrap().to_string(), "1");
    }

    #[test]
    fn bitstring_text_forms() {
        let b: Bitstring = "0101".parse().unwrap();
        assert_eq!(b.value(), 5);
        assert_eq!(b.to_string(), "0101");
        assert_eq!(b.to_little_endian_string(), "1010");
        assert_eq!(b.slice(0, 2).to_string(), "01");
        assert!("01a".parse::<Bitstring>().is_err());
        assert!("".parse::<Bitstring>().is_err());
    }

    #[test]
    fn counts_json_keys_are_bitstrings() {
        let mut c = build_circuit(2).unwrap();
        c.x(1).unwrap();
        let t = sample(&c, 3, 0).unwrap();
        let js = serde_json::to_value(&t).unwrap();
        assert_eq!(js["counts"]["10"], 3);
        let back: CountsTable = serde_json::from_value(js).unwrap();
        assert_eq!(back, t);
    }
}
