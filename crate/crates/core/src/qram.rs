//! Lookup-table QRAM fragments and the quantum resampler.
//!
//! Each address `i` whose entry is non-zero gets one X/MCX block: X gates
//! on the address qubits whose bit of `i` is 0 turn |i> into |1...1>, an MCX
//! per set data bit writes the entry, and the same X gates restore the
//! address. Fragment layout: address qubits `0..a`, data qubits
//! `a..a+width` (least significant data bit first).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Circuit, GateOp};

pub const ADDRESS_REGISTER: &str = "addr";
pub const DATA_REGISTER: &str = "data";

fn address_width(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// One bit per address; length `2^a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BitsFile", into = "BitsFile")]
pub struct BitDataArray {
    bits: Vec<bool>,
}

impl BitDataArray {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        address_width(bits.len())?;
        Ok(Self { bits })
    }

    /// From 0/1 integers, rejecting anything else.
    pub fn from_ints(values: &[u64]) -> Result<Self> {
        let bits = values
            .iter()
            .enumerate()
            .map(|(index, &v)| match v {
                0 => Ok(false),
                1 => Ok(true),
                value => Err(Error::NotABit { index, value }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn address_width(&self) -> usize {
        self.bits.len().trailing_zeros() as usize
    }

    pub fn get(&self, address: usize) -> bool {
        self.bits[address]
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Serialize, Deserialize)]
struct BitsFile {
    bits: Vec<u64>,
}

impl TryFrom<BitsFile> for BitDataArray {
    type Error = Error;
    fn try_from(f: BitsFile) -> Result<Self> {
        BitDataArray::from_ints(&f.bits)
    }
}

impl From<BitDataArray> for BitsFile {
    fn from(a: BitDataArray) -> Self {
        BitsFile { bits: a.bits.into_iter().map(u64::from).collect() }
    }
}

/// Fixed-width unsigned values; length `2^a`, every value `< 2^width`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ValuesFile", into = "ValuesFile")]
pub struct ValueDataArray {
    values: Vec<u64>,
    width: usize,
}

impl ValueDataArray {
    pub fn new(values: Vec<u64>, width: usize) -> Result<Self> {
        address_width(values.len())?;
        if width == 0 || width > 63 {
            return Err(Error::Unsupported(format!("value width must be 1..=63, got {width}")));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v >> width != 0) {
            return Err(Error::ValueTooWide { index, value, width });
        }
        Ok(Self { values, width })
    }

    /// Narrowest width that holds every value (at least 1).
    pub fn minimal(values: Vec<u64>) -> Result<Self> {
        let max = values.iter().copied().max().unwrap_or(0);
        let width = (64 - max.leading_zeros() as usize).max(1);
        Self::new(values, width)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn address_width(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }
}

#[derive(Serialize, Deserialize)]
struct ValuesFile {
    values: Vec<u64>,
    width: usize,
}

impl TryFrom<ValuesFile> for ValueDataArray {
    type Error = Error;
    fn try_from(f: ValuesFile) -> Result<Self> {
        ValueDataArray::new(f.values, f.width)
    }
}

impl From<ValueDataArray> for ValuesFile {
    fn from(a: ValueDataArray) -> Self {
        ValuesFile { values: a.values, width: a.width }
    }
}

/// Either data-file shape: `{"bits": [...]}` or `{"values": [...], "width": w}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataArray {
    Bits(BitDataArray),
    Values(ValueDataArray),
}

impl DataArray {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        // Decode by key so validation errors surface instead of the untagged fallback message.
        if raw.get("bits").is_some() {
            Ok(DataArray::Bits(serde_json::from_value(raw)?))
        } else if raw.get("values").is_some() {
            Ok(DataArray::Values(serde_json::from_value(raw)?))
        } else {
            Err(Error::Unsupported("data file needs a \"bits\" or \"values\" key".into()))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Lookup fragment over `a` address qubits and `width` data qubits.
fn build_lookup(a: usize, width: usize, entries: impl Iterator<Item = (usize, u64)>) -> Result<Circuit> {
    let mut c = Circuit::new(a + width)?;
    let address: Vec<usize> = (0..a).collect();
    for (i, value) in entries {
        if value == 0 {
            continue;
        }
        let flips: Vec<usize> = (0..a).filter(|q| (i >> q) & 1 == 0).collect();
        for &q in &flips {
            c.x(q)?;
        }
        for bit in (0..width).filter(|b| (value >> b) & 1 == 1) {
            c.push(GateOp::controlled_x(address.clone(), a + bit))?;
        }
        for &q in &flips {
            c.x(q)?;
        }
    }
    if a > 0 {
        c.add_register(ADDRESS_REGISTER, 0..a)?;
    }
    c.add_register(DATA_REGISTER, a..a + width)?;
    Ok(c)
}

/// `|i>|0> -> |i>|data[i]>` over `a` address qubits and one data qubit.
pub fn build_bit_qram(data: &BitDataArray) -> Result<Circuit> {
    build_lookup(
        data.address_width(),
        1,
        data.bits.iter().enumerate().map(|(i, &b)| (i, u64::from(b))),
    )
}

/// `|i>|0...0> -> |i>|data[i]>` with `width` data qubits, LSB at data qubit 0.
pub fn build_value_qram(data: &ValueDataArray) -> Result<Circuit> {
    build_lookup(data.address_width(), data.width, data.values.iter().copied().enumerate())
}

fn with_hadamards(qram: Circuit, a: usize) -> Result<Circuit> {
    let mut c = Circuit::new(qram.num_qubits())?;
    for q in 0..a {
        c.h(q)?;
    }
    let identity: Vec<usize> = (0..qram.num_qubits()).collect();
    c.compose(&qram, &identity, "")?;
    Ok(c)
}

/// Quantum resampler: Hadamards on the address register, then the bit
/// lookup. One measurement yields a uniformly random `(i, data[i])` pair;
/// repeated measurements sample with replacement.
pub fn build_qsa(data: &BitDataArray) -> Result<Circuit> {
    with_hadamards(build_bit_qram(data)?, data.address_width())
}

/// Resampler over a value lookup.
pub fn build_value_qsa(data: &ValueDataArray) -> Result<Circuit> {
    with_hadamards(build_value_qram(data)?, data.address_width())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{evaluate_basis, simulate_from, GateKind, ShotSampler, StateVector};
    use rand::{Rng, SeedableRng};

    fn alternating() -> BitDataArray {
        BitDataArray::from_ints(&[0, 1, 0, 1, 0, 1, 0, 1]).unwrap()
    }

    /// Run the lookup on basis address `i` through the full statevector.
    fn lookup(c: &Circuit, a: usize, i: usize) -> (u64, u64) {
        let out = simulate_from(c, StateVector::basis(c.num_qubits(), i as u64).unwrap())
            .unwrap()
            .as_basis_state(1e-12)
            .expect("basis output");
        (out & ((1 << a) - 1), out >> a)
    }

    #[test]
    fn alternating_address_one_reads_one() {
        let c = build_bit_qram(&alternating()).unwrap();
        assert_eq!(lookup(&c, 3, 0b001), (0b001, 1));
        for i in 0..8 {
            assert_eq!(lookup(&c, 3, i), (i as u64, (i % 2) as u64));
        }
    }

    #[test]
    fn all_zero_data_emits_nothing() {
        let c = build_bit_qram(&BitDataArray::from_ints(&[0; 8]).unwrap()).unwrap();
        assert!(c.is_empty());
        let v = build_value_qram(&ValueDataArray::new(vec![0; 4], 3).unwrap()).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn random_bit_arrays_match_classical_lookup() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let bits: Vec<bool> = (0..8).map(|_| rng.random()).collect();
            let data = BitDataArray::new(bits.clone()).unwrap();
            let c = build_bit_qram(&data).unwrap();
            for (i, &bit) in bits.iter().enumerate() {
                assert_eq!(lookup(&c, 3, i), (i as u64, u64::from(bit)));
            }
            assert!(c.count_kind(GateKind::MCX) <= data.ones());
            assert!(c.count_kind(GateKind::X) <= 2 * 3 * data.ones());
        }
    }

    #[test]
    fn value_twenty_at_address_one() {
        let data = ValueDataArray::new(vec![0, 20, 0, 0, 0, 0, 0, 0], 5).unwrap();
        let c = build_value_qram(&data).unwrap();
        let out = evaluate_basis(&c, 0b001).unwrap();
        let reg = crate::qcore::Bitstring::new(out >> 3, 5);
        assert_eq!(reg.to_string(), "10100");
    }

    #[test]
    fn value_arrays_match_classical_lookup() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let values: Vec<u64> = (0..4).map(|_| rng.random_range(0..8)).collect();
            let c = build_value_qram(&ValueDataArray::new(values.clone(), 3).unwrap()).unwrap();
            for (i, &v) in values.iter().enumerate() {
                assert_eq!(lookup(&c, 2, i), (i as u64, v));
            }
        }
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(BitDataArray::from_ints(&[0, 1, 0]), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(BitDataArray::from_ints(&[0, 2]), Err(Error::NotABit { index: 1, value: 2 })));
        assert!(matches!(
            ValueDataArray::new(vec![1, 8], 3),
            Err(Error::ValueTooWide { index: 1, value: 8, width: 3 })
        ));
        assert!(matches!(ValueDataArray::new(vec![1, 2, 3], 3), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn single_entry_uses_plain_x() {
        let c = build_bit_qram(&BitDataArray::from_ints(&[1]).unwrap()).unwrap();
        assert_eq!(c.num_qubits(), 1);
        assert_eq!(c.gates(), &[GateOp::x(0)]);
    }

    #[test]
    fn constant_ones_qsa_always_reads_one() {
        let qsa = build_qsa(&BitDataArray::from_ints(&[1, 1]).unwrap()).unwrap();
        let sampler = ShotSampler::for_circuit(&qsa).unwrap();
        let mut addr_ones = 0;
        for seed in 0..2000 {
            let shot = sampler.measure_once(seed);
            assert!(shot.bit(1));
            addr_ones += usize::from(shot.bit(0));
        }
        assert!((900..1100).contains(&addr_ones), "{addr_ones}");
    }

    #[test]
    fn qsa_data_marginal_is_half() {
        let qsa = build_qsa(&BitDataArray::from_ints(&[0, 1, 1, 0]).unwrap()).unwrap();
        let counts = ShotSampler::for_circuit(&qsa).unwrap().sample(4096, 8).unwrap();
        let ones: u64 = counts.iter().filter(|(b, _)| b.bit(2)).map(|(_, c)| c).sum();
        let p = ones as f64 / 4096.0;
        assert!((0.47..=0.53).contains(&p), "{p}");
    }

    #[test]
    fn json_formats() {
        match DataArray::from_json(r#"{"bits": [0,1,0,1]}"#).unwrap() {
            DataArray::Bits(b) => assert_eq!(b.ones(), 2),
            other => panic!("{other:?}"),
        }
        match DataArray::from_json(r#"{"values": [3, 20], "width": 5}"#).unwrap() {
            DataArray::Values(v) => assert_eq!(v.width(), 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(DataArray::from_json(r#"{"bits": [0,1,0]}"#), Err(Error::Json(_))));
        assert!(DataArray::from_json(r#"{"nope": 1}"#).is_err());
    }
}
