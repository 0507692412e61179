//! Bootstrap replication drivers.
//!
//! Three interchangeable sources of replications for the same sample:
//!
//! - `QuantumSequential`: the resampler circuit is measured once per draw
//!   (n draws per replication), the drawn bits are loaded as a basis state
//!   into the counter circuit, and the counter register is measured. SUM and
//!   AVG use a value lookup and the ripple-carry adder instead of the counter.
//! - `QuantumParallel`: n resamplers on disjoint registers feed one counter
//!   inside a single circuit; one shot is one replication. Only small
//!   samples fit the simulator.
//! - `ClassicalOracle`: plain resampling with replacement, the reference the
//!   quantum modes are tested against.
//!
//! Replication `j` always uses `derive_seed(master, j)`, so sets are
//! reproducible and independent of evaluation order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    evaluate_basis, qubit_limit, simulate_from, Circuit, ShotSampler, StateVector,
};
use crate::qcounter::{build_counter, build_ripple_adder, counter_width, AdderLayout, CounterSpec};
use crate::qram::{build_qsa, build_value_qsa, BitDataArray, ValueDataArray};
use crate::rng::{derive_seed, rng_from_seed};

/// Redraws allowed for an AVG replication whose resample matched no rows.
pub const AVG_MAX_REDRAWS: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Aggregate {
    Count,
    Sum,
    Avg,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Count => "COUNT",
            Aggregate::Sum => "SUM",
            Aggregate::Avg => "AVG",
        })
    }
}

/// Tuple results `y_i` of the sampled rows.
///
/// COUNT results are 0/1. SUM and AVG results are the target value when the
/// row satisfies the predicate and 0 otherwise; `matched` keeps the
/// predicate outcome so AVG can tell a matching zero from a non-match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResults {
    aggregate: Aggregate,
    y: Vec<u64>,
    matched: Vec<bool>,
    population: usize,
}

impl SampleResults {
    pub fn new(aggregate: Aggregate, y: Vec<u64>, matched: Vec<bool>, population: usize) -> Result<Self> {
        if y.len() != matched.len() {
            return Err(Error::Unsupported("y and match flags differ in length".into()));
        }
        if y.is_empty() || y.len() > population {
            return Err(Error::SampleSize { n: y.len(), population });
        }
        if aggregate == Aggregate::Count {
            if let Some((index, &value)) = y.iter().enumerate().find(|(_, &v)| v > 1) {
                return Err(Error::NotABit { index, value });
            }
        }
        if y.iter().zip(&matched).any(|(&v, &m)| v != 0 && !m) {
            return Err(Error::Unsupported("non-zero tuple result on a non-matching row".into()));
        }
        Ok(Self { aggregate, y, matched, population })
    }

    /// COUNT results from 0/1 values.
    pub fn count(y: Vec<u64>, population: usize) -> Result<Self> {
        let matched = y.iter().map(|&v| v == 1).collect();
        Self::new(Aggregate::Count, y, matched, population)
    }

    pub fn aggregate(&self) -> Aggregate {
        self.aggregate
    }

    pub fn y(&self) -> &[u64] {
        &self.y
    }

    pub fn matched(&self) -> &[bool] {
        &self.matched
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn population(&self) -> usize {
        self.population
    }

    /// Sampling fraction `n / N`.
    pub fn f(&self) -> f64 {
        self.n() as f64 / self.population as f64
    }

    pub fn sum(&self) -> u64 {
        self.y.iter().sum()
    }

    pub fn matches(&self) -> usize {
        self.matched.iter().filter(|&&m| m).count()
    }

    fn bit_array(&self) -> Result<BitDataArray> {
        BitDataArray::from_ints(&self.y)
    }

    /// Estimate for a (re)sample with total `raw` and `matched` matching rows.
    fn scale(&self, raw: u64, matched: u64) -> f64 {
        match self.aggregate {
            Aggregate::Count | Aggregate::Sum => raw as f64 / self.f(),
            Aggregate::Avg => raw as f64 / matched as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    /// Resample total `Y_B` (count of ones, or value sum).
    pub raw: u64,
    pub estimate: f64,
    /// Matching rows in the resample; reported for AVG only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    QuantumSequential,
    QuantumParallel,
    ClassicalOracle,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::QuantumSequential => "quantum_sequential",
            Mode::QuantumParallel => "quantum_parallel",
            Mode::ClassicalOracle => "classical_oracle",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" | "quantum_sequential" => Ok(Mode::QuantumSequential),
            "parallel" | "quantum_parallel" => Ok(Mode::QuantumParallel),
            "oracle" | "classical" | "classical_oracle" => Ok(Mode::ClassicalOracle),
            other => Err(Error::Unsupported(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSet {
    pub mode: Mode,
    pub seed: u64,
    #[serde(rename = "B")]
    pub b: usize,
    pub f: f64,
    pub replications: Vec<Replication>,
}

impl ReplicationSet {
    pub fn estimates(&self) -> Vec<f64> {
        self.replications.iter().map(|r| r.estimate).collect()
    }

    pub fn raw_values(&self) -> Vec<u64> {
        self.replications.iter().map(|r| r.raw).collect()
    }

    /// Histogram of raw totals over `0..=max`.
    pub fn raw_histogram(&self, max: u64) -> Vec<u64> {
        let mut h = vec![0; max as usize + 1];
        for r in &self.replications {
            if r.raw <= max {
                h[r.raw as usize] += 1;
            }
        }
        h
    }
}

/// Prepared sequential COUNT pipeline: resampler distribution plus counter.
struct SequentialCount {
    qsa: ShotSampler,
    data_qubit: usize,
    counter: Circuit,
    spec: CounterSpec,
}

impl SequentialCount {
    fn new(sample: &SampleResults) -> Result<Self> {
        let data = sample.bit_array()?;
        let qsa = ShotSampler::for_circuit(&build_qsa(&data)?)?;
        let spec = CounterSpec::minimal(sample.n())?;
        Ok(Self { qsa, data_qubit: data.address_width(), counter: build_counter(spec)?, spec })
    }

    fn run(&self, sample: &SampleResults, seed: u64) -> Result<Replication> {
        let n = sample.n();
        let mut controls = 0u64;
        for i in 0..n {
            let shot = self.qsa.measure_once(derive_seed(seed, i as u64));
            if shot.bit(self.data_qubit) {
                controls |= 1 << i;
            }
        }
        let state = simulate_from(&self.counter, StateVector::basis(self.spec.num_qubits(), controls)?)?;
        let shot = ShotSampler::new(&state).measure_once(derive_seed(seed, n as u64));
        let raw = shot.slice(self.spec.controls(), self.spec.counter()).value();
        Ok(Replication { raw, estimate: sample.scale(raw, 0), matched: None })
    }
}

/// Prepared sequential SUM/AVG pipeline: value resampler plus adder.
struct SequentialValue {
    qsa: ShotSampler,
    address_width: usize,
    value_width: usize,
    adder: Circuit,
    layout: AdderLayout,
}

impl SequentialValue {
    fn new(sample: &SampleResults) -> Result<Self> {
        let max = sample.y.iter().copied().max().unwrap_or(0);
        let value_width = counter_width(max as usize).max(1);
        // Top data bit carries the match flag.
        let entries: Vec<u64> = sample
            .y
            .iter()
            .zip(&sample.matched)
            .map(|(&v, &m)| v | (u64::from(m) << value_width))
            .collect();
        let data = ValueDataArray::new(entries, value_width + 1)?;
        let qsa = ShotSampler::for_circuit(&build_value_qsa(&data)?)?;
        let acc_width = counter_width(max as usize * sample.n()).max(value_width);
        let layout = AdderLayout { width: acc_width };
        Ok(Self {
            qsa,
            address_width: data.address_width(),
            value_width,
            adder: build_ripple_adder(acc_width)?,
            layout,
        })
    }

    fn draw(&self, seed: u64, n: usize) -> Result<(u64, u64)> {
        let mut acc = 0u64;
        let mut matched = 0u64;
        for i in 0..n {
            let shot = self.qsa.measure_once(derive_seed(seed, i as u64));
            let value = shot.slice(self.address_width, self.value_width).value();
            matched += u64::from(shot.bit(self.address_width + self.value_width));
            let out = evaluate_basis(&self.adder, self.layout.encode(value, acc))?;
            let (a, sum, _, carry) = self.layout.decode(out);
            debug_assert_eq!(a, value);
            debug_assert!(!carry, "accumulator sized for n * max");
            acc = sum;
        }
        Ok((acc, matched))
    }

    fn run(&self, sample: &SampleResults, seed: u64) -> Result<Replication> {
        let n = sample.n();
        let attempts = if sample.aggregate == Aggregate::Avg { AVG_MAX_REDRAWS } else { 1 };
        for attempt in 0..attempts {
            let s = if attempt == 0 { seed } else { derive_seed(seed, u64::MAX - attempt) };
            let (raw, matched) = self.draw(s, n)?;
            if sample.aggregate != Aggregate::Avg {
                return Ok(Replication { raw, estimate: sample.scale(raw, matched), matched: None });
            }
            if matched > 0 {
                return Ok(Replication { raw, estimate: sample.scale(raw, matched), matched: Some(matched) });
            }
        }
        Err(Error::NoMatchingRows)
    }
}

enum Sequential {
    Count(SequentialCount),
    Value(SequentialValue),
}

impl Sequential {
    fn new(sample: &SampleResults) -> Result<Self> {
        if !sample.n().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(sample.n()));
        }
        if sample.aggregate == Aggregate::Avg && sample.matches() == 0 {
            return Err(Error::NoMatchingRows);
        }
        Ok(match sample.aggregate {
            Aggregate::Count => Sequential::Count(SequentialCount::new(sample)?),
            Aggregate::Sum | Aggregate::Avg => Sequential::Value(SequentialValue::new(sample)?),
        })
    }

    fn run(&self, sample: &SampleResults, seed: u64) -> Result<Replication> {
        match self {
            Sequential::Count(c) => c.run(sample, seed),
            Sequential::Value(v) => v.run(sample, seed),
        }
    }
}

/// One replication by running the resampler `n` times and counting the
/// drawn bits (COUNT), or adding the drawn values (SUM/AVG).
pub fn run_replication_sequential(sample: &SampleResults, seed: u64) -> Result<Replication> {
    Sequential::new(sample)?.run(sample, seed)
}

/// Qubits used by the parallel replication circuit for a sample of size `n`.
pub fn parallel_qubits(n: usize) -> usize {
    let a = n.trailing_zeros() as usize;
    n * (a + 1) + counter_width(n)
}

/// `n` resamplers on disjoint registers, their data qubits wired into one
/// counter. Block `k` occupies qubits `k(a+1)..(k+1)(a+1)` (data qubit
/// last); the counter follows at `n(a+1)`.
pub fn build_parallel_replication_circuit(sample: &SampleResults) -> Result<Circuit> {
    if sample.aggregate != Aggregate::Count {
        return Err(Error::Unsupported("parallel replication supports COUNT only".into()));
    }
    let data = sample.bit_array()?;
    let n = data.len();
    let a = data.address_width();
    let requested = parallel_qubits(n);
    let limit = qubit_limit();
    if requested > limit {
        return Err(Error::ParallelTooLarge { requested, limit });
    }
    let qsa = build_qsa(&data)?;
    let spec = CounterSpec::minimal(n)?;
    let counter = build_counter(spec)?;
    let mut c = Circuit::new(requested)?;
    for k in 0..n {
        let map: Vec<usize> = (k * (a + 1)..(k + 1) * (a + 1)).collect();
        c.compose(&qsa, &map, &format!("qsa{k}."))?;
    }
    let base = n * (a + 1);
    let map: Vec<usize> = (0..n)
        .map(|k| k * (a + 1) + a)
        .chain((0..spec.counter()).map(|j| base + j))
        .collect();
    c.compose(&counter, &map, "")?;
    Ok(c)
}

fn replicate_parallel(sample: &SampleResults, b: usize, seed: u64) -> Result<Vec<Replication>> {
    let circuit = build_parallel_replication_circuit(sample)?;
    let cnt = circuit.register(crate::qcounter::COUNTER_REGISTER).expect("counter register");
    let sampler = ShotSampler::for_circuit(&circuit)?;
    Ok((0..b)
        .map(|j| {
            let shot = sampler.measure_once(derive_seed(seed, j as u64));
            let raw = shot.slice(cnt.start, cnt.len()).value();
            Replication { raw, estimate: sample.scale(raw, 0), matched: None }
        })
        .collect())
}

fn oracle_one(sample: &SampleResults, seed: u64) -> Result<Replication> {
    let n = sample.n();
    let attempts = if sample.aggregate == Aggregate::Avg { AVG_MAX_REDRAWS } else { 1 };
    for attempt in 0..attempts {
        let s = if attempt == 0 { seed } else { derive_seed(seed, u64::MAX - attempt) };
        let mut rng = rng_from_seed(s);
        let (mut raw, mut matched) = (0u64, 0u64);
        for _ in 0..n {
            let i = rng.random_range(0..n);
            raw += sample.y[i];
            matched += u64::from(sample.matched[i]);
        }
        match sample.aggregate {
            Aggregate::Avg if matched == 0 => continue,
            Aggregate::Avg => {
                return Ok(Replication { raw, estimate: sample.scale(raw, matched), matched: Some(matched) })
            }
            _ => return Ok(Replication { raw, estimate: sample.scale(raw, matched), matched: None }),
        }
    }
    Err(Error::NoMatchingRows)
}

/// Classical bootstrap: each replication resamples `n` tuple results with
/// replacement and totals them.
pub fn classical_bootstrap_oracle(sample: &SampleResults, b: usize, seed: u64) -> Result<ReplicationSet> {
    replicate(sample, b, Mode::ClassicalOracle, seed)
}

/// `b` replications in the given mode, seeded from `seed`.
pub fn replicate(sample: &SampleResults, b: usize, mode: Mode, seed: u64) -> Result<ReplicationSet> {
    if b < 2 {
        return Err(Error::TooFewReplications(b));
    }
    let replications = match mode {
        Mode::QuantumSequential => {
            let engine = Sequential::new(sample)?;
            (0..b)
                .map(|j| engine.run(sample, derive_seed(seed, j as u64)))
                .collect::<Result<Vec<_>>>()?
        }
        Mode::QuantumParallel => replicate_parallel(sample, b, seed)?,
        Mode::ClassicalOracle => {
            if sample.aggregate == Aggregate::Avg && sample.matches() == 0 {
                return Err(Error::NoMatchingRows);
            }
            (0..b)
                .map(|j| oracle_one(sample, derive_seed(seed, j as u64)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(ReplicationSet { mode, seed, b, f: sample.f(), replications })
}
