//! Embedded invariant suite behind `qbs selfcheck`.

use rand::Rng;
use serde::Serialize;

use crate::qbs::{classical_bootstrap_oracle, replicate, Mode, SampleResults};
use crate::qcore::{evaluate_basis, GateOp, StateVector};
use crate::qcounter::{build_counter_ordered, build_ripple_adder, counter_width, AdderLayout, CounterOrder, CounterSpec};
use crate::qram::{build_bit_qram, BitDataArray};
use crate::rng::rng_from_seed;
use crate::stats::chi_square_two_sample;

const SEED: u64 = 0x5EC_C4EC;

#[derive(Debug, Clone, Copy, Default)]
pub struct SelfCheckOptions {
    /// Build the counter with its inner loop reversed. Negative control:
    /// the popcount check must then fail.
    #[doc(hidden)]
    pub corrupt_counter: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfCheckReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("[{}] {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        if self.passed() {
            out.push_str("all checks passed\n");
        } else {
            let failed = self.checks.iter().filter(|c| !c.passed).count();
            out.push_str(&format!("{failed} of {} checks failed\n", self.checks.len()));
        }
        out
    }
}

fn outcome(name: &'static str, result: Result<String, String>) -> CheckOutcome {
    match result {
        Ok(detail) => CheckOutcome { name, passed: true, detail },
        Err(detail) => CheckOutcome { name, passed: false, detail },
    }
}

fn check_norms() -> Result<String, String> {
    let mut rng = rng_from_seed(SEED);
    let n = 6;
    let mut applied = 0;
    for _ in 0..20 {
        let mut state = StateVector::zero(n).map_err(|e| e.to_string())?;
        for _ in 0..40 {
            let target = rng.random_range(0..n);
            let gate = match rng.random_range(0..3) {
                0 => GateOp::h(target),
                1 => GateOp::x(target),
                _ => {
                    let k = rng.random_range(1..n);
                    let controls: Vec<usize> = (0..n).filter(|&q| q != target).take(k).collect();
                    GateOp::controlled_x(controls, target)
                }
            };
            state.apply(&gate).map_err(|e| e.to_string())?;
            applied += 1;
            let drift = (state.norm_sqr() - 1.0).abs();
            if drift > 1e-12 {
                return Err(format!("norm drift {drift:e} after {gate}"));
            }
        }
    }
    Ok(format!("{applied} gates, norm within 1e-12"))
}

fn check_qram() -> Result<String, String> {
    let mut rng = rng_from_seed(SEED + 1);
    let mut cases = 0;
    for a in 0..=3usize {
        for _ in 0..10 {
            let bits: Vec<bool> = (0..1 << a).map(|_| rng.random()).collect();
            let data = BitDataArray::new(bits.clone()).map_err(|e| e.to_string())?;
            let c = build_bit_qram(&data).map_err(|e| e.to_string())?;
            for (i, &b) in bits.iter().enumerate() {
                let out = evaluate_basis(&c, i as u64).map_err(|e| e.to_string())?;
                if out != i as u64 | (u64::from(b) << a) {
                    return Err(format!("address {i} of {bits:?} read {out:b}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} lookups exact"))
}

fn check_counter(order: CounterOrder) -> Result<String, String> {
    let mut cases = 0;
    for p in 1..=8usize {
        let spec = CounterSpec::new(p, counter_width(p)).map_err(|e| e.to_string())?;
        let c = build_counter_ordered(spec, order).map_err(|e| e.to_string())?;
        for controls in 0..(1u64 << p) {
            let out = evaluate_basis(&c, controls).map_err(|e| e.to_string())?;
            let count = out >> p;
            if count != u64::from(controls.count_ones()) || out & ((1 << p) - 1) != controls {
                return Err(format!("p={p}, controls {controls:0p$b}: counter read {count}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases}/{cases} popcounts correct"))
}

fn check_adder() -> Result<String, String> {
    let mut cases = 0;
    for w in 1..=3usize {
        let l = AdderLayout { width: w };
        let c = build_ripple_adder(w).map_err(|e| e.to_string())?;
        let m = 1u64 << w;
        for a in 0..m {
            for b in 0..m {
                let got = l.decode(evaluate_basis(&c, l.encode(a, b)).map_err(|e| e.to_string())?);
                if got != (a, (a + b) % m, false, a + b >= m) {
                    return Err(format!("width {w}: {a}+{b} gave {got:?}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} additions exact"))
}

fn check_oracle_agreement() -> Result<String, String> {
    let sample = SampleResults::count(vec![0, 1, 0, 1, 0, 1, 0, 1], 16).map_err(|e| e.to_string())?;
    let q = replicate(&sample, 1000, Mode::QuantumSequential, SEED).map_err(|e| e.to_string())?;
    let c = classical_bootstrap_oracle(&sample, 1000, SEED + 1).map_err(|e| e.to_string())?;
    let r = chi_square_two_sample(&q.raw_histogram(8), &c.raw_histogram(8)).map_err(|e| e.to_string())?;
    if r.rejects(0.001) {
        Err(format!("chi-square {:.2} (p = {:.2e}) rejects agreement", r.statistic, r.p_value))
    } else {
        Ok(format!("chi-square {:.2}, p = {:.3}", r.statistic, r.p_value))
    }
}

pub fn run_selfcheck(opts: SelfCheckOptions) -> SelfCheckReport {
    let order = if opts.corrupt_counter { CounterOrder::Ascending } else { CounterOrder::Descending };
    SelfCheckReport {
        checks: vec![
            outcome("statevector norm", check_norms()),
            outcome("qram lookup", check_qram()),
            outcome("counter popcount (p <= 8)", check_counter(order)),
            outcome("ripple-carry adder (width <= 3)", check_adder()),
            outcome("sequential vs classical oracle", check_oracle_agreement()),
        ],
    }
}
