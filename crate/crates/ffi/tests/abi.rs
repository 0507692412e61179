use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use qbs_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(qbs_last_error()) }.to_string_lossy().into_owned()
}

struct Handle(*mut QbsCircuit);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { qbs_circuit_free(self.0) }
    }
}

fn new_circuit(n: usize) -> Handle {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qbs_circuit_new(n, &mut out) }, QbsStatus::Ok);
    Handle(out)
}

#[test]
fn build_append_simulate() {
    let c = new_circuit(1);
    assert_eq!(unsafe { qbs_circuit_append(c.0, QbsGateKind::H, ptr::null(), 0, 0) }, QbsStatus::Ok);
    assert_eq!(unsafe { qbs_circuit_num_gates(c.0) }, 1);
    let (mut re, mut im) = ([0.0f64; 2], [0.0f64; 2]);
    assert_eq!(unsafe { qbs_circuit_simulate(c.0, re.as_mut_ptr(), im.as_mut_ptr(), 2) }, QbsStatus::Ok);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((re[0] - r).abs() < 1e-12 && (re[1] - r).abs() < 1e-12);
    assert_eq!(im, [0.0, 0.0]);
}

#[test]
fn error_codes_and_messages() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qbs_circuit_new(0, &mut out) }, QbsStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { qbs_circuit_new(40, &mut out) }, QbsStatus::Capacity);
    assert!(last_error().contains("26"));

    let c = new_circuit(2);
    let ctrl = [0usize];
    assert_eq!(unsafe { qbs_circuit_append(c.0, QbsGateKind::Cx, ctrl.as_ptr(), 1, 0) }, QbsStatus::InvalidArgument);
    assert_eq!(unsafe { qbs_circuit_append(ptr::null_mut(), QbsGateKind::X, ptr::null(), 0, 0) }, QbsStatus::NullPointer);
    let mut small = [0u64; 2];
    assert_eq!(unsafe { qbs_circuit_sample(c.0, 10, 1, small.as_mut_ptr(), 2) }, QbsStatus::BufferTooSmall);

    let bits = [0u8, 1, 0];
    assert_eq!(unsafe { qbs_build_qsa(bits.as_ptr(), 3, &mut out) }, QbsStatus::InvalidData);
    assert_eq!(unsafe { qbs_circuit_new(2, &mut out) }, QbsStatus::Ok);
    assert!(last_error().is_empty());
    unsafe { qbs_circuit_free(out) };
}

#[test]
fn qsa_counts_sum_to_shots() {
    let bits = [0u8, 1, 0, 1, 0, 1, 0, 1];
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qbs_build_qsa(bits.as_ptr(), bits.len(), &mut out) }, QbsStatus::Ok);
    let qsa = Handle(out);
    assert_eq!(unsafe { qbs_circuit_num_qubits(qsa.0) }, 4);
    let mut counts = [0u64; 16];
    assert_eq!(unsafe { qbs_circuit_sample(qsa.0, 1024, 7, counts.as_mut_ptr(), 16) }, QbsStatus::Ok);
    assert_eq!(counts.iter().sum::<u64>(), 1024);
    for (idx, &c) in counts.iter().enumerate() {
        let (addr, data) = (idx & 7, idx >> 3);
        if data != addr % 2 {
            assert_eq!(c, 0, "state {idx:04b}");
        } else {
            assert!((96..=160).contains(&c), "state {idx:04b}: {c}");
        }
    }
}

#[test]
fn counter_measures_popcount() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qbs_build_counter(8, 4, &mut out) }, QbsStatus::Ok);
    let counter = Handle(out);
    let prep = new_circuit(12);
    for q in 0..5 {
        assert_eq!(unsafe { qbs_circuit_append(prep.0, QbsGateKind::X, ptr::null(), 0, q) }, QbsStatus::Ok);
    }
    // Replay the counter gates through the public append API by building
    // the same cascade: each control increments the 4-bit register.
    for i in (0..8usize).rev() {
        for j in (0..4usize).rev() {
            let mut ctrls = vec![i];
            ctrls.extend((0..j).map(|k| 8 + k));
            let kind = match ctrls.len() {
                1 => QbsGateKind::Cx,
                2 => QbsGateKind::Ccx,
                _ => QbsGateKind::Mcx,
            };
            assert_eq!(
                unsafe { qbs_circuit_append(prep.0, kind, ctrls.as_ptr(), ctrls.len(), 8 + j) },
                QbsStatus::Ok
            );
        }
    }
    assert_eq!(unsafe { qbs_circuit_num_gates(counter.0) } + 5, unsafe { qbs_circuit_num_gates(prep.0) });
    let mut idx = 0u64;
    assert_eq!(unsafe { qbs_circuit_measure_once(prep.0, 3, &mut idx) }, QbsStatus::Ok);
    assert_eq!(idx, 0b0101_0001_1111);

    let bits = CString::new("0101").unwrap();
    let mut v = 0u64;
    assert_eq!(unsafe { qbs_decode_counter(bits.as_ptr(), 4, &mut v) }, QbsStatus::Ok);
    assert_eq!(v, 5);
}

#[test]
fn replication_and_statistics() {
    let y = [0u8, 1, 0, 1, 0, 1, 0, 1];
    let mut raw = vec![0u64; 500];
    let mut est = vec![0f64; 500];
    let st = unsafe {
        qbs_replicate_count(y.as_ptr(), 8, 16, 500, QbsMode::QuantumSequential, 9, raw.as_mut_ptr(), est.as_mut_ptr())
    };
    assert_eq!(st, QbsStatus::Ok);
    assert!(raw.iter().all(|&r| r <= 8));
    assert!(raw.iter().zip(&est).all(|(&r, &e)| e == r as f64 * 2.0));

    let mut se = 0.0;
    assert_eq!(unsafe { qbs_bootstrap_se(est.as_ptr(), est.len(), &mut se) }, QbsStatus::Ok);
    assert!(se > 1.5 && se < 4.5, "{se}");
    let two = [2.0, 4.0];
    assert_eq!(unsafe { qbs_bootstrap_se(two.as_ptr(), 2, &mut se) }, QbsStatus::Ok);
    assert!((se - 2f64.sqrt()).abs() < 1e-12);

    let (mut lo, mut hi) = (0.0, 0.0);
    assert_eq!(unsafe { qbs_confidence_interval(100.0, 10.0, 0.05, &mut lo, &mut hi) }, QbsStatus::Ok);
    assert!((lo - 83.55).abs() < 0.01 && (hi - 116.45).abs() < 0.01);
    assert_eq!(unsafe { qbs_confidence_interval(100.0, 10.0, 0.7, &mut lo, &mut hi) }, QbsStatus::InvalidArgument);

    let big = [1u8; 8];
    let st = unsafe {
        qbs_replicate_count(big.as_ptr(), 8, 8, 4, QbsMode::QuantumParallel, 1, ptr::null_mut(), ptr::null_mut())
    };
    assert_eq!(st, QbsStatus::Capacity);
}

#[test]
fn assess_returns_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let mut csv = String::from("id,flag\n");
    for i in 0..64 {
        csv.push_str(&format!("{i},{}\n", i % 2));
    }
    std::fs::write(&table, csv).unwrap();
    let query = dir.path().join("q.json");
    std::fs::write(&query, r#"{"aggregate": "COUNT", "conditions": [{"column": "flag", "op": "=", "value": 1}]}"#).unwrap();

    let t = CString::new(table.to_str().unwrap()).unwrap();
    let q = CString::new(query.to_str().unwrap()).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { qbs_assess_json(t.as_ptr(), q.as_ptr(), 8, 200, 0.05, QbsMode::ClassicalOracle, 5, &mut out) };
    assert_eq!(st, QbsStatus::Ok, "{}", last_error());
    let js: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    unsafe { qbs_string_free(out) };
    assert_eq!(js["B"], 200);
    assert_eq!(js["N"], 64);
    assert_eq!(js["seed"], 5);

    let missing = CString::new("/nonexistent/table.csv").unwrap();
    let st = unsafe { qbs_assess_json(missing.as_ptr(), q.as_ptr(), 8, 200, 0.05, QbsMode::ClassicalOracle, 5, &mut out) };
    assert_eq!(st, QbsStatus::Io);
}

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("qbs.h")
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(header_path()).unwrap();
    let source = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct QbsCircuit QbsCircuit;"));
}

#[test]
fn header_compiles_as_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let include = header_path().parent().unwrap().to_path_buf();
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .expect("C compiler available");
    assert!(status.success());
}
