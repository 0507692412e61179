//! End-to-end pipeline checks on harness-generated tables.

use std::io::Write;

use qbs::aqp::{
    assess, bootstrap_se, confidence_interval, draw_sample, estimate, load_table, tuple_results, AssessParams,
    CmpOp, Condition, QuerySpec, TableData, TableFormat, Value,
};
use qbs::qbs::{Mode, ReplicationSet};
use qbs::rng::derive_seed;

/// 10000 rows; `half` matches exactly 5000 rows, `third` exactly 3000.
fn harness_csv() -> String {
    let mut s = String::from("id,half,third,price\n");
    for i in 0..10_000u32 {
        let half = u32::from(i % 2 == 0);
        let third = u32::from((i * 7919) % 10_000 < 3000);
        s.push_str(&format!("{i},{half},{third},{}\n", i % 97));
    }
    s
}

fn harness_table() -> TableData {
    TableData::from_csv_reader(harness_csv().as_bytes()).unwrap()
}

fn eq(column: &str, v: i64) -> QuerySpec {
    QuerySpec::count(vec![Condition { column: column.into(), op: CmpOp::Eq, value: Value::Int(v) }])
}

#[test]
fn harness_table_loads_from_disk() {
    let mut file = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    file.write_all(harness_csv().as_bytes()).unwrap();
    let table = load_table(file.path(), TableFormat::from_path(file.path())).unwrap();
    assert_eq!(table.len(), 10_000);
    let recount = |col: &str| {
        let c = table.column_index(col).unwrap();
        table.rows().iter().filter(|r| r[c] == Value::Int(1)).count()
    };
    assert_eq!(recount("half"), 5000);
    assert_eq!(recount("third"), 3000);
}

#[test]
fn single_row_draws_are_uniform() {
    let table = TableData::from_csv_reader("v\n0\n1\n2\n3\n".as_bytes()).unwrap();
    let mut freq = [0u32; 4];
    for s in 0..10_000 {
        let d = draw_sample(&table, 1, derive_seed(77, s)).unwrap();
        freq[d.indices[0]] += 1;
    }
    for c in freq {
        let p = f64::from(c) / 10_000.0;
        assert!((0.23..=0.27).contains(&p), "{freq:?}");
    }
}

#[test]
fn estimates_are_unbiased_and_concentrated() {
    let table = harness_table();
    let query = eq("third", 1);
    let (n, big_n, matches): (f64, f64, f64) = (100.0, 10_000.0, 3000.0);
    let trials = 1000u64;
    let mut inside = 0;
    let mut total = 0.0;
    for s in 0..trials {
        let d = draw_sample(&table, 100, derive_seed(2024, s)).unwrap();
        let y = estimate(&tuple_results(&table, &d, &query).unwrap()).unwrap();
        total += y;
        if (2000.0..=4000.0).contains(&y) {
            inside += 1;
        }
    }
    // Hypergeometric variance of the matched count, scaled by 1/f.
    let p = matches / big_n;
    let var_k = n * p * (1.0 - p) * (big_n - n) / (big_n - 1.0);
    let se_mean = (var_k.sqrt() * big_n / n) / (trials as f64).sqrt();
    let mean = total / trials as f64;
    assert!((mean - matches).abs() <= 3.0 * se_mean, "mean {mean}, 3se {}", 3.0 * se_mean);
    assert!(inside as f64 >= 0.95 * trials as f64, "{inside}/{trials}");
}

#[test]
fn coverage_at_small_n() {
    let table = harness_table();
    let query = eq("half", 1);
    let mut covered = 0;
    for s in 0..100 {
        let params = AssessParams { n: 8, b: 1000, alpha: 0.05, mode: Mode::QuantumSequential, seed: s };
        let report = assess(&table, &query, &params).unwrap();
        if report.interval().contains(5000.0) {
            covered += 1;
        }
    }
    println!("coverage: {covered}/100");
    assert!(covered >= 80, "coverage {covered}/100");
}

#[test]
fn all_match_is_certain() {
    let table = TableData::from_csv_reader("v\n1\n1\n1\n1\n".as_bytes()).unwrap();
    for mode in [Mode::QuantumSequential, Mode::QuantumParallel, Mode::ClassicalOracle] {
        let params = AssessParams { n: 4, b: 50, alpha: 0.05, mode, seed: 9 };
        let r = assess(&table, &eq("v", 1), &params).unwrap();
        assert_eq!(r.point_estimate, 4.0);
        assert_eq!(r.se_b, 0.0);
        assert_eq!(r.ci, (4.0, 4.0));
    }
}

#[test]
fn reports_are_byte_identical_per_seed() {
    let table = harness_table();
    let params = AssessParams { n: 8, b: 200, alpha: 0.05, mode: Mode::QuantumSequential, seed: 31 };
    let a = serde_json::to_string(&assess(&table, &eq("half", 1), &params).unwrap()).unwrap();
    let b = serde_json::to_string(&assess(&table, &eq("half", 1), &params).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = AssessParams { seed: 32, ..params };
    let c = serde_json::to_string(&assess(&table, &eq("half", 1), &other).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn oracle_and_sequential_agree_on_alternating_fixture() {
    let table = TableData::from_csv_reader("v\n0\n1\n0\n1\n0\n1\n0\n1\n".as_bytes()).unwrap();
    let se = |mode| {
        let params = AssessParams { n: 8, b: 5000, alpha: 0.05, mode, seed: 5 };
        assess(&table, &eq("v", 1), &params).unwrap().se_b
    };
    let ratio = se(Mode::QuantumSequential) / se(Mode::ClassicalOracle);
    assert!((0.85..=1.15).contains(&ratio), "ratio {ratio}");
}

#[test]
fn se_ignores_replication_order() {
    let table = harness_table();
    let params = AssessParams { n: 16, b: 500, alpha: 0.05, mode: Mode::ClassicalOracle, seed: 4 };
    let r = assess(&table, &eq("half", 1), &params).unwrap();
    let mut set = ReplicationSet { mode: r.mode, seed: r.seed, b: r.b, f: r.f, replications: r.replications };
    let forward = bootstrap_se(&set).unwrap();
    set.replications.reverse();
    set.replications.rotate_left(137);
    assert!((bootstrap_se(&set).unwrap() - forward).abs() < 1e-9 * forward.max(1.0));
}

#[test]
fn smaller_alpha_never_narrows() {
    let alphas = [0.4, 0.25, 0.1, 0.05, 0.025, 0.01, 0.001];
    let widths: Vec<f64> = alphas.iter().map(|&a| confidence_interval(0.0, 3.0, a).unwrap().width()).collect();
    assert!(widths.windows(2).all(|w| w[1] >= w[0]), "{widths:?}");
}

#[test]
fn sum_and_avg_on_harness_table() {
    let table = harness_table();
    let mut q = eq("half", 1);
    q.aggregate = qbs::qbs::Aggregate::Sum;
    q.target_column = Some("price".into());
    let params = AssessParams { n: 8, b: 200, alpha: 0.05, mode: Mode::QuantumSequential, seed: 12 };
    let sum = assess(&table, &q, &params).unwrap();
    assert!(sum.point_estimate >= 0.0 && sum.se_b >= 0.0);
    q.aggregate = qbs::qbs::Aggregate::Avg;
    let avg = assess(&table, &q, &params).unwrap();
    assert!((0.0..=96.0).contains(&avg.point_estimate));
    assert!(avg.replications.iter().all(|r| (0.0..=96.0).contains(&r.estimate)));
}

#[test]
fn missing_field_names_line() {
    let err = TableData::from_csv_reader("a,b\n1,2\n3\n".as_bytes()).unwrap_err();
    assert!(err.to_string().contains('3'), "{err}");
}
