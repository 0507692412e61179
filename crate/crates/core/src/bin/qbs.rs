//! `qbs` command-line entry point.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qbs::aqp::{assess, load_table, BootstrapReport, QuerySpec, TableFormat};
use qbs::qbs::Mode;
use qbs::qcore::{Bitstring, Circuit, ShotSampler};
use qbs::qcounter::{build_counter, counter_width, CounterSpec};
use qbs::qram::{build_qsa, build_value_qsa, DataArray};
use qbs::rng::derive_seed;
use qbs::selfcheck::{run_selfcheck, SelfCheckOptions};
use qbs::VERSION;

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "qbs", version, about = "Quantum bootstrap sampling for approximate query error assessment")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; drawn from entropy and echoed when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Sequential,
    Parallel,
    Oracle,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sequential => Mode::QuantumSequential,
            ModeArg::Parallel => Mode::QuantumParallel,
            ModeArg::Oracle => Mode::ClassicalOracle,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measure the resampler (Hadamards + QRAM) over a data array file.
    QramTest {
        /// JSON data file: {"bits": [...]} or {"values": [...], "width": w}.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
    },
    /// Run the quantum counter on a control bitstring, or on every input.
    CounterTest {
        /// Control qubits, highest first (e.g. 00011111).
        #[arg(long, conflicts_with_all = ["exhaustive", "superpose"])]
        controls: Option<String>,
        /// Check every control basis state against popcount.
        #[arg(long)]
        exhaustive: bool,
        /// Put the controls in uniform superposition and take one shot.
        #[arg(long, conflicts_with = "exhaustive")]
        superpose: bool,
        /// Number of control qubits for --exhaustive / --superpose.
        #[arg(short, long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=16))]
        p: u32,
    },
    /// Estimate a query on a sample and assess its error by bootstrap.
    Assess {
        #[arg(long)]
        table: PathBuf,
        /// Force the table format instead of guessing from the extension.
        #[arg(long, value_enum)]
        table_format: Option<TableFormatArg>,
        /// JSON query: {aggregate, target_column?, conditions: [{column, op, value}]}.
        #[arg(long)]
        query: PathBuf,
        /// Sample size.
        #[arg(short, long)]
        n: usize,
        /// Bootstrap replications.
        #[arg(short = 'B', long = "reps", default_value_t = 1000)]
        reps: usize,
        /// Significance level, in (0, 0.5).
        #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Sequential)]
        mode: ModeArg,
        /// Also write the replications as CSV.
        #[arg(long)]
        replications_csv: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Selfcheck {
        #[arg(long, hide = true)]
        corrupt_counter: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormatArg {
    Csv,
    Json,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 0.5 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 0.5), got {a}"))
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_USAGE, message: e.to_string() }
    }
}

/// Rendered output plus whether its verification passed.
struct Output {
    body: String,
    verified: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or_else(rand::random);
    let result = match &cli.command {
        Command::QramTest { data, shots } => qram_test(data, *shots, seed, cli.format),
        Command::CounterTest { controls, exhaustive, superpose, p } => {
            counter_test(controls.as_deref(), *exhaustive, *superpose, *p as usize, seed, cli.format)
        }
        Command::Assess { table, table_format, query, n, reps, alpha, mode, replications_csv } => {
            let format = table_format.map(|f| match f {
                TableFormatArg::Csv => TableFormat::Csv,
                TableFormatArg::Json => TableFormat::Json,
            });
            cmd_assess(
                table,
                format,
                query,
                *n,
                *reps,
                *alpha,
                (*mode).into(),
                seed,
                cli.format,
                replications_csv.as_deref(),
            )
        }
        Command::Selfcheck { corrupt_counter } => {
            Ok(selfcheck(*corrupt_counter, cli.format))
        }
    };
    let output = match result {
        Ok(o) => o,
        Err(f) => {
            eprintln!("qbs: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    if let Err(e) = emit(cli.out.as_deref(), &output.body) {
        eprintln!("qbs: cannot write output: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    if output.verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}

fn emit(out: Option<&Path>, body: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn bar(count: u64, max: u64, width: usize) -> String {
    let len = if max == 0 { 0 } else { ((count as f64 / max as f64) * width as f64).round() as usize };
    "█".repeat(len)
}

#[derive(Serialize)]
struct QramRow {
    address_binary: String,
    address_decimal: u64,
    data: String,
    expected: String,
    count: u64,
}

fn qram_test(path: &Path, shots: u64, seed: u64, format: Format) -> Result<Output, Failure> {
    let data = DataArray::load(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let (circuit, a, width, expected): (Circuit, usize, usize, Vec<u64>) = match &data {
        DataArray::Bits(b) => (
            build_qsa(b).map_err(Failure::input)?,
            b.address_width(),
            1,
            b.bits().iter().map(|&x| u64::from(x)).collect(),
        ),
        DataArray::Values(v) => (
            build_value_qsa(v).map_err(Failure::input)?,
            v.address_width(),
            v.width(),
            v.values().to_vec(),
        ),
    };
    let counts = ShotSampler::for_circuit(&circuit)
        .and_then(|s| s.sample(shots, seed))
        .map_err(Failure::input)?;

    let mut rows: Vec<QramRow> = counts
        .iter()
        .map(|(b, count)| {
            let addr = b.slice(0, a);
            let value = b.slice(a, width);
            QramRow {
                address_binary: addr.to_string(),
                address_decimal: addr.value(),
                data: value.to_string(),
                expected: Bitstring::new(expected[addr.value() as usize], width).to_string(),
                count,
            }
        })
        .collect();
    rows.sort_by(|x, y| (&x.data, x.address_decimal).cmp(&(&y.data, y.address_decimal)));
    let verified = rows.iter().all(|r| r.data == r.expected);

    let body = match format {
        Format::Json => to_json(&json!({
            "command": "qram-test",
            "version": VERSION,
            "seed": seed,
            "shots": shots,
            "address_qubits": a,
            "data_qubits": width,
            "rows": rows,
            "lookup_matches": verified,
        })),
        Format::Csv => {
            let mut s = String::from("address_binary,address_decimal,data,count\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{}", r.address_binary, r.address_decimal, r.data, r.count);
            }
            s
        }
        Format::Text => {
            let max = rows.iter().map(|r| r.count).max().unwrap_or(0);
            let mut s = format!("qbs {VERSION} qram-test  seed={seed}  shots={shots}\n");
            let _ = writeln!(s, "{:<10} {:>8} {:>6} {:>7}", "address", "decimal", "data", "count");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<10} {:>8} {:>6} {:>7}  {}",
                    r.address_binary,
                    r.address_decimal,
                    r.data,
                    r.count,
                    bar(r.count, max, 40)
                );
            }
            let _ = writeln!(s, "lookup {}", if verified { "matches data array" } else { "MISMATCH" });
            s
        }
    };
    Ok(Output { body, verified })
}

#[derive(Serialize)]
struct CounterRun {
    full_bitstring: String,
    full_bitstring_qubit_order: String,
    control_bits: String,
    ones: u32,
    counter_bits: String,
    value: u64,
    correct: bool,
}

fn counter_circuit(p: usize, prep: impl Fn(&mut Circuit) -> qbs::Result<()>) -> qbs::Result<(Circuit, CounterSpec)> {
    let spec = CounterSpec::new(p, counter_width(p))?;
    let mut c = Circuit::new(spec.num_qubits())?;
    prep(&mut c)?;
    let identity: Vec<usize> = (0..spec.num_qubits()).collect();
    c.compose(&build_counter(spec)?, &identity, "")?;
    Ok((c, spec))
}

fn run_counter_once(c: &Circuit, spec: CounterSpec, seed: u64) -> qbs::Result<CounterRun> {
    let shot = ShotSampler::for_circuit(c)?.measure_once(seed);
    let controls = shot.slice(0, spec.controls());
    let counter = shot.slice(spec.controls(), spec.counter());
    Ok(CounterRun {
        full_bitstring: shot.to_string(),
        full_bitstring_qubit_order: shot.to_little_endian_string(),
        control_bits: controls.to_string(),
        ones: controls.value().count_ones(),
        counter_bits: counter.to_string(),
        value: counter.value(),
        correct: counter.value() == u64::from(controls.value().count_ones()),
    })
}

fn counter_test(
    controls: Option<&str>,
    exhaustive: bool,
    superpose: bool,
    p: usize,
    seed: u64,
    format: Format,
) -> Result<Output, Failure> {
    if exhaustive {
        if p > 10 {
            return Err(Failure::input("exhaustive mode supports at most 10 control qubits"));
        }
        let mut correct = 0u64;
        let mut failures = Vec::new();
        let total = 1u64 << p;
        for input in 0..total {
            let (c, spec) = counter_circuit(p, |c| {
                for q in (0..p).filter(|q| (input >> q) & 1 == 1) {
                    c.x(q)?;
                }
                Ok(())
            })
            .map_err(Failure::input)?;
            let run = run_counter_once(&c, spec, derive_seed(seed, input)).map_err(Failure::input)?;
            if run.correct {
                correct += 1;
            } else {
                failures.push(run);
            }
        }
        let verified = correct == total;
        let body = match format {
            Format::Json => to_json(&json!({
                "command": "counter-test",
                "version": VERSION,
                "seed": seed,
                "p": p,
                "q": counter_width(p),
                "correct": correct,
                "total": total,
                "passed": verified,
                "failures": failures,
            })),
            Format::Csv => format!("p,q,correct,total,passed\n{p},{},{correct},{total},{verified}\n", counter_width(p)),
            Format::Text => {
                let mut s = format!("qbs {VERSION} counter-test  seed={seed}  p={p}  q={}\n", counter_width(p));
                for f in &failures {
                    let _ = writeln!(s, "  wrong: controls {} -> counter {} ({})", f.control_bits, f.counter_bits, f.value);
                }
                let _ = writeln!(s, "{correct}/{total} correct");
                s
            }
        };
        return Ok(Output { body, verified });
    }

    let (circuit, spec) = match controls {
        Some(bits) => {
            let parsed: Bitstring = bits.parse().map_err(Failure::input)?;
            counter_circuit(parsed.len(), |c| {
                for q in (0..parsed.len()).filter(|&q| parsed.bit(q)) {
                    c.x(q)?;
                }
                Ok(())
            })
        }
        None if superpose => counter_circuit(p, |c| {
            for q in 0..p {
                c.h(q)?;
            }
            Ok(())
        }),
        None => return Err(Failure::input("give --controls BITS, --exhaustive or --superpose")),
    }
    .map_err(Failure::input)?;
    let run = run_counter_once(&circuit, spec, seed).map_err(Failure::input)?;
    let verified = run.correct;
    let body = match format {
        Format::Json => to_json(&json!({
            "command": "counter-test",
            "version": VERSION,
            "seed": seed,
            "p": spec.controls(),
            "q": spec.counter(),
            "run": run,
        })),
        Format::Csv => format!(
            "full_bitstring,control_bits,counter_bits,value,correct\n{},{},{},{},{}\n",
            run.full_bitstring, run.control_bits, run.counter_bits, run.value, run.correct
        ),
        Format::Text => {
            let mut s = format!("qbs {VERSION} counter-test  seed={seed}  p={}  q={}\n", spec.controls(), spec.counter());
            let _ = writeln!(s, "Full bitstring measured  |{}> (last bit to first bit; qubit order {})", run.full_bitstring, run.full_bitstring_qubit_order);
            let _ = writeln!(s, "Control bits measured    |{}> ({} ones)", run.control_bits, run.ones);
            let _ = writeln!(s, "Counter bits measured    |{}> (binary of value {})", run.counter_bits, run.value);
            s
        }
    };
    Ok(Output { body, verified })
}

fn replications_csv(report: &BootstrapReport) -> String {
    let mut s = String::from("index,raw,estimate\n");
    for (i, r) in report.replications.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{}", r.raw, r.estimate);
    }
    s
}

fn report_text(report: &BootstrapReport) -> String {
    let mut s = format!(
        "qbs {}  {}  mode={}  seed={}\n",
        report.version, report.aggregate, report.mode, report.seed
    );
    let _ = writeln!(s, "sample n={} of N={}  (f={})", report.n, report.population, report.f);
    let _ = writeln!(s, "estimate      {:.4}", report.point_estimate);
    let _ = writeln!(s, "bootstrap se  {:.4}  (B={})", report.se_b, report.b);
    let _ = writeln!(
        s,
        "interval      ({:.4}, {:.4})  alpha={} z={:.4}",
        report.ci.0, report.ci.1, report.alpha, report.z
    );
    let mut hist = std::collections::BTreeMap::<u64, u64>::new();
    for r in &report.replications {
        *hist.entry(r.raw).or_insert(0) += 1;
    }
    let max = hist.values().copied().max().unwrap_or(0);
    let _ = writeln!(s, "replications (raw total: count)");
    for (raw, count) in &hist {
        let _ = writeln!(s, "{raw:>6} {count:>7}  {}", bar(*count, max, 40));
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn cmd_assess(
    table_path: &Path,
    table_format: Option<TableFormat>,
    query_path: &Path,
    n: usize,
    reps: usize,
    alpha: f64,
    mode: Mode,
    seed: u64,
    format: Format,
    csv_path: Option<&Path>,
) -> Result<Output, Failure> {
    let fmt = table_format.unwrap_or_else(|| TableFormat::from_path(table_path));
    let table = load_table(table_path, fmt).map_err(|e| Failure::input(format!("{}: {e}", table_path.display())))?;
    let query = QuerySpec::load(query_path).map_err(|e| Failure::input(format!("{}: {e}", query_path.display())))?;
    let params = qbs::aqp::AssessParams { n, b: reps, alpha, mode, seed };
    let report = assess(&table, &query, &params).map_err(Failure::input)?;
    if let Some(path) = csv_path {
        std::fs::write(path, replications_csv(&report)).map_err(Failure::input)?;
    }
    let body = match format {
        Format::Json => to_json(&report),
        Format::Csv => replications_csv(&report),
        Format::Text => report_text(&report),
    };
    Ok(Output { body, verified: true })
}

fn selfcheck(corrupt_counter: bool, format: Format) -> Output {
    let report = run_selfcheck(SelfCheckOptions { corrupt_counter });
    let verified = report.passed();
    let body = match format {
        Format::Json => to_json(&json!({
            "command": "selfcheck",
            "version": VERSION,
            "passed": verified,
            "checks": report.checks,
        })),
        Format::Csv => {
            let mut s = String::from("check,passed,detail\n");
            for c in &report.checks {
                let _ = writeln!(s, "\"{}\",{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"));
            }
            s
        }
        Format::Text => report.summary(),
    };
    Output { body, verified }
}
