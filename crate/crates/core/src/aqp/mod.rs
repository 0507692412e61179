//! Classical query layer: sampling, predicate evaluation, estimators,
//! bootstrap standard error and normal-percentile confidence intervals.

mod query;
mod table;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use query::{draw_sample, tuple_results, CmpOp, CompiledQuery, Condition, DrawnSample, QuerySpec};
pub use table::{load_table, ColumnType, TableData, TableFormat, Value};

use crate::error::{Error, Result};
use crate::qbs::{replicate, Aggregate, Mode, Replication, ReplicationSet, SampleResults};
use crate::rng::derive_seed;
use crate::stats;

/// Point estimate: `sum(y) / f` for COUNT and SUM, `sum(y) / matches` for AVG.
pub fn estimate(sample: &SampleResults) -> Result<f64> {
    match sample.aggregate() {
        Aggregate::Count | Aggregate::Sum => Ok(sample.sum() as f64 / sample.f()),
        Aggregate::Avg => match sample.matches() {
            0 => Err(Error::NoMatchingRows),
            m => Ok(sample.sum() as f64 / m as f64),
        },
    }
}

/// Sample standard deviation of the replication estimates (`B - 1` denominator).
pub fn bootstrap_se(replications: &ReplicationSet) -> Result<f64> {
    stats::sample_std_dev(&replications.estimates())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub z: f64,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// `(estimate - z * se, estimate + z * se)` with `z = z^(1-alpha)`.
pub fn confidence_interval(estimate: f64, se: f64, alpha: f64) -> Result<ConfidenceInterval> {
    let z = stats::z_percentile(alpha)?;
    if se.is_nan() || se < 0.0 {
        return Err(Error::Unsupported(format!("standard error must be non-negative, got {se}")));
    }
    Ok(ConfidenceInterval { lower: estimate - z * se, upper: estimate + z * se, z })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validate,
    Sample,
    TupleResults,
    Estimate,
    Replicate,
    StandardError,
    ConfidenceInterval,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Validate => "validate",
            Stage::Sample => "sample",
            Stage::TupleResults => "tuple results",
            Stage::Estimate => "estimate",
            Stage::Replicate => "replicate",
            Stage::StandardError => "standard error",
            Stage::ConfidenceInterval => "confidence interval",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct AssessError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, AssessError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, AssessError> {
        self.map_err(|source| AssessError { stage, source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssessParams {
    pub n: usize,
    pub b: usize,
    pub alpha: f64,
    pub mode: Mode,
    pub seed: u64,
}

/// End-to-end result with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub version: String,
    pub aggregate: Aggregate,
    pub mode: Mode,
    pub point_estimate: f64,
    pub se_b: f64,
    pub alpha: f64,
    pub z: f64,
    pub ci: (f64, f64),
    #[serde(rename = "B")]
    pub b: usize,
    pub f: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub population: usize,
    pub seed: u64,
    pub replications: Vec<Replication>,
}

impl BootstrapReport {
    pub fn interval(&self) -> ConfidenceInterval {
        ConfidenceInterval { lower: self.ci.0, upper: self.ci.1, z: self.z }
    }
}

/// Child-seed stream for drawing the AQP sample.
const SAMPLE_STREAM: u64 = 0;
/// Child-seed stream for the replications.
const REPLICATE_STREAM: u64 = 1;

/// Sample, evaluate, estimate, replicate, and summarise in one pass.
/// Reproducible from `params.seed`.
pub fn assess(
    table: &TableData,
    query: &QuerySpec,
    params: &AssessParams,
) -> std::result::Result<BootstrapReport, AssessError> {
    stats::z_percentile(params.alpha).at(Stage::Validate)?;
    if params.b < 2 {
        return Err(Error::TooFewReplications(params.b)).at(Stage::Validate);
    }
    query.compile(table).at(Stage::Validate)?;

    let drawn = draw_sample(table, params.n, derive_seed(params.seed, SAMPLE_STREAM)).at(Stage::Sample)?;
    let sample = tuple_results(table, &drawn, query).at(Stage::TupleResults)?;
    let point = estimate(&sample).at(Stage::Estimate)?;
    let reps = replicate(&sample, params.b, params.mode, derive_seed(params.seed, REPLICATE_STREAM))
        .at(Stage::Replicate)?;
    let se = bootstrap_se(&reps).at(Stage::StandardError)?;
    let ci = confidence_interval(point, se, params.alpha).at(Stage::ConfidenceInterval)?;

    Ok(BootstrapReport {
        version: crate::VERSION.to_string(),
        aggregate: query.aggregate,
        mode: params.mode,
        point_estimate: point,
        se_b: se,
        alpha: params.alpha,
        z: ci.z,
        ci: (ci.lower, ci.upper),
        b: params.b,
        f: sample.f(),
        n: sample.n(),
        population: sample.population(),
        seed: params.seed,
        replications: reps.replications,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_of(values: &[f64]) -> ReplicationSet {
        ReplicationSet {
            mode: Mode::ClassicalOracle,
            seed: 0,
            b: values.len(),
            f: 1.0,
            replications: values.iter().map(|&e| Replication { raw: 0, estimate: e, matched: None }).collect(),
        }
    }

    #[test]
    fn estimate_scales_by_fraction() {
        let s = SampleResults::count(vec![1, 0, 1, 1], 10).unwrap();
        assert!((estimate(&s).unwrap() - 7.5).abs() < 1e-12);
        let z = SampleResults::count(vec![0; 4], 10).unwrap();
        assert_eq!(estimate(&z).unwrap(), 0.0);
    }

    #[test]
    fn avg_estimate_is_ratio() {
        let s = SampleResults::new(Aggregate::Avg, vec![10, 0, 20, 0], vec![true, true, true, false], 100).unwrap();
        assert!((estimate(&s).unwrap() - 10.0).abs() < 1e-12);
        let none = SampleResults::new(Aggregate::Avg, vec![0, 0], vec![false, false], 100).unwrap();
        assert!(matches!(estimate(&none), Err(Error::NoMatchingRows)));
    }

    #[test]
    fn se_by_hand() {
        assert!((bootstrap_se(&set_of(&[2.0, 4.0])).unwrap() - std::f64::consts::SQRT_2).abs() < 1e-9);
        assert_eq!(bootstrap_se(&set_of(&[5.0; 10])).unwrap(), 0.0);
        assert!(matches!(bootstrap_se(&set_of(&[1.0])), Err(Error::TooFewReplications(1))));
    }

    #[test]
    fn interval_with_ninety_percent_z() {
        let ci = confidence_interval(100.0, 10.0, 0.05).unwrap();
        assert!((ci.lower - 83.55).abs() < 0.01 && (ci.upper - 116.45).abs() < 0.01);
        assert_eq!(ci.width(), 2.0 * ci.z * 10.0);
        assert!(confidence_interval(1.0, 1.0, 0.7).is_err());
        assert!(confidence_interval(1.0, -1.0, 0.05).is_err());
    }

    #[test]
    fn assess_tags_stage() {
        let t = TableData::from_csv_reader("v\n1\n2\n".as_bytes()).unwrap();
        let q = QuerySpec::count(vec![]);
        let p = AssessParams { n: 3, b: 10, alpha: 0.05, mode: Mode::ClassicalOracle, seed: 1 };
        assert_eq!(assess(&t, &q, &p).unwrap_err().stage, Stage::Sample);
        let p = AssessParams { alpha: 0.6, ..p };
        assert_eq!(assess(&t, &q, &p).unwrap_err().stage, Stage::Validate);
        let p = AssessParams { n: 2, b: 10, alpha: 0.05, mode: Mode::QuantumParallel, seed: 1 };
        assert!(assess(&t, &q, &p).is_ok());
    }
}
