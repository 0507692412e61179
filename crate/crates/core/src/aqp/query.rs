use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::table::{ColumnType, TableData, Value};
use crate::error::{Error, Result};
use crate::qbs::{Aggregate, SampleResults};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }
}

impl FromStr for CmpOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "=" | "==" => CmpOp::Eq,
            "!=" | "<>" | "≠" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" | "≤" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" | "≥" => CmpOp::Ge,
            other => return Err(Error::InvalidQuery(format!("unknown operator {other:?}"))),
        })
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for CmpOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for CmpOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub column: String,
    pub op: CmpOp,
    pub value: Value,
}

/// `SELECT aggregate(target) FROM table WHERE c1 AND c2 AND ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub aggregate: Aggregate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_column: Option<String>,
    #[serde(default)]
    pub conditions: Vec<Condition>,
}

impl QuerySpec {
    pub fn count(conditions: Vec<Condition>) -> Self {
        Self { aggregate: Aggregate::Count, target_column: None, conditions }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Resolve columns and type-check against `table`.
    pub fn compile(&self, table: &TableData) -> Result<CompiledQuery> {
        let target = match (self.aggregate, &self.target_column) {
            (Aggregate::Count, None) => None,
            (Aggregate::Count, Some(_)) => {
                return Err(Error::InvalidQuery("COUNT takes no target column".into()))
            }
            (_, None) => {
                return Err(Error::InvalidQuery(format!("{} needs a target column", self.aggregate)))
            }
            (_, Some(name)) => {
                let idx = table.column_index(name)?;
                if table.column_types()[idx] != ColumnType::Integer {
                    return Err(Error::TypeMismatch(format!(
                        "{} target {name:?} must be an integer column",
                        self.aggregate
                    )));
                }
                Some(idx)
            }
        };
        let mut predicates = Vec::with_capacity(self.conditions.len());
        for cond in &self.conditions {
            let idx = table.column_index(&cond.column)?;
            let numeric_col = table.column_types()[idx] != ColumnType::Text;
            let numeric_lit = !matches!(cond.value, Value::Text(_));
            if numeric_col != numeric_lit {
                return Err(Error::TypeMismatch(format!(
                    "column {:?} cannot be compared with {:?}",
                    cond.column,
                    cond.value.to_string()
                )));
            }
            predicates.push((idx, cond.op, cond.value.clone()));
        }
        Ok(CompiledQuery { aggregate: self.aggregate, target, predicates })
    }
}

/// A query bound to column positions of one table.
#[derive(Debug, Clone)]
pub struct CompiledQuery {
    aggregate: Aggregate,
    target: Option<usize>,
    predicates: Vec<(usize, CmpOp, Value)>,
}

impl CompiledQuery {
    pub fn matches(&self, row: &[Value]) -> bool {
        self.predicates.iter().all(|(idx, op, lit)| {
            row[*idx].compare(lit).is_some_and(|ord| op.holds(ord))
        })
    }

    /// `y` for one row: 0/1 for COUNT, the target value (or 0) otherwise.
    pub fn tuple_result(&self, row: &[Value]) -> Result<(u64, bool)> {
        let hit = self.matches(row);
        match self.target {
            None => Ok((u64::from(hit), hit)),
            Some(_) if !hit => Ok((0, false)),
            Some(idx) => match &row[idx] {
                Value::Int(v) if *v >= 0 => Ok((*v as u64, true)),
                other => Err(Error::TypeMismatch(format!(
                    "{} needs non-negative integers, found {other}",
                    self.aggregate
                ))),
            },
        }
    }
}

/// Row positions drawn from a table of `population` rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrawnSample {
    pub indices: Vec<usize>,
    pub population: usize,
}

impl DrawnSample {
    pub fn f(&self) -> f64 {
        self.indices.len() as f64 / self.population as f64
    }
}

/// Uniform sample of `n` distinct rows.
pub fn draw_sample(table: &TableData, n: usize, seed: u64) -> Result<DrawnSample> {
    let population = table.len();
    if n == 0 || n > population {
        return Err(Error::SampleSize { n, population });
    }
    let mut rng = rng_from_seed(seed);
    let indices = index::sample(&mut rng, population, n).into_vec();
    Ok(DrawnSample { indices, population })
}

/// Evaluate `query` on the sampled rows.
pub fn tuple_results(table: &TableData, sample: &DrawnSample, query: &QuerySpec) -> Result<SampleResults> {
    let compiled = query.compile(table)?;
    let mut y = Vec::with_capacity(sample.indices.len());
    let mut matched = Vec::with_capacity(sample.indices.len());
    for &i in &sample.indices {
        let (v, m) = compiled.tuple_result(&table.rows()[i])?;
        y.push(v);
        matched.push(m);
    }
    SampleResults::new(query.aggregate, y, matched, sample.population)
}
