use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::results::PairResult;
use crate::error::Error;

/// Placeholder for a feature a result does not carry.
pub const ABSENT: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grouping {
    Condition,
    Subcondition,
    /// Feature values (including named lexical slots), within condition.
    Features(Vec<String>),
}

impl Grouping {
    pub fn columns(&self) -> Vec<String> {
        match self {
            Grouping::Condition => vec!["condition".into()],
            Grouping::Subcondition => vec!["condition".into(), "subcondition".into()],
            Grouping::Features(keys) => std::iter::once("condition".to_string())
                .chain(keys.iter().cloned())
                .collect(),
        }
    }

    pub fn key(&self, condition: &str, subcondition: &str, features: &BTreeMap<String, String>) -> Vec<String> {
        match self {
            Grouping::Condition => vec![condition.to_string()],
            Grouping::Subcondition => vec![condition.to_string(), subcondition.to_string()],
            Grouping::Features(keys) => std::iter::once(condition.to_string())
                .chain(
                    keys.iter()
                        .map(|k| features.get(k).cloned().unwrap_or_else(|| ABSENT.to_string())),
                )
                .collect(),
        }
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grouping::Condition => f.write_str("condition"),
            Grouping::Subcondition => f.write_str("subcondition"),
            Grouping::Features(keys) => write!(f, "features:{}", keys.join("+")),
        }
    }
}

/// Accepts `condition`, `subcondition`, or `features:a+b` (the prefix is
/// optional).
impl FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "condition" => Ok(Grouping::Condition),
            "subcondition" => Ok(Grouping::Subcondition),
            other => {
                let spec = other.strip_prefix("features:").unwrap_or(other);
                let keys: Vec<String> = spec.split('+').map(|k| k.trim().to_string()).collect();
                if keys.iter().any(String::is_empty) {
                    return Err(Error::InvalidArgument(format!("bad grouping {s:?}")));
                }
                Ok(Grouping::Features(keys))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub key: Vec<String>,
    pub correct: u64,
    pub ties: u64,
    pub count: u64,
    /// `correct / count`.
    pub accuracy: f64,
}

impl AccuracyRow {
    pub fn new(key: Vec<String>, correct: u64, ties: u64, count: u64) -> Self {
        AccuracyRow {
            key,
            correct,
            ties,
            count,
            accuracy: if count == 0 { 0.0 } else { correct as f64 / count as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub grouping: String,
    pub columns: Vec<String>,
    /// In order of first appearance in the input.
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyTable {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }

    pub fn row(&self, key: &[&str]) -> Option<&AccuracyRow> {
        self.rows
            .iter()
            .find(|r| r.key.iter().map(String::as_str).eq(key.iter().copied()))
    }
}

pub fn aggregate(results: &[PairResult], grouping: &Grouping) -> AccuracyTable {
    AccuracyTable::from_outcomes(
        grouping,
        results.iter().map(|r| {
            (
                grouping.key(&r.condition, &r.subcondition, &r.features),
                r.correct,
                r.tie,
            )
        }),
    )
}

impl AccuracyTable {
    /// Builds a table from `(group key, correct, tie)` outcomes.
    pub fn from_outcomes(grouping: &Grouping, outcomes: impl IntoIterator<Item = (Vec<String>, bool, bool)>) -> Self {
        let mut index: HashMap<Vec<String>, usize> = HashMap::new();
        let mut acc: Vec<(Vec<String>, u64, u64, u64)> = Vec::new();
        for (key, correct, tie) in outcomes {
            let i = match index.get(&key) {
                Some(&i) => i,
                None => {
                    index.insert(key.clone(), acc.len());
                    acc.push((key, 0, 0, 0));
                    acc.len() - 1
                }
            };
            let slot = &mut acc[i];
            slot.1 += correct as u64;
            slot.2 += tie as u64;
            slot.3 += 1;
        }
        AccuracyTable {
            grouping: grouping.to_string(),
            columns: grouping.columns(),
            rows: acc
                .into_iter()
                .map(|(key, c, t, n)| AccuracyRow::new(key, c, t, n))
                .collect(),
        }
    }
}
