use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance between a record's total and the sum of its per-token values.
pub const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Member {
    Grammatical,
    Ungrammatical,
}

impl Member {
    pub const BOTH: [Member; 2] = [Member::Grammatical, Member::Ungrammatical];

    pub fn as_str(self) -> &'static str {
        match self {
            Member::Grammatical => "grammatical",
            Member::Ungrammatical => "ungrammatical",
        }
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `{pair_id}:grammatical` or `{pair_id}:ungrammatical`.
pub fn sentence_id(pair_id: &str, member: Member) -> String {
    format!("{pair_id}:{member}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRecord {
    pub sentence_id: String,
    /// Natural log.
    pub logprob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_logprobs: Option<Vec<f64>>,
}

impl ScoreRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.logprob.is_finite() {
            return Err(Error::ScoreRecord {
                sentence_id: self.sentence_id.clone(),
                message: format!("logprob {} is not finite", self.logprob),
            });
        }
        if let Some(tokens) = &self.token_logprobs {
            let sum: f64 = tokens.iter().sum();
            if (sum - self.logprob).abs() > SUM_TOLERANCE {
                return Err(Error::ScoreRecord {
                    sentence_id: self.sentence_id.clone(),
                    message: format!(
                        "token_logprobs sum to {sum}, logprob is {} (difference {:.3e})",
                        self.logprob,
                        (sum - self.logprob).abs()
                    ),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScoreSet {
    records: HashMap<String, ScoreRecord>,
}

impl ScoreSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a record, returning the one it replaced.
    pub fn insert(&mut self, record: ScoreRecord) -> Option<ScoreRecord> {
        self.records.insert(record.sentence_id.clone(), record)
    }

    pub fn get(&self, sentence_id: &str) -> Option<&ScoreRecord> {
        self.records.get(sentence_id)
    }

    pub fn member(&self, pair_id: &str, member: Member) -> Option<&ScoreRecord> {
        self.get(&sentence_id(pair_id, member))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records sorted by sentence id.
    pub fn sorted(&self) -> Vec<&ScoreRecord> {
        let mut v: Vec<&ScoreRecord> = self.records.values().collect();
        v.sort_by(|a, b| a.sentence_id.cmp(&b.sentence_id));
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRecord {
    pub line: usize,
    pub sentence_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub lines: usize,
    pub accepted: usize,
    pub duplicates: Vec<String>,
    pub rejected: Vec<RejectedRecord>,
}

/// Reads JSON Lines score records. Syntax errors abort with the line number;
/// records failing validation are rejected individually and reported.
pub fn ingest_scores<R: BufRead>(reader: R) -> Result<(ScoreSet, IngestReport)> {
    let mut set = ScoreSet::new();
    let mut report = IngestReport::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        report.lines += 1;
        let record: ScoreRecord = serde_json::from_str(&line).map_err(|e| Error::Json {
            line: i + 1,
            message: e.to_string(),
        })?;
        if let Err(e) = record.validate() {
            report.rejected.push(RejectedRecord {
                line: i + 1,
                sentence_id: record.sentence_id.clone(),
                message: e.to_string(),
            });
            continue;
        }
        let id = record.sentence_id.clone();
        if set.insert(record).is_some() {
            log::warn!("line {}: duplicate score for {id}; keeping the later record", i + 1);
            report.duplicates.push(id);
        }
        report.accepted += 1;
    }
    Ok((set, report))
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<(ScoreSet, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_scores(BufReader::new(file))
}
