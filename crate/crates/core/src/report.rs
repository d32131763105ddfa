//! Accuracy tables and per-word traces rendered as CSV or aligned plain
//! text. Machine-readable output keeps full precision; text
//! output rounds accuracies to two decimals at the final step only.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{aggregate, word_trace, AccuracyTable, Grouping, Member, PairResult, Scorer};
use crate::grammar::{Grammar, MinimalPair};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Accuracy(Option<f64>),
    Count(u64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Accuracy(Some(a)) => a.to_string(),
            Cell::Accuracy(None) => String::new(),
            Cell::Count(n) => n.to_string(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Accuracy(Some(a)) => format!("{a:.2}"),
            Cell::Accuracy(None) => "-".into(),
            Cell::Count(n) => n.to_string(),
        }
    }

    fn right_aligned(&self) -> bool {
        !matches!(self, Cell::Text(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub section: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl ReportDocument {
    /// Comma-separated with a header row; the section is the first column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header = std::iter::once("section").chain(self.columns.iter().map(String::as_str));
        w.write_record(header).map_err(csv_error)?;
        for row in &self.rows {
            let cells = std::iter::once(row.section.clone()).chain(row.cells.iter().map(Cell::csv));
            w.write_record(cells).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 cells")
    }

    /// Aligned table with a header line per section.
    pub fn to_text(&self) -> String {
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.cells.iter().map(Cell::text).collect())
            .collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &rendered {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String], right: &dyn Fn(usize) -> bool| -> String {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if right(i) {
                        format!("{c:>w$}", w = widths[i])
                    } else {
                        format!("{c:<w$}", w = widths[i])
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let numeric: Vec<bool> = (0..self.columns.len())
            .map(|i| {
                self.rows
                    .iter()
                    .any(|r| r.cells.get(i).is_some_and(Cell::right_aligned))
            })
            .collect();
        let is_numeric = |i: usize| numeric[i];

        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str(&self.title);
            out.push('\n');
        }
        let header = line(&self.columns, &is_numeric);
        let rule = "-".repeat(header.chars().count());
        out.push_str(&header);
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        let mut section: Option<&str> = None;
        for (row, cells) in self.rows.iter().zip(&rendered) {
            if !row.section.is_empty() && section != Some(row.section.as_str()) {
                out.push_str(&row.section);
                out.push_str(":\n");
                section = Some(&row.section);
            }
            out.push_str(&line(cells, &is_numeric));
            out.push('\n');
        }
        out
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

/// One column of accuracies from a single source.
pub struct Column<'a> {
    pub name: String,
    pub table: &'a AccuracyTable,
}

/// Overall table: one row per condition in grammar order, grouped into
/// sections, with one accuracy column per source and the sentence count of
/// the generated suite (two sentences per pair).
pub fn emit_overall(
    grammar: &Grammar,
    columns: &[Column<'_>],
    pair_counts: &BTreeMap<String, u64>,
) -> Result<ReportDocument> {
    for c in columns {
        if c.table.columns.first().map(String::as_str) != Some("condition") || c.table.columns.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "column {:?} is grouped by {}, expected condition",
                c.name, c.table.grouping
            )));
        }
    }
    let mut header = vec!["condition".to_string()];
    header.extend(columns.iter().map(|c| c.name.clone()));
    header.push("sentences".into());

    let rows = grammar
        .conditions
        .iter()
        .map(|cond| {
            let mut cells = vec![Cell::Text(cond.label.clone())];
            for c in columns {
                cells.push(Cell::Accuracy(c.table.row(&[&cond.id]).map(|r| r.accuracy)));
            }
            cells.push(Cell::Count(2 * pair_counts.get(&cond.id).copied().unwrap_or(0)));
            Row {
                section: cond.section.clone(),
                cells,
            }
        })
        .collect();
    Ok(ReportDocument {
        title: String::new(),
        columns: header,
        rows,
    })
}

/// Sentence-case slash rendering: `The author laughs/*laugh.`
pub fn display_pair(pair: &MinimalPair) -> String {
    sentence_case(&pair.slash_notation())
}

/// One member in sentence case: `The author laughs.`
pub fn display_pair_member(pair: &MinimalPair, member: Member) -> String {
    let tokens = match member {
        Member::Grammatical => &pair.grammatical,
        Member::Ungrammatical => &pair.ungrammatical,
    };
    sentence_case(&tokens.join(" "))
}

fn sentence_case(s: &str) -> String {
    let mut s = s.to_string();
    if s.ends_with(" .") {
        s.truncate(s.len() - 2);
        s.push('.');
    }
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => s,
    }
}

/// Results of one source for a cross-tab.
pub struct ResultColumn<'a> {
    pub name: String,
    pub results: &'a [PairResult],
}

/// Cross-tab of `conditions` by the feature `axes`, restricted to pairs whose
/// features match every `filter` entry. One block per condition; within a
/// block, one row per feature combination in generation order, with the first
/// generated pair of that cell as the example.
pub fn emit_crosstab(
    grammar: &Grammar,
    pairs: &[MinimalPair],
    columns: &[ResultColumn<'_>],
    conditions: &[&str],
    axes: &[&str],
    filter: &[(&str, &str)],
) -> Result<ReportDocument> {
    let keep = |features: &BTreeMap<String, String>| {
        filter
            .iter()
            .all(|(k, v)| features.get(*k).map(String::as_str) == Some(*v))
    };
    let grouping = Grouping::Features(axes.iter().map(|a| a.to_string()).collect());
    let tables: Vec<AccuracyTable> = columns
        .iter()
        .map(|c| {
            let selected: Vec<PairResult> = c
                .results
                .iter()
                .filter(|r| conditions.contains(&r.condition.as_str()) && keep(&r.features))
                .cloned()
                .collect();
            aggregate(&selected, &grouping)
        })
        .collect();

    let mut header: Vec<String> = axes.iter().map(|a| a.to_string()).collect();
    header.extend(columns.iter().map(|c| c.name.clone()));
    header.push("pairs".into());
    header.push("example".into());

    let mut rows = Vec::new();
    for &cond in conditions {
        let label = grammar
            .condition(cond)
            .map(|c| c.label.clone())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown condition {cond:?}")))?;
        let mut cells_seen: Vec<(Vec<String>, &MinimalPair, u64)> = Vec::new();
        for p in pairs.iter().filter(|p| p.condition == cond && keep(&p.features)) {
            let values: Vec<String> = axes
                .iter()
                .map(|a| {
                    p.features
                        .get(*a)
                        .cloned()
                        .unwrap_or_else(|| crate::eval::ABSENT.to_string())
                })
                .collect();
            match cells_seen.iter_mut().find(|(v, _, _)| *v == values) {
                Some(entry) => entry.2 += 1,
                None => cells_seen.push((values, p, 1)),
            }
        }
        if cells_seen.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "condition {cond:?} has no pairs matching the filter"
            )));
        }
        for (values, example, count) in cells_seen {
            let mut key = vec![cond.to_string()];
            key.extend(values.iter().cloned());
            let key_refs: Vec<&str> = key.iter().map(String::as_str).collect();
            let mut cells: Vec<Cell> = values.into_iter().map(Cell::Text).collect();
            for t in &tables {
                cells.push(Cell::Accuracy(t.row(&key_refs).map(|r| r.accuracy)));
            }
            cells.push(Cell::Count(count));
            cells.push(Cell::Text(display_pair(example)));
            rows.push(Row {
                section: label.clone(),
                cells,
            });
        }
    }
    Ok(ReportDocument {
        title: String::new(),
        columns: header,
        rows,
    })
}

/// Two-decimal accuracy, except that a perfect score renders as `1.0`.
pub fn format_tuple_value(a: f64) -> String {
    if a == 1.0 {
        "1.0".into()
    } else {
        format!("{a:.2}")
    }
}

/// Per-subcondition listing: one line per subcondition with an example pair
/// and the accuracy tuple over `columns`, e.g.
/// `the author laughs/*laugh. : (0.93, 1.0)`.
pub fn emit_subconditions(grammar: &Grammar, pairs: &[MinimalPair], columns: &[Column<'_>]) -> Result<String> {
    for c in columns {
        if c.table.columns != ["condition", "subcondition"] {
            return Err(Error::InvalidArgument(format!(
                "column {:?} is grouped by {}, expected subcondition",
                c.name, c.table.grouping
            )));
        }
    }
    let mut first: BTreeMap<(&str, &str), &MinimalPair> = BTreeMap::new();
    for p in pairs {
        first
            .entry((p.condition.as_str(), p.subcondition.as_str()))
            .or_insert(p);
    }
    let mut out = String::new();
    let mut section = "";
    let mut condition = "";
    for (cond, sub) in grammar.enumerate_conditions() {
        let c = grammar
            .condition(&cond)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown condition {cond:?}")))?;
        if c.section != section {
            out.push_str(&format!("{}\n", c.section.to_uppercase()));
            section = &c.section;
        }
        if c.id != condition {
            out.push_str(&format!("  {}:\n", c.label));
            condition = &c.id;
        }
        let example = first
            .get(&(cond.as_str(), sub.as_str()))
            .map(|p| display_pair(p).to_lowercase())
            .unwrap_or_default();
        let values: Vec<String> = columns
            .iter()
            .map(|col| {
                col.table
                    .row(&[&cond, &sub])
                    .map(|r| format_tuple_value(r.accuracy))
                    .unwrap_or_else(|| "-".into())
            })
            .collect();
        out.push_str(&format!("    {sub}: {example} : ({})\n", values.join(", ")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub pair_id: String,
    pub member: Member,
    pub position: usize,
    pub token: String,
    pub logprob: f64,
}

/// End-of-sentence label used for the final trace row of each member.
pub const END_TOKEN: &str = "</s>";

/// Long-format per-word log-probabilities for both members of each pair.
pub fn emit_traces(scorer: &dyn Scorer, pairs: &[MinimalPair]) -> Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    for p in pairs {
        for (member, tokens) in [
            (Member::Grammatical, &p.grammatical),
            (Member::Ungrammatical, &p.ungrammatical),
        ] {
            let trace = word_trace(scorer, tokens)?;
            for (position, logprob) in trace.into_iter().enumerate() {
                rows.push(TraceRow {
                    pair_id: p.pair_id.clone(),
                    member,
                    position,
                    token: tokens.get(position).cloned().unwrap_or_else(|| END_TOKEN.to_string()),
                    logprob,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_traces_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
