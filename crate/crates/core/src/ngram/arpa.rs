//! ARPA backoff format. Probabilities and backoff weights are log10. Floats
//! are written in shortest round-trip form, so write-then-read is lossless.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::counts::Ngram;
use super::model::{Entry, NGramModel};
use crate::corpus::Vocab;
use crate::error::{Error, Result};

impl NGramModel {
    pub fn write_arpa<W: Write>(&self, mut out: W) -> Result<()> {
        let tables = self.tables();
        let vocab = self.vocab();
        writeln!(out, "\\data\\")?;
        for (k, table) in tables.iter().enumerate() {
            writeln!(out, "ngram {}={}", k + 1, table.len())?;
        }
        for (k, table) in tables.iter().enumerate() {
            writeln!(out)?;
            writeln!(out, "\\{}-grams:", k + 1)?;
            let mut rows: Vec<(&Ngram, &Entry)> = table.iter().collect();
            rows.sort_by(|a, b| a.0.cmp(b.0));
            let top = k + 1 == self.order();
            for (gram, entry) in rows {
                let words: Vec<&str> = gram.iter().map(|&id| vocab.token(id)).collect();
                write!(out, "{}\t{}", entry.log10_prob, words.join(" "))?;
                if !top && self.is_context(gram) {
                    write!(out, "\t{}", entry.log10_backoff)?;
                }
                writeln!(out)?;
            }
        }
        writeln!(out)?;
        writeln!(out, "\\end\\")?;
        out.flush()?;
        Ok(())
    }

    pub fn save_arpa(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_arpa(BufWriter::new(file))
    }

    fn is_context(&self, gram: &[u32]) -> bool {
        self.entry(gram).is_some_and(|e| e.log10_backoff != 0.0)
            || self.tables()[gram.len()].keys().any(|g| g.starts_with(gram))
    }

    pub fn load_arpa(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_arpa(BufReader::new(file))
    }

    pub fn read_arpa<R: BufRead>(reader: R) -> Result<Self> {
        let err = |line: usize, message: String| Error::Arpa { line, message };
        let mut declared: Vec<usize> = Vec::new();
        let mut raw: Vec<Vec<(f64, Vec<String>, f64)>> = Vec::new();
        #[derive(PartialEq)]
        enum State {
            Preamble,
            Data,
            Section(usize),
            End,
        }
        let mut state = State::Preamble;
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            let text = line.trim();
            if state == State::End {
                break;
            }
            if text.is_empty() {
                continue;
            }
            if text == "\\data\\" {
                state = State::Data;
                continue;
            }
            if text == "\\end\\" {
                state = State::End;
                continue;
            }
            if let Some(k) = text.strip_prefix('\\').and_then(|t| t.strip_suffix("-grams:")) {
                let k: usize = k
                    .parse()
                    .map_err(|_| err(lineno, format!("bad section header {text:?}")))?;
                if k == 0 || k > declared.len() {
                    return Err(err(lineno, format!("section {k} not declared in header")));
                }
                state = State::Section(k);
                continue;
            }
            match state {
                State::Preamble => {}
                State::Data => {
                    let spec = text
                        .strip_prefix("ngram ")
                        .ok_or_else(|| err(lineno, format!("expected `ngram k=count`, got {text:?}")))?;
                    let (k, n) = spec
                        .split_once('=')
                        .ok_or_else(|| err(lineno, format!("expected `ngram k=count`, got {text:?}")))?;
                    let k: usize = k.trim().parse().map_err(|_| err(lineno, "bad order".into()))?;
                    let n: usize = n.trim().parse().map_err(|_| err(lineno, "bad count".into()))?;
                    if k != declared.len() + 1 {
                        return Err(err(lineno, format!("orders must be declared in sequence, got {k}")));
                    }
                    declared.push(n);
                    raw.push(Vec::with_capacity(n));
                }
                State::Section(k) => {
                    let fields: Vec<&str> = text.split_whitespace().collect();
                    if fields.len() != k + 1 && fields.len() != k + 2 {
                        return Err(err(
                            lineno,
                            format!("expected {} or {} fields, got {}", k + 1, k + 2, fields.len()),
                        ));
                    }
                    let parse = |s: &str| -> Result<f64> {
                        s.parse::<f64>().map_err(|_| err(lineno, format!("bad number {s:?}")))
                    };
                    let prob = parse(fields[0])?;
                    let backoff = if fields.len() == k + 2 {
                        parse(fields[k + 1])?
                    } else {
                        0.0
                    };
                    let words = fields[1..=k].iter().map(|w| w.to_string()).collect();
                    raw[k - 1].push((prob, words, backoff));
                }
                State::End => unreachable!(),
            }
        }
        if declared.is_empty() {
            return Err(err(0, "missing \\data\\ header".into()));
        }
        if state != State::End {
            return Err(err(0, "missing \\end\\ marker".into()));
        }
        for (k, (rows, &n)) in raw.iter().zip(&declared).enumerate() {
            if rows.len() != n {
                return Err(err(
                    0,
                    format!("header declares {n} {}-grams, found {}", k + 1, rows.len()),
                ));
            }
        }

        let vocab = Vocab::from_tokens(raw[0].iter().map(|(_, w, _)| w[0].as_str()));
        let mut tables: Vec<HashMap<Ngram, Entry>> = Vec::with_capacity(raw.len());
        for (k, rows) in raw.iter().enumerate() {
            let mut table = HashMap::with_capacity(rows.len());
            for (prob, words, backoff) in rows {
                let mut ids = Vec::with_capacity(words.len());
                for w in words {
                    let id = vocab.get(w).ok_or_else(|| {
                        err(
                            0,
                            format!(
                                "{}-gram {:?} uses {w:?}, absent from the unigrams",
                                k + 1,
                                words.join(" ")
                            ),
                        )
                    })?;
                    ids.push(id);
                }
                table.insert(ids.into_boxed_slice(), Entry::new(*prob, *backoff));
            }
            tables.push(table);
        }
        Ok(NGramModel::from_parts(declared.len(), vocab, tables, Vec::new()))
    }
}
