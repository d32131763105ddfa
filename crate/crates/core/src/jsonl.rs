//! JSON Lines reading and writing for any serde record type.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn write<T: Serialize, W: Write>(records: impl IntoIterator<Item = T>, mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, &r).map_err(|e| Error::Json {
            line: 0,
            message: e.to_string(),
        })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save<T: Serialize>(records: impl IntoIterator<Item = T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write(records, BufWriter::new(file))
}

/// Blank lines are skipped; errors carry the 1-based line number.
pub fn read<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Json {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn load<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read(BufReader::new(file)).map_err(|e| match e {
        Error::Json { line, message } => Error::Json {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}
