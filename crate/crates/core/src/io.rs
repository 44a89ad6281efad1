// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV and JSON persistence.
//!
//! * signal definitions: header `L,U,level`, one block per row
//! * sequences: header `index,value`, index 1-based and contiguous
//! * sweeps: header `sigma,probability,stderr`

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FusedError, Result};
use crate::experiments::SweepRow;
use crate::flsa_solver::FusionPath;
use crate::signal_model::{Block, StepwiseSignal};

#[derive(Debug, Serialize, Deserialize)]
struct SequenceRow {
    index: usize,
    value: f64,
}

pub fn read_signal<R: Read>(reader: R) -> Result<StepwiseSignal> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    check_headers(rdr.headers()?, &["L", "U", "level"])?;
    let blocks = rdr
        .deserialize::<Block>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    StepwiseSignal::new(blocks)
}

pub fn write_signal<W: Write>(writer: W, signal: &StepwiseSignal) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for b in signal.blocks() {
        w.serialize(b)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sequence<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    check_headers(rdr.headers()?, &["index", "value"])?;
    let mut values = Vec::new();
    for row in rdr.deserialize::<SequenceRow>() {
        let row = row?;
        if row.index != values.len() + 1 {
            return Err(FusedError::input(format!(
                "expected index {}, found {}",
                values.len() + 1,
                row.index
            )));
        }
        if !row.value.is_finite() {
            return Err(FusedError::input(format!(
                "non-finite value at index {}",
                row.index
            )));
        }
        values.push(row.value);
    }
    if values.is_empty() {
        return Err(FusedError::input("sequence file has no rows"));
    }
    Ok(values)
}

pub fn write_sequence<W: Write>(writer: W, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (i, &value) in values.iter().enumerate() {
        w.serialize(SequenceRow {
            index: i + 1,
            value,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Several draws side by side: `index,value_1,…,value_k`.
pub fn write_sequences<W: Write>(writer: W, draws: &[Vec<f64>]) -> Result<()> {
    if draws.len() == 1 {
        return write_sequence(writer, &draws[0]);
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["index".to_string()];
    header.extend((1..=draws.len()).map(|k| format!("value_{k}")));
    w.write_record(&header)?;
    let n = draws.first().map_or(0, Vec::len);
    for i in 0..n {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(draws.iter().map(|d| d[i].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Breakpoints of the soft-threshold path, descending: `rank,lambda`.
pub fn write_breakpoints<W: Write>(writer: W, breakpoints: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rank", "lambda"])?;
    for (k, b) in breakpoints.iter().enumerate() {
        w.write_record([(k + 1).to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Merge events of a fusion path: `lambda,first,last,closed` with one row
/// per merged range; `closed` lists the 1-based positions whose boundary
/// disappears, separated by spaces.
pub fn write_merge_events<W: Write>(writer: W, path: &FusionPath) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["lambda", "first", "last", "closed"])?;
    for e in path.merge_events() {
        for &(first, last) in &e.merged {
            let closed: Vec<String> = e
                .closed
                .iter()
                .filter(|&&p| p > first && p <= last)
                .map(|p| p.to_string())
                .collect();
            w.write_record([
                e.lambda.to_string(),
                first.to_string(),
                last.to_string(),
                closed.join(" "),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut writer: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_signal_file(path: &Path) -> Result<StepwiseSignal> {
    read_signal(std::fs::File::open(path)?)
}

pub fn read_sequence_file(path: &Path) -> Result<Vec<f64>> {
    read_sequence(std::fs::File::open(path)?)
}

fn check_headers(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(FusedError::input(format!(
            "expected header {}, found {}",
            expected.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}
