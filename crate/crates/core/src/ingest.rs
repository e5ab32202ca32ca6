//! Dataset readers and writers, and per-dataset statistics.
//!
//! Two input shapes are supported:
//!
//! * the canonical interchange format, a comma-separated file with header
//!   `test_id,cycle,verdict` and verdict codes 0..=3;
//! * the semicolon-separated industrial format (Paint Control, IOF/ROL),
//!   which has a named header and pass/fail verdicts only. Column names and
//!   the delimiter are configurable through [`IndustrialFormat`].
//!
//! Rows are taken in file order, which defines the execution order used to
//! keep only the last verdict of a test that ran several times in a cycle.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    classify_verdict, CycleId, Dataset, Outcome, RawVerdict, TestId, VerdictRecord,
};

pub const CANONICAL_HEADER: [&str; 3] = ["test_id", "cycle", "verdict"];

/// Column mapping for the industrial CSV adapter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndustrialFormat {
    pub delimiter: u8,
    pub test_column: String,
    pub cycle_column: String,
    pub verdict_column: String,
}

impl Default for IndustrialFormat {
    fn default() -> Self {
        Self {
            delimiter: b';',
            test_column: "Name".into(),
            cycle_column: "Cycle".into(),
            verdict_column: "Verdict".into(),
        }
    }
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn format_err(line: u64, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

fn parse_int(field: &str, what: &str, line: u64) -> Result<i64> {
    field
        .trim()
        .parse::<i64>()
        .map_err(|_| format_err(line, format!("{what} {field:?} is not an integer")))
}

fn parse_cycle(field: &str, line: u64) -> Result<CycleId> {
    let value = parse_int(field, "cycle", line)?;
    u64::try_from(value)
        .map(CycleId)
        .map_err(|_| format_err(line, format!("cycle {value} is negative")))
}

fn parse_test(field: &str, line: u64) -> Result<TestId> {
    TestId::new(field.trim()).map_err(|_| format_err(line, "empty test identifier"))
}

/// Reads canonical rows without normalizing them. The header line is
/// optional; when present it must be exactly `test_id,cycle,verdict`.
pub fn read_canonical<R: Read>(input: R) -> Result<Vec<VerdictRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);

    let mut records = Vec::new();
    for (index, row) in reader.records().enumerate() {
        let row = row?;
        let line = line_of(&row);
        if index == 0 && row.get(0).map(str::trim) == Some(CANONICAL_HEADER[0]) {
            let header: Vec<&str> = row.iter().map(str::trim).collect();
            if header != CANONICAL_HEADER {
                return Err(format_err(
                    line,
                    format!("expected header {}", CANONICAL_HEADER.join(",")),
                ));
            }
            continue;
        }
        if row.len() == 1 && row[0].trim().is_empty() {
            continue;
        }
        if row.len() != 3 {
            return Err(format_err(
                line,
                format!(
                    "expected 3 columns (test_id,cycle,verdict), found {}",
                    row.len()
                ),
            ));
        }
        let test = parse_test(&row[0], line)?;
        let cycle = parse_cycle(&row[1], line)?;
        let code = parse_int(&row[2], "verdict", line)?;
        let raw = RawVerdict::new(code, || format!("line {line}, test {test}"))?;
        records.push(VerdictRecord {
            test,
            cycle,
            raw,
            sequence: records.len() as u64,
        });
    }
    Ok(records)
}

pub fn parse_canonical<R: Read>(input: R) -> Result<Dataset> {
    Dataset::from_records(read_canonical(input)?)
}

/// Reads industrial rows without normalizing them.
pub fn read_industrial<R: Read>(input: R, format: &IndustrialFormat) -> Result<Vec<VerdictRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(input);

    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| format_err(1, format!("missing column {name:?}")))
    };
    let test_col = column(&format.test_column)?;
    let cycle_col = column(&format.cycle_column)?;
    let verdict_col = column(&format.verdict_column)?;
    let width = test_col.max(cycle_col).max(verdict_col);

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = line_of(&row);
        if row.len() == 1 && row[0].trim().is_empty() {
            continue;
        }
        if row.len() <= width {
            return Err(format_err(
                line,
                format!(
                    "expected at least {} columns, found {}",
                    width + 1,
                    row.len()
                ),
            ));
        }
        let test = parse_test(&row[test_col], line)?;
        let cycle = parse_cycle(&row[cycle_col], line)?;
        let code = parse_int(&row[verdict_col], "verdict", line)?;
        if !(0..=1).contains(&code) {
            return Err(format_err(
                line,
                format!("verdict {code} for test {test} is not 0 or 1"),
            ));
        }
        let raw = RawVerdict::new(code, || format!("line {line}, test {test}"))?;
        records.push(VerdictRecord {
            test,
            cycle,
            raw,
            sequence: records.len() as u64,
        });
    }
    Ok(records)
}

pub fn parse_industrial<R: Read>(input: R, format: &IndustrialFormat) -> Result<Dataset> {
    Dataset::from_records(read_industrial(input, format)?)
}

/// Writes a normalized dataset in canonical form. Fault is written as 1,
/// so invalid (2) verdicts come back as failures.
pub fn write_canonical<W: Write>(dataset: &Dataset, output: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(output);
    writer.write_record(CANONICAL_HEADER)?;
    for log in dataset.cycles() {
        let cycle = log.cycle.0.to_string();
        for (test, outcome) in log.iter() {
            writer.write_record([
                test.as_str(),
                cycle.as_str(),
                &outcome.canonical_code().to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub distinct_tests: usize,
    pub cycles: usize,
    pub verdict_count: usize,
    /// Fault / (Fault + Pass); Excluded outcomes are not counted.
    pub failed_fraction: f64,
}

fn fraction(faults: usize, passes: usize) -> f64 {
    if faults + passes == 0 {
        0.0
    } else {
        faults as f64 / (faults + passes) as f64
    }
}

/// Statistics of a normalized dataset.
pub fn dataset_stats(dataset: &Dataset) -> Result<DatasetStats> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset has no cycles".into()));
    }
    let (mut faults, mut passes, mut total) = (0, 0, 0);
    for log in dataset.cycles() {
        total += log.len();
        faults += log.count(Outcome::Fault);
        passes += log.count(Outcome::Pass);
    }
    Ok(DatasetStats {
        distinct_tests: dataset.universe().len(),
        cycles: dataset.cycles().len(),
        verdict_count: total,
        failed_fraction: fraction(faults, passes),
    })
}

/// Statistics of the records before duplicate executions are collapsed.
pub fn raw_stats(records: &[VerdictRecord]) -> Result<DatasetStats> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no verdict records".into()));
    }
    let tests: HashSet<&TestId> = records.iter().map(|r| &r.test).collect();
    let cycles: HashSet<CycleId> = records.iter().map(|r| r.cycle).collect();
    let (mut faults, mut passes) = (0, 0);
    for r in records {
        match classify_verdict(r.raw) {
            Outcome::Fault => faults += 1,
            Outcome::Pass => passes += 1,
            Outcome::Excluded => {}
        }
    }
    Ok(DatasetStats {
        distinct_tests: tests.len(),
        cycles: cycles.len(),
        verdict_count: records.len(),
        failed_fraction: fraction(faults, passes),
    })
}
