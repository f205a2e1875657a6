//! Per-solver CSV files: one row per recorded epoch.

use std::io::{Read, Write};

use stochkit::RunRecord;

use crate::error::{HarnessError, Result};

/// Bumped whenever the column set or its meaning changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 8] = [
    "epoch",
    "iter",
    "time_s",
    "grad_calc_count",
    "cost",
    "optgap",
    "gnorm",
    "reg",
];

/// Writes the record with a header row. Floats use the shortest representation
/// that parses back to the same value, switching to exponent notation for very
/// small or large magnitudes; infinities are written `inf`.
pub fn write_record<W: Write>(record: &RunRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for e in 0..record.len() {
        w.write_record([
            e.to_string(),
            record.iter[e].to_string(),
            format!("{:?}", record.time[e]),
            record.grad_calc_count[e].to_string(),
            format!("{:?}", record.cost[e]),
            format!("{:?}", record.optgap[e]),
            format!("{:?}", record.gnorm[e]),
            format!("{:?}", record.reg[e]),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

pub fn record_to_string(record: &RunRecord) -> String {
    let mut buf = Vec::new();
    write_record(record, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// Parses a CSV written by [`write_record`], checking the header and the epoch column.
pub fn read_record<R: Read>(input: R) -> Result<RunRecord> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(schema_error(1, format!("unexpected header {header:?}")));
    }
    let mut rec = RunRecord::default();
    for (k, row) in r.records().enumerate() {
        let row = row?;
        let line = k + 2;
        if row.len() != CSV_COLUMNS.len() {
            return Err(schema_error(
                line,
                format!("expected {} fields, found {}", CSV_COLUMNS.len(), row.len()),
            ));
        }
        let int = |c: usize| {
            row[c]
                .parse::<u64>()
                .map_err(|_| schema_error(line, format!("bad {}", CSV_COLUMNS[c])))
        };
        let float = |c: usize| {
            row[c]
                .parse::<f64>()
                .map_err(|_| schema_error(line, format!("bad {}", CSV_COLUMNS[c])))
        };
        if int(0)? != k as u64 {
            return Err(schema_error(line, format!("epoch column should be {k}")));
        }
        rec.iter.push(int(1)?);
        rec.time.push(float(2)?);
        rec.grad_calc_count.push(int(3)?);
        rec.cost.push(float(4)?);
        rec.optgap.push(float(5)?);
        rec.gnorm.push(float(6)?);
        rec.reg.push(float(7)?);
    }
    Ok(rec)
}

fn schema_error(line: usize, reason: String) -> HarnessError {
    HarnessError::Parse {
        path: "<record csv>".into(),
        line,
        reason,
    }
}

/// The CSV text with the `time_s` column blanked, for reproducibility comparisons.
pub fn without_time(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| {
            let mut fields: Vec<&str> = l.split(',').collect();
            if fields.len() > 2 {
                fields[2] = "";
            }
            fields.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}
