//! Trajectory CSV: `t,g1,g2,g3,R,C2,F_CS,V,alpha,dF_step`, header required,
//! 17 significant digits per value.

use std::io::{self, Write};

use thiserror::Error;

use crate::flows::TrajectoryRecord;

pub const HEADER: [&str; 10] = ["t", "g1", "g2", "g3", "R", "C2", "F_CS", "V", "alpha", "dF_step"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CsvError {
    #[error("missing header row")]
    MissingHeader,
    #[error("header column {index}: expected '{expected}', found '{found}'")]
    BadHeader { index: usize, expected: &'static str, found: String },
    #[error("header has {0} columns, expected 10")]
    HeaderWidth(usize),
    #[error("line {line}: expected 10 fields, found {found}")]
    RowWidth { line: usize, found: usize },
    #[error("line {line}: column '{column}': '{value}' is not a finite number")]
    BadValue { line: usize, column: &'static str, value: String },
    #[error("line {line}: volume must be positive")]
    NonPositiveVolume { line: usize },
    #[error("line {line}: t must increase strictly")]
    TimeNotIncreasing { line: usize },
    #[error("no data rows")]
    Empty,
}

/// Formats with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn row(r: &TrajectoryRecord) -> [f64; 10] {
    [r.t, r.g[0], r.g[1], r.g[2], r.scalar_curvature, r.cotton_norm2, r.f_cs, r.volume, r.alpha, r.df_step]
}

/// Writes every `stride`-th record plus the final one. `dF_step` of a written
/// row is the change in `F` since the previously written row.
pub fn write_trajectory<W: Write>(out: &mut W, records: &[TrajectoryRecord], stride: usize) -> io::Result<()> {
    let stride = stride.max(1);
    writeln!(out, "{}", HEADER.join(","))?;
    let last = records.len().saturating_sub(1);
    let mut prev_f: Option<f64> = None;
    for (i, r) in records.iter().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        let mut r = *r;
        r.df_step = prev_f.map_or(0.0, |f| r.f_cs - f);
        prev_f = Some(r.f_cs);
        let fields: Vec<String> = row(&r).iter().map(|v| fmt17(*v)).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn trajectory_to_string(records: &[TrajectoryRecord], stride: usize) -> String {
    let mut buf = Vec::new();
    write_trajectory(&mut buf, records, stride).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Parses and validates a trajectory file.
pub fn read_trajectory(text: &str) -> Result<Vec<TrajectoryRecord>, CsvError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(CsvError::MissingHeader)?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    for (index, (found, expected)) in cols.iter().zip(HEADER).enumerate() {
        if *found != expected {
            return Err(CsvError::BadHeader { index, expected, found: found.to_string() });
        }
    }
    if cols.len() != HEADER.len() {
        return Err(CsvError::HeaderWidth(cols.len()));
    }

    let mut out: Vec<TrajectoryRecord> = Vec::new();
    for (idx, l) in lines {
        let line = idx + 1;
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() != HEADER.len() {
            return Err(CsvError::RowWidth { line, found: fields.len() });
        }
        let mut v = [0.0; 10];
        for (k, f) in fields.iter().enumerate() {
            v[k] = f
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CsvError::BadValue { line, column: HEADER[k], value: f.to_string() })?;
        }
        let rec = TrajectoryRecord {
            t: v[0],
            g: [v[1], v[2], v[3]],
            scalar_curvature: v[4],
            cotton_norm2: v[5],
            f_cs: v[6],
            volume: v[7],
            alpha: v[8],
            df_step: v[9],
        };
        if rec.volume <= 0.0 {
            return Err(CsvError::NonPositiveVolume { line });
        }
        if out.last().is_some_and(|p| rec.t <= p.t) {
            return Err(CsvError::TimeNotIncreasing { line });
        }
        out.push(rec);
    }
    if out.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(out)
}
