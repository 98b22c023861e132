//! CSV persistence of assignments, firing averages and response matrices.

use std::fmt::Write as _;
use std::path::Path;

use super::{AssignmentVector, DecodeError, FiringAverage, ResponseMatrix, Result};

/// `neuron_index,assigned_class,firing_average,response_total,stimuli`. The
/// mean is for reading; loading uses the exact total and stimulus count.
pub fn write_assignment_csv(z: &AssignmentVector, f: &FiringAverage, path: impl AsRef<Path>) -> Result<()> {
    if z.num_neurons() != f.len() {
        return Err(DecodeError::LengthMismatch {
            expected: z.num_neurons(),
            found: f.len(),
        });
    }
    let mut out = String::from("neuron_index,assigned_class,firing_average,response_total,stimuli\n");
    for (n, ((c, mean), total)) in z.z.iter().zip(f.means()).zip(&f.totals).enumerate() {
        writeln!(out, "{n},{c},{mean},{total},{}", f.stimuli).expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_assignment_csv(path: impl AsRef<Path>, num_classes: usize) -> Result<(AssignmentVector, FiringAverage)> {
    let malformed = |reason: String| DecodeError::Malformed {
        kind: "assignment",
        reason,
    };
    let mut reader = csv::Reader::from_path(path)?;
    let mut z = Vec::new();
    let mut totals = Vec::new();
    let mut stimuli = None;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = |k: usize| {
            record
                .get(k)
                .and_then(|s| s.trim().parse::<u64>().ok())
                .ok_or_else(|| malformed(format!("row {}, column {}", i + 2, k + 1)))
        };
        if field(0)? != i as u64 {
            return Err(malformed(format!("neuron index out of order at row {}", i + 2)));
        }
        z.push(field(1)? as usize);
        totals.push(field(3)?);
        let s = field(4)?;
        if *stimuli.get_or_insert(s) != s || s == 0 {
            return Err(malformed(format!(
                "row {}: stimulus count must be one positive value",
                i + 2
            )));
        }
    }
    let f = FiringAverage {
        totals,
        stimuli: stimuli.unwrap_or(0),
    };
    Ok((AssignmentVector::from_z(z, num_classes)?, f))
}

/// One column per neuron (`n0`, `n1`, ...) and a trailing `label` column.
pub fn write_response_csv(r: &ResponseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for n in 0..r.num_neurons() {
        write!(out, "n{n},").expect("string write");
    }
    out.push_str("label\n");
    for (row, label) in r.rows().zip(r.labels()) {
        for c in row {
            write!(out, "{c},").expect("string write");
        }
        writeln!(out, "{label}").expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_response_csv(path: impl AsRef<Path>, num_classes: usize) -> Result<ResponseMatrix> {
    let mut reader = csv::Reader::from_path(path)?;
    let width = reader.headers()?.len();
    if width < 1 {
        return Err(DecodeError::Malformed {
            kind: "response",
            reason: "missing label column".into(),
        });
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: Option<Vec<u64>> = record.iter().map(|s| s.trim().parse().ok()).collect();
        let mut values = parsed.ok_or_else(|| DecodeError::Malformed {
            kind: "response",
            reason: format!("non-integer entry on line {}", i + 2),
        })?;
        let label = values.pop().unwrap_or(0) as usize;
        rows.push(values.into_iter().map(|v| v as u32).collect());
        labels.push(label);
    }
    ResponseMatrix::new(width - 1, num_classes, rows, labels)
}
