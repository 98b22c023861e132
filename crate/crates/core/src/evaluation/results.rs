//! Result rows and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use super::Result;

/// Header of every experiment results file.
pub const RESULT_COLUMNS: [&str; 10] = [
    "experiment",
    "decoder",
    "alpha",
    "fold",
    "seed",
    "f1",
    "accuracy",
    "assignment_alpha",
    "abstentions",
    "mode_collapse",
];

/// Fold index used for rows pooled over every fold.
pub const POOLED_FOLD: i64 = -1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub experiment: String,
    pub decoder: String,
    /// Class ratio of the training set actually used (mean over folds when pooled).
    pub alpha: f64,
    pub fold: i64,
    pub seed: u64,
    pub f1: f64,
    pub accuracy: f64,
    pub assignment_alpha: Option<f64>,
    pub abstentions: usize,
    pub mode_collapse: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentResult {
    pub fn extend(&mut self, other: ExperimentResult) {
        self.rows.extend(other.rows);
    }

    /// Rows of one experiment id and decoder.
    pub fn select<'a>(&'a self, experiment: &'a str, decoder: &'a str) -> impl Iterator<Item = &'a ExperimentRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.experiment == experiment && r.decoder == decoder)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = RESULT_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let assignment = r.assignment_alpha.map(|a| a.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.experiment,
                r.decoder,
                r.alpha,
                r.fold,
                r.seed,
                r.f1,
                r.accuracy,
                assignment,
                r.abstentions,
                r.mode_collapse
            )
            .expect("string write");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Mean accuracy of one bias-experiment grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasRow {
    pub decoder: String,
    pub subset_size: usize,
    pub fold: usize,
    pub seed: u64,
    pub repetitions: usize,
    pub accuracy: f64,
    /// Lowest single-repetition accuracy.
    pub min_accuracy: f64,
}

pub const BIAS_COLUMNS: [&str; 8] = [
    "experiment",
    "decoder",
    "subset_size",
    "fold",
    "seed",
    "repetitions",
    "accuracy",
    "min_accuracy",
];

pub fn bias_csv_string(rows: &[BiasRow]) -> String {
    let mut out = BIAS_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "bias,{},{},{},{},{},{},{}",
            r.decoder, r.subset_size, r.fold, r.seed, r.repetitions, r.accuracy, r.min_accuracy
        )
        .expect("string write");
    }
    out
}
