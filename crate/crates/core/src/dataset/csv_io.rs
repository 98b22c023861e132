//! CSV ingestion and export.
//!
//! Layout: header row, first column `sample_id`, last column `label`
//! (integer class index), numeric features in between. Exported datasets may
//! carry one extra trailing `synthetic` column (0/1) after `label`.
//!
//! Error positions are 1-based: `row` is the line number in the file (the
//! header is line 1) and `col` is the column number.

use std::path::Path;

use super::{DatasetError, OmicsDataset, Result};

const ID_COLUMN: &str = "sample_id";
const LABEL_COLUMN: &str = "label";
const SYNTHETIC_COLUMN: &str = "synthetic";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub num_classes: usize,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self { num_classes: 2 }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<OmicsDataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)?;

    let header = reader.headers()?.clone();
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    let has_synthetic = cols.last() == Some(&SYNTHETIC_COLUMN);
    let label_pos = if has_synthetic {
        cols.len().saturating_sub(2)
    } else {
        cols.len().saturating_sub(1)
    };
    if cols.len() < 2 || cols[0] != ID_COLUMN || cols.get(label_pos) != Some(&LABEL_COLUMN) || label_pos == 0 {
        return Err(DatasetError::MissingHeader { path: display });
    }
    let feature_names: Vec<String> = cols[1..label_pos].iter().map(|s| s.to_string()).collect();

    let mut ids = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut synthetic = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let mut row = Vec::with_capacity(feature_names.len());
        let mut finite = true;
        for (j, cell) in record.iter().enumerate().take(label_pos).skip(1) {
            let value: f64 = cell.trim().parse().map_err(|_| DatasetError::NonNumericFeature {
                row: line,
                col: j + 1,
                value: cell.to_string(),
            })?;
            finite &= value.is_finite();
            row.push(value);
        }
        let raw_label = record.get(label_pos).unwrap_or("").trim();
        let label = raw_label
            .parse::<usize>()
            .ok()
            .filter(|&l| l < schema.num_classes)
            .ok_or_else(|| DatasetError::UnknownLabelValue {
                row: line,
                value: raw_label.to_string(),
                num_classes: schema.num_classes,
            })?;
        let is_synthetic = if has_synthetic {
            match record.get(label_pos + 1).map(str::trim) {
                Some("1") => true,
                Some("0") | Some("") | None => false,
                Some(other) => {
                    return Err(DatasetError::InvalidArgument(format!(
                        "synthetic flag {other:?} at row {line} is not 0/1"
                    )))
                }
            }
        } else {
            false
        };
        if !finite {
            log::warn!("{display}: dropping row {line} with non-finite feature values");
            continue;
        }
        ids.push(record.get(0).unwrap_or("").to_string());
        features.extend(row);
        labels.push(label);
        synthetic.push(is_synthetic);
    }
    if labels.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    OmicsDataset::from_parts(ids, features, feature_names, labels, schema.num_classes, synthetic)
}

/// Write `d` in the ingestion schema. With `include_synthetic` a trailing
/// `synthetic` column is added.
pub fn write_csv(d: &OmicsDataset, path: impl AsRef<Path>, include_synthetic: bool) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec![ID_COLUMN.to_string()];
    header.extend(d.feature_names().iter().cloned());
    header.push(LABEL_COLUMN.to_string());
    if include_synthetic {
        header.push(SYNTHETIC_COLUMN.to_string());
    }
    writer.write_record(&header)?;
    for i in 0..d.len() {
        let mut rec = vec![d.sample_ids()[i].clone()];
        rec.extend(d.row(i).iter().map(|v| format!("{v}")));
        rec.push(d.labels()[i].to_string());
        if include_synthetic {
            rec.push(if d.synthetic_flags()[i] { "1" } else { "0" }.to_string());
        }
        writer.write_record(&rec)?;
    }
    writer.flush()?;
    Ok(())
}
