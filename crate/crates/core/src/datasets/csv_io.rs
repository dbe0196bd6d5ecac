use std::collections::BTreeMap;
use std::path::Path;

use super::LabelledDataset;
use crate::autoencoder::DataKind;
use crate::error::{AresError, Result};
use crate::math::DenseMatrix;

/// Reads a header-first numeric CSV; `label_column` becomes the class ids and
/// every other column a feature, in file order.
///
/// Integer labels are used as-is. Any other label text is mapped to ids in
/// sorted order.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<LabelledDataset> {
    load_csv_with_anomaly_label(path, label_column, None)
}

/// As [`load_csv`], additionally marking the class whose raw label equals
/// `anomaly_label` as the anomaly class.
pub fn load_csv_with_anomaly_label(
    path: impl AsRef<Path>,
    label_column: &str,
    anomaly_label: Option<&str>,
) -> Result<LabelledDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| AresError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| AresError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| {
            AresError::Data(format!(
                "{}: no column named {label_column:?}",
                path.display()
            ))
        })?;
    let cols = headers.len() - 1;

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        // header is line 1
        let line = r + 2;
        let record = record.map_err(|e| AresError::Data(format!("{}: line {line}: {e}", path.display())))?;
        if record.len() != headers.len() {
            return Err(AresError::Data(format!(
                "{}: line {line} has {} fields, header has {}",
                path.display(),
                record.len(),
                headers.len()
            )));
        }
        for (c, field) in record.iter().enumerate() {
            if c == label_idx {
                raw_labels.push(field.trim().to_string());
                continue;
            }
            let v: f64 = field.trim().parse().map_err(|_| {
                AresError::Data(format!(
                    "{}: line {line}, column {} ({:?}): not a number: {field:?}",
                    path.display(),
                    c + 1,
                    &headers[c]
                ))
            })?;
            if !v.is_finite() {
                return Err(AresError::Data(format!(
                    "{}: line {line}, column {}: non-finite value",
                    path.display(),
                    c + 1
                )));
            }
            values.push(v);
        }
    }
    let rows = raw_labels.len();
    let features = DenseMatrix::new(rows, cols, values)?;

    let as_ints: Option<Vec<u32>> = raw_labels.iter().map(|l| l.parse::<u32>().ok()).collect();
    let (class_ids, lookup): (Vec<u32>, BTreeMap<String, u32>) = match as_ints {
        Some(ids) => {
            let lookup = raw_labels.iter().cloned().zip(ids.iter().copied()).collect();
            (ids, lookup)
        }
        None => {
            let mut names: Vec<&String> = raw_labels.iter().collect();
            names.sort();
            names.dedup();
            let lookup: BTreeMap<String, u32> = names
                .into_iter()
                .enumerate()
                .map(|(i, n)| (n.clone(), i as u32))
                .collect();
            (raw_labels.iter().map(|l| lookup[l]).collect(), lookup)
        }
    };
    let mut ds = LabelledDataset::new(features, class_ids, DataKind::Tabular)?;
    if let Some(name) = anomaly_label {
        let id = lookup.get(name).copied().ok_or_else(|| {
            AresError::Data(format!("anomaly label {name:?} does not occur in {}", path.display()))
        })?;
        ds.anomaly_class = Some(id);
    }
    Ok(ds)
}

/// Writes features and a trailing label column; floats use shortest
/// round-trip formatting.
pub fn write_csv(dataset: &LabelledDataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| AresError::Data(e.to_string()))?;
    let mut header: Vec<String> = (0..dataset.dim()).map(|j| format!("f{j}")).collect();
    header.push(label_column.to_string());
    w.write_record(&header).map_err(|e| AresError::Data(e.to_string()))?;
    for (row, label) in dataset.features.iter_rows().zip(&dataset.class_ids) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        rec.push(label.to_string());
        w.write_record(&rec).map_err(|e| AresError::Data(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
