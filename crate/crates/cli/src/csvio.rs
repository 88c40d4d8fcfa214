//! Long-format panel CSV: `unit_id,time,y,x1..xD`. Reading canonicalizes to
//! units in lexicographic order and consecutive times, whatever the row
//! order of the file; writing emits that canonical order with shortest
//! round-trip float formatting, so write-then-read is the identity.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::{Array2, Array3};
use panelgarch::PanelData;

use crate::error::{CliError, Result};

/// Missing cells listed in a ragged-panel error before truncation.
const MAX_REPORTED_CELLS: usize = 20;

pub fn write_panel(panel: &PanelData, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    let d = panel.n_regressors();
    let mut header = vec!["unit_id".to_string(), "time".to_string(), "y".to_string()];
    for j in 0..d {
        header.push(format!("x{}", j + 1));
    }
    writer
        .write_record(&header)
        .and_then(|()| {
            for i in 0..panel.n_units() {
                for (s, &time) in panel.times.iter().enumerate() {
                    let mut record = vec![
                        panel.unit_ids[i].clone(),
                        time.to_string(),
                        format!("{:?}", panel.y[[i, s]]),
                    ];
                    for j in 0..d {
                        record.push(format!("{:?}", panel.x[[i, s, j]]));
                    }
                    writer.write_record(&record)?;
                }
            }
            writer.flush().map_err(csv::Error::from)
        })
        .map_err(|e| CliError::Validation(format!("writing {}: {e}", path.display())))
}

pub fn read_panel(path: &Path) -> Result<PanelData> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        .clone();
    let d = check_header(&headers, path)?;

    // unit -> time -> (y, x); BTreeMaps give the canonical ordering for free.
    let mut cells: BTreeMap<String, BTreeMap<i64, (f64, Vec<f64>)>> = BTreeMap::new();
    let mut all_times: BTreeSet<i64> = BTreeSet::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record =
            record.map_err(|e| CliError::Validation(format!("{} line {line}: {e}", path.display())))?;
        if record.len() != d + 3 {
            return Err(CliError::Validation(format!(
                "{} line {line}: expected {} fields, got {}",
                path.display(),
                d + 3,
                record.len()
            )));
        }
        let unit = record[0].to_string();
        let time: i64 = parse_cell(&record[1], "time", line, path)?;
        let y: f64 = parse_cell(&record[2], "y", line, path)?;
        let mut x = Vec::with_capacity(d);
        for j in 0..d {
            x.push(parse_cell(&record[3 + j], &format!("x{}", j + 1), line, path)?);
        }
        all_times.insert(time);
        if cells.entry(unit.clone()).or_default().insert(time, (y, x)).is_some() {
            return Err(CliError::Validation(format!(
                "{} line {line}: duplicate cell {unit}@{time}",
                path.display()
            )));
        }
    }
    if cells.is_empty() {
        return Err(CliError::Validation(format!(
            "{} holds no data rows",
            path.display()
        )));
    }

    let times: Vec<i64> = all_times.iter().copied().collect();
    let contiguous = times.windows(2).all(|w| w[1] == w[0] + 1);
    if !contiguous {
        let gaps: Vec<String> = times
            .windows(2)
            .filter(|w| w[1] != w[0] + 1)
            .map(|w| format!("({}, {})", w[0], w[1]))
            .take(MAX_REPORTED_CELLS)
            .collect();
        return Err(CliError::Validation(format!(
            "panel times are not contiguous; no rows between {}",
            gaps.join(", ")
        )));
    }

    let mut missing: Vec<String> = Vec::new();
    for (unit, rows) in &cells {
        for &time in &times {
            if !rows.contains_key(&time) && missing.len() < MAX_REPORTED_CELLS + 1 {
                missing.push(format!("{unit}@{time}"));
            }
        }
    }
    if !missing.is_empty() {
        let shown = missing.len().min(MAX_REPORTED_CELLS);
        let suffix = if missing.len() > shown { ", ..." } else { "" };
        return Err(CliError::Validation(format!(
            "ragged panel, missing cells: {}{suffix}",
            missing[..shown].join(", ")
        )));
    }

    let n = cells.len();
    let t_len = times.len();
    let unit_ids: Vec<String> = cells.keys().cloned().collect();
    let mut y = Array2::zeros((n, t_len));
    let mut x = Array3::zeros((n, t_len, d));
    for (i, rows) in cells.values().enumerate() {
        for (s, &time) in times.iter().enumerate() {
            let (yv, xv) = &rows[&time];
            y[[i, s]] = *yv;
            for j in 0..d {
                x[[i, s, j]] = xv[j];
            }
        }
    }
    PanelData::new(unit_ids, times, y, x).map_err(CliError::from)
}

fn check_header(headers: &csv::StringRecord, path: &Path) -> Result<usize> {
    let fixed = ["unit_id", "time", "y"];
    for (j, want) in fixed.iter().enumerate() {
        if headers.get(j) != Some(want) {
            return Err(CliError::Validation(format!(
                "{}: header must start with unit_id,time,y, got {:?}",
                path.display(),
                headers.iter().take(3).collect::<Vec<_>>()
            )));
        }
    }
    let d = headers.len() - 3;
    for j in 0..d {
        let want = format!("x{}", j + 1);
        if headers.get(3 + j) != Some(want.as_str()) {
            return Err(CliError::Validation(format!(
                "{}: regressor columns must be x1..x{d} in order, got {:?}",
                path.display(),
                headers.get(3 + j)
            )));
        }
    }
    Ok(d)
}

fn parse_cell<T: std::str::FromStr>(
    text: &str,
    column: &str,
    line: usize,
    path: &Path,
) -> Result<T> {
    text.trim().parse().map_err(|_| {
        CliError::Validation(format!(
            "{} line {line}: column {column}: {text:?} is not numeric",
            path.display()
        ))
    })
}
