//! CSV panel ingestion: a header row of series names, one row per time
//! point, numeric cells only. Parse errors carry the offending row and
//! column (1-based, counting the header as row 1).

use std::path::Path;

use nalgebra::DMatrix;

use crate::var_core::{Panel, PanelTransform};

#[derive(Debug, thiserror::Error)]
pub enum PanelReadError {
    #[error("io error reading panel: {0}")]
    Io(#[from] std::io::Error),
    #[error("panel file is empty")]
    Empty,
    #[error("row {row} has {got} cells, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("cell at row {row}, column {col} ({name}) is not numeric: {cell:?}")]
    NonNumeric {
        row: usize,
        col: usize,
        name: String,
        cell: String,
    },
    #[error("panel needs at least 2 data rows, got {0}")]
    TooShort(usize),
    #[error("cannot standardize constant series {0:?}")]
    ConstantSeries(String),
}

pub fn read_panel(
    path: impl AsRef<Path>,
    demean: bool,
    standardize: bool,
) -> Result<Panel, PanelReadError> {
    let text = std::fs::read_to_string(path)?;
    read_panel_str(&text, demean, standardize)
}

pub fn read_panel_str(
    text: &str,
    demean: bool,
    standardize: bool,
) -> Result<Panel, PanelReadError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(PanelReadError::Empty)?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let n = names.len();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_idx, line) in lines {
        let row_no = line_idx + 1; // 1-based, header included
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n {
            return Err(PanelReadError::Ragged {
                row: row_no,
                expected: n,
                got: cells.len(),
            });
        }
        let mut row = Vec::with_capacity(n);
        for (col_idx, cell) in cells.iter().enumerate() {
            let trimmed = cell.trim();
            let value: f64 = trimmed.parse().map_err(|_| PanelReadError::NonNumeric {
                row: row_no,
                col: col_idx + 1,
                name: names[col_idx].clone(),
                cell: trimmed.to_string(),
            })?;
            if !value.is_finite() {
                return Err(PanelReadError::NonNumeric {
                    row: row_no,
                    col: col_idx + 1,
                    name: names[col_idx].clone(),
                    cell: trimmed.to_string(),
                });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(PanelReadError::TooShort(rows.len()));
    }

    let t_len = rows.len();
    let mut values = DMatrix::zeros(t_len, n);
    for (t, row) in rows.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            values[(t, i)] = *v;
        }
    }

    let mut means = vec![0.0; n];
    let mut scales = vec![1.0; n];
    if demean || standardize {
        for i in 0..n {
            let col: Vec<f64> = (0..t_len).map(|t| values[(t, i)]).collect();
            let mean = col.iter().sum::<f64>() / t_len as f64;
            means[i] = mean;
            if standardize {
                let var =
                    col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t_len - 1) as f64;
                if var <= 0.0 {
                    return Err(PanelReadError::ConstantSeries(names[i].clone()));
                }
                scales[i] = var.sqrt();
            }
            for t in 0..t_len {
                values[(t, i)] = (values[(t, i)] - mean) / scales[i];
            }
        }
    }

    let mut panel = Panel::new(names, values)
        .map_err(|_| PanelReadError::TooShort(t_len))?;
    panel.transform = Some(PanelTransform {
        demeaned: demean || standardize,
        standardized: standardize,
        means,
        scales,
    });
    Ok(panel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_are_a_demeaning_fixed_point() {
        let text = "a,b\n0,0\n0,0\n0,0\n";
        let panel = read_panel_str(text, true, false).unwrap();
        assert!(panel.values.iter().all(|v| *v == 0.0));
        assert_eq!(panel.names, vec!["a", "b"]);
    }

    #[test]
    fn demeaning_subtracts_column_means() {
        let text = "x\n1\n2\n3\n";
        let panel = read_panel_str(text, true, false).unwrap();
        let col: Vec<f64> = (0..3).map(|t| panel.values[(t, 0)]).collect();
        assert_eq!(col, vec![-1.0, 0.0, 1.0]);
        let transform = panel.transform.unwrap();
        assert_eq!(transform.means, vec![2.0]);
    }

    #[test]
    fn empty_cell_names_location() {
        let text = "a,b\n1.0,2.0\n1.5,\n";
        let err = read_panel_str(text, false, false).unwrap_err();
        match err {
            PanelReadError::NonNumeric { row, col, .. } => {
                assert_eq!((row, col), (3, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ragged_row_is_located() {
        let text = "a,b\n1,2\n3\n";
        match read_panel_str(text, false, false).unwrap_err() {
            PanelReadError::Ragged { row, expected, got } => {
                assert_eq!((row, expected, got), (3, 2, 1));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn standardize_divides_by_sample_sd() {
        let text = "x\n1\n2\n3\n";
        let panel = read_panel_str(text, false, true).unwrap();
        let col: Vec<f64> = (0..3).map(|t| panel.values[(t, 0)]).collect();
        assert!((col[2] - 1.0).abs() < 1e-12);
        assert!(col[1].abs() < 1e-12);
    }
}
