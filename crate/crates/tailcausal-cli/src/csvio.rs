//! CSV ingestion: header-row tables of finite reals with an explicit
//! missing-value policy. Lines starting with '#' are comments, so the
//! tool's own output files load back unchanged.

use std::path::Path;

use tailcausal::series::{Series, SeriesError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Malformed {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing header row")]
    NoHeader { path: String },
    #[error("{path}: duplicate column name {name:?}")]
    DuplicateColumn { path: String, name: String },
    #[error("{path}: no column named {name:?} (columns: {available})")]
    UnknownColumn {
        path: String,
        name: String,
        available: String,
    },
    #[error("{path}: row {row} has {got} fields, expected {expected}")]
    Ragged {
        path: String,
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("{path}: row {row}, column {column:?}: cannot parse {value:?} as a number")]
    BadCell {
        path: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path}: row {row}, column {column:?}: missing value")]
    Missing { path: String, row: usize, column: String },
    #[error(
        "{path}: row {row}, column {column:?}: missing value at the series edge; \
         linear interpolation needs observed values on both sides"
    )]
    EdgeMissing { path: String, row: usize, column: String },
    #[error("{path}: column {column:?}: {source}")]
    Column {
        path: String,
        column: String,
        #[source]
        source: SeriesError,
    },
}

/// What to do with cells that are empty, a textual marker ("na", "nan",
/// "null", any case), or parse to a non-finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum MissingPolicy {
    /// Refuse the file, naming the first offending row and column.
    #[default]
    #[value(name = "error")]
    Error,
    /// Drop every row with a missing cell in any selected column.
    #[value(name = "drop-row")]
    DropRow,
    /// Fill interior gaps by index-linear interpolation between the nearest
    /// observed neighbours; gaps touching either end are refused.
    #[value(name = "interpolate-linear")]
    InterpolateLinear,
}

/// A rectangular table read from disk: equally long named columns.
#[derive(Debug, Clone)]
pub struct Dataset {
    path: String,
    columns: Vec<Series>,
}

impl Dataset {
    pub fn columns(&self) -> &[Series] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Series, CsvError> {
        self.columns
            .iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| CsvError::UnknownColumn {
                path: self.path.clone(),
                name: name.to_string(),
                available: join_names(&self.columns),
            })
    }
}

fn join_names(columns: &[Series]) -> String {
    columns.iter().map(Series::name).collect::<Vec<_>>().join(", ")
}

/// `None` for a missing cell, `Err` for text that is not a number at all.
/// "inf" and friends parse, but a non-finite value is unusable and counts
/// as missing rather than malformed.
fn parse_cell(raw: &str) -> Result<Option<f64>, ()> {
    let t = raw.trim();
    if t.is_empty() {
        return Ok(None);
    }
    let lower = t.to_ascii_lowercase();
    if lower == "na" || lower == "nan" || lower == "null" {
        return Ok(None);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) => Ok(None),
        Err(_) => Err(()),
    }
}

/// Read `path`, keep the columns in `select` (all of them when `None`, in
/// file order), and resolve missing cells per `policy`. Row numbers in
/// errors are 1-based data rows; the header and comment lines don't count.
pub fn ingest_csv(
    path: &Path,
    select: Option<&[String]>,
    policy: MissingPolicy,
) -> Result<Dataset, CsvError> {
    let pstr = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| CsvError::Io {
        path: pstr.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| CsvError::Malformed {
            path: pstr.clone(),
            source,
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(CsvError::NoHeader { path: pstr });
    }
    for (i, name) in headers.iter().enumerate() {
        if headers[..i].contains(name) {
            return Err(CsvError::DuplicateColumn {
                path: pstr,
                name: name.clone(),
            });
        }
    }

    let selected: Vec<usize> = match select {
        None => (0..headers.len()).collect(),
        Some(names) => names
            .iter()
            .map(|name| {
                headers.iter().position(|h| h == name).ok_or_else(|| {
                    CsvError::UnknownColumn {
                        path: pstr.clone(),
                        name: name.clone(),
                        available: headers.join(", "),
                    }
                })
            })
            .collect::<Result<_, _>>()?,
    };

    // One Vec per selected column; None marks a missing cell.
    let mut cells: Vec<Vec<Option<f64>>> = vec![Vec::new(); selected.len()];
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|source| CsvError::Malformed {
            path: pstr.clone(),
            source,
        })?;
        if record.len() != headers.len() {
            return Err(CsvError::Ragged {
                path: pstr,
                row,
                got: record.len(),
                expected: headers.len(),
            });
        }
        for (slot, &col) in selected.iter().enumerate() {
            match parse_cell(&record[col]) {
                Ok(v) => cells[slot].push(v),
                Err(()) => {
                    return Err(CsvError::BadCell {
                        path: pstr,
                        row,
                        column: headers[col].clone(),
                        value: record[col].to_string(),
                    })
                }
            }
        }
    }

    apply_policy(&pstr, &headers, &selected, &mut cells, policy)?;

    let columns = selected
        .iter()
        .zip(cells)
        .map(|(&col, vals)| {
            let values: Vec<f64> = vals.into_iter().map(|v| v.expect("gaps resolved")).collect();
            Series::new(headers[col].clone(), values).map_err(|source| CsvError::Column {
                path: pstr.clone(),
                column: headers[col].clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset { path: pstr, columns })
}

fn apply_policy(
    path: &str,
    headers: &[String],
    selected: &[usize],
    cells: &mut [Vec<Option<f64>>],
    policy: MissingPolicy,
) -> Result<(), CsvError> {
    let n_rows = cells.first().map_or(0, Vec::len);
    match policy {
        MissingPolicy::Error => {
            // Row-major scan so the first offense reported reads in file order.
            for row in 0..n_rows {
                for (slot, &col) in selected.iter().enumerate() {
                    if cells[slot][row].is_none() {
                        return Err(CsvError::Missing {
                            path: path.to_string(),
                            row: row + 1,
                            column: headers[col].clone(),
                        });
                    }
                }
            }
        }
        MissingPolicy::DropRow => {
            let keep: Vec<bool> = (0..n_rows)
                .map(|row| cells.iter().all(|column| column[row].is_some()))
                .collect();
            for column in cells.iter_mut() {
                let mut it = keep.iter();
                column.retain(|_| *it.next().expect("mask covers rows"));
            }
        }
        MissingPolicy::InterpolateLinear => {
            for (slot, &col) in selected.iter().enumerate() {
                interpolate_column(path, &headers[col], &mut cells[slot])?;
            }
        }
    }
    Ok(())
}

/// Index-weighted fill: a gap at i between observed lo < i < hi becomes
/// v_lo + (v_hi − v_lo)·(i − lo)/(hi − lo).
fn interpolate_column(
    path: &str,
    column: &str,
    vals: &mut [Option<f64>],
) -> Result<(), CsvError> {
    let edge = |row: usize| CsvError::EdgeMissing {
        path: path.to_string(),
        row: row + 1,
        column: column.to_string(),
    };
    let mut i = 0;
    while i < vals.len() {
        if vals[i].is_some() {
            i += 1;
            continue;
        }
        let lo = i.checked_sub(1).ok_or_else(|| edge(i))?;
        let hi = (i..vals.len())
            .find(|&j| vals[j].is_some())
            .ok_or_else(|| edge(vals.len() - 1))?;
        let v_lo = vals[lo].expect("observed neighbour");
        let v_hi = vals[hi].expect("observed neighbour");
        for j in i..hi {
            let w = (j - lo) as f64 / (hi - lo) as f64;
            vals[j] = Some(v_lo + (v_hi - v_lo) * w);
        }
        i = hi + 1;
    }
    Ok(())
}

/// Quote a field only when the bare text would break the frame.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().expect("tempfile");
        f.write_all(content.as_bytes()).expect("write");
        f
    }

    fn ingest(
        content: &str,
        select: Option<&[&str]>,
        policy: MissingPolicy,
    ) -> Result<Dataset, CsvError> {
        let f = file(content);
        let names: Option<Vec<String>> =
            select.map(|s| s.iter().map(|n| n.to_string()).collect());
        ingest_csv(f.path(), names.as_deref(), policy)
    }

    #[test]
    fn selects_one_column_of_two() {
        let d = ingest("t,x\n1,1.0\n2,2.0\n", Some(&["x"]), MissingPolicy::Error).unwrap();
        assert_eq!(d.columns().len(), 1);
        assert_eq!(d.columns()[0].name(), "x");
        assert_eq!(d.columns()[0].values(), &[1.0, 2.0]);
    }

    #[test]
    fn nan_under_error_policy_names_row_2() {
        let err = ingest("t,x\n1,1.0\n2,NaN\n", None, MissingPolicy::Error).unwrap_err();
        match err {
            CsvError::Missing { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn interpolation_fills_the_midpoint() {
        let d = ingest(
            "t,x\n1,1.0\n2,\n3,3.0\n",
            Some(&["x"]),
            MissingPolicy::InterpolateLinear,
        )
        .unwrap();
        assert_eq!(d.columns()[0].values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn interpolation_is_index_weighted_over_long_gaps() {
        let d = ingest(
            "x\n0.0\nna\nNULL\n6.0\n",
            None,
            MissingPolicy::InterpolateLinear,
        )
        .unwrap();
        assert_eq!(d.columns()[0].values(), &[0.0, 2.0, 4.0, 6.0]);
    }

    #[test]
    fn interpolation_refuses_edge_gaps() {
        let err = ingest("t,x\n1,\n2,2.0\n3,3.0\n", None, MissingPolicy::InterpolateLinear)
            .unwrap_err();
        match err {
            CsvError::EdgeMissing { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "x");
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn drop_row_keeps_selected_columns_aligned() {
        let d = ingest(
            "t,x\n1,1.0\n2,\n3,3.0\n",
            None,
            MissingPolicy::DropRow,
        )
        .unwrap();
        assert_eq!(d.columns()[0].values(), &[1.0, 3.0]);
        assert_eq!(d.columns()[1].values(), &[1.0, 3.0]);
    }

    #[test]
    fn garbage_is_a_parse_error_under_every_policy() {
        for policy in [
            MissingPolicy::Error,
            MissingPolicy::DropRow,
            MissingPolicy::InterpolateLinear,
        ] {
            let err = ingest("t,x\n1,abc\n2,2.0\n", None, policy).unwrap_err();
            match err {
                CsvError::BadCell { row, column, value, .. } => {
                    assert_eq!(row, 1);
                    assert_eq!(column, "x");
                    assert_eq!(value, "abc");
                }
                other => panic!("wrong error: {other:?}"),
            }
        }
    }

    #[test]
    fn non_finite_parses_count_as_missing_not_garbage() {
        let err = ingest("x\ninf\n2.0\n", None, MissingPolicy::Error).unwrap_err();
        assert!(matches!(err, CsvError::Missing { row: 1, .. }), "{err:?}");
    }

    #[test]
    fn ragged_row_is_rejected_with_counts() {
        let err = ingest("a,b\n1,2\n3\n", None, MissingPolicy::Error).unwrap_err();
        match err {
            CsvError::Ragged { row, got, expected, .. } => {
                assert_eq!((row, got, expected), (2, 1, 2));
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn unknown_selection_lists_what_exists() {
        let err = ingest("a,b\n1,2\n3,4\n", Some(&["z"]), MissingPolicy::Error).unwrap_err();
        match err {
            CsvError::UnknownColumn { name, available, .. } => {
                assert_eq!(name, "z");
                assert_eq!(available, "a, b");
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn duplicate_header_is_rejected() {
        let err = ingest("x,x\n1,2\n", None, MissingPolicy::Error).unwrap_err();
        assert!(matches!(err, CsvError::DuplicateColumn { name, .. } if name == "x"));
    }

    #[test]
    fn comments_and_crlf_are_tolerated() {
        let d = ingest(
            "# version=0.0.0\r\n# seed=7\r\nt, x\r\n1, 1.5\r\n2, 2.5\r\n",
            Some(&["x"]),
            MissingPolicy::Error,
        )
        .unwrap();
        assert_eq!(d.columns()[0].values(), &[1.5, 2.5]);
    }

    #[test]
    fn a_dropped_to_death_column_is_too_short() {
        let err = ingest("x\nna\nna\n1.0\n", None, MissingPolicy::DropRow).unwrap_err();
        assert!(matches!(err, CsvError::Column { .. }), "{err:?}");
    }

    #[test]
    fn quoting_only_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
