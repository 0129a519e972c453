//! CSV ingestion and bootstrap resampling.

use std::fs::File;
use std::path::Path;

use rand::Rng;

use crate::error::{KvarError, Result};
use crate::rng::StreamRng;
use crate::transport::EmpiricalMeasure;

/// `m` rows in `ℝᵈ`, treated as a uniform discrete measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHandle {
    coords: Vec<f64>,
    m: usize,
    d: usize,
}

impl DatasetHandle {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(KvarError::EmptyDataset)?;
        let d = first.as_ref().len();
        if d == 0 {
            return Err(KvarError::param("d", "rows must have at least one field"));
        }
        let mut coords = Vec::with_capacity(rows.len() * d);
        for (idx, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(KvarError::RaggedRow {
                    row: idx + 1,
                    expected: d,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Ok(DatasetHandle {
            coords,
            m: rows.len(),
            d,
        })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    /// The same dataset with every row mapped through `f`.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = self.rows().map(&mut f).collect();
        Self::from_rows(&rows)
    }
}

/// Reads a CSV file of numeric rows.
///
/// A first row that does not parse as numbers is taken as a header and
/// skipped. Rows are numbered from 1 in file order (header included) in
/// error messages.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<DatasetHandle> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| KvarError::io(path, e))?;
    read_csv(file)
}

pub(crate) fn read_csv(reader: impl std::io::Read) -> Result<DatasetHandle> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut coords = Vec::new();
    let mut d = 0;
    let mut m = 0;
    for (idx, record) in csv.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, usize> = record
            .iter()
            .enumerate()
            .map(|(col, field)| field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(col))
            .collect();
        let values = match parsed {
            Ok(values) => values,
            Err(_) if m == 0 && idx == 0 => continue, // header
            Err(col) => {
                return Err(KvarError::Parse {
                    row,
                    column: col + 1,
                    value: record[col].to_string(),
                })
            }
        };
        if m == 0 {
            d = values.len();
        } else if values.len() != d {
            return Err(KvarError::RaggedRow {
                row,
                expected: d,
                found: values.len(),
            });
        }
        coords.extend(values);
        m += 1;
    }
    if m == 0 {
        return Err(KvarError::EmptyDataset);
    }
    Ok(DatasetHandle { coords, m, d })
}

/// Draws `k` rows uniformly with replacement.
pub fn bootstrap_sample(handle: &DatasetHandle, k: usize, rng: &mut StreamRng) -> Result<EmpiricalMeasure> {
    if handle.is_empty() {
        return Err(KvarError::EmptyDataset);
    }
    if k == 0 {
        return Err(KvarError::param("k", "sample size must be at least 1"));
    }
    let mut coords = Vec::with_capacity(k * handle.d);
    for _ in 0..k {
        let i = rng.random_range(0..handle.m);
        coords.extend_from_slice(handle.row(i));
    }
    EmpiricalMeasure::new(coords, handle.d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn parses_rows_in_order() {
        let h = read_csv("1,2\n3,4".as_bytes()).unwrap();
        assert_eq!((h.len(), h.dim()), (2, 2));
        assert_eq!(h.row(0), &[1.0, 2.0]);
        assert_eq!(h.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn header_and_crlf() {
        let h = read_csv("x,y\r\n1.5, -2\r\n3e1,4\r\n".as_bytes()).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.row(0), &[1.5, -2.0]);
        assert_eq!(h.row(1), &[30.0, 4.0]);
    }

    #[test]
    fn empty_file() {
        assert!(matches!(read_csv("".as_bytes()), Err(KvarError::EmptyDataset)));
        assert!(matches!(read_csv("a,b\n".as_bytes()), Err(KvarError::EmptyDataset)));
    }

    #[test]
    fn ragged_row_is_named() {
        match read_csv("1,2\n3".as_bytes()) {
            Err(KvarError::RaggedRow { row, expected, found }) => {
                assert_eq!((row, expected, found), (2, 2, 1));
            }
            other => panic!("expected ragged-row error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_field_is_located() {
        match read_csv("1,2\n3,oops\n".as_bytes()) {
            Err(KvarError::Parse { row, column, value }) => {
                assert_eq!((row, column, value.as_str()), (2, 2, "oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn single_row_is_repeated() {
        let h = DatasetHandle::from_rows(&[[2.0, -1.0]]).unwrap();
        let s = bootstrap_sample(&h, 5, &mut stream(3, 0)).unwrap();
        assert_eq!(s.k(), 5);
        assert!(s.points().all(|p| p == [2.0, -1.0]));
    }

    #[test]
    fn resampling_is_uniform() {
        let h = DatasetHandle::from_rows(&[[0.0], [1.0]]).unwrap();
        let k = 100_000;
        let s = bootstrap_sample(&h, k, &mut stream(11, 0)).unwrap();
        let ones = s.coords().iter().filter(|&&x| x == 1.0).count();
        let freq = ones as f64 / k as f64;
        assert!((freq - 0.5).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn resampling_is_deterministic() {
        let h = DatasetHandle::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]).unwrap();
        let a = bootstrap_sample(&h, 3, &mut stream(5, 9)).unwrap();
        let b = bootstrap_sample(&h, 3, &mut stream(5, 9)).unwrap();
        assert_eq!(a, b);
    }
}
