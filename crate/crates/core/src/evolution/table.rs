use std::io::Read;
use std::path::Path;

use super::{EvolutionError, Matrix};
use crate::scalar::Real;

/// Coefficient matrices `A(k)` for consecutive integers `k` read from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table<F> {
    dim: usize,
    first: i64,
    rows: Vec<Matrix<F>>,
    /// Where the table was read from, kept for descriptors.
    pub source: Option<String>,
}

fn table_err(msg: impl Into<String>) -> EvolutionError {
    EvolutionError::Table(msg.into())
}

impl<F: Real> Table<F> {
    pub fn new(first: i64, rows: Vec<Matrix<F>>) -> Result<Self, EvolutionError> {
        let dim = rows.first().ok_or_else(|| table_err("table has no rows"))?.dim();
        if rows.iter().any(|m| m.dim() != dim) {
            return Err(table_err("table rows have inconsistent dimensions"));
        }
        Ok(Table { dim, first, rows, source: None })
    }

    pub fn from_path(path: &Path, dim: usize) -> Result<Self, EvolutionError> {
        let file = std::fs::File::open(path).map_err(|e| table_err(format!("{}: {e}", path.display())))?;
        let mut t = Self::from_reader(file, dim)?;
        t.source = Some(path.display().to_string());
        Ok(t)
    }

    /// Expects the header `k,a_1_1,...,a_d_d` and one row per integer `k`
    /// in increasing order without holes.
    pub fn from_reader<R: Read>(reader: R, dim: usize) -> Result<Self, EvolutionError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| table_err(e.to_string()))?.clone();
        let mut expected = vec!["k".to_string()];
        for i in 1..=dim {
            for j in 1..=dim {
                expected.push(format!("a_{i}_{j}"));
            }
        }
        let found: Vec<&str> = header.iter().collect();
        if found != expected {
            return Err(table_err(format!("header must be `{}`, found `{}`", expected.join(","), found.join(","))));
        }
        let mut first = None;
        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| table_err(e.to_string()))?;
            let row = line + 2;
            let k: i64 = record[0].parse().map_err(|_| table_err(format!("row {row}: k = `{}` is not an integer", &record[0])))?;
            let start = *first.get_or_insert(k);
            if k != start + rows.len() as i64 {
                return Err(table_err(format!("row {row}: expected k = {}, found {k}", start + rows.len() as i64)));
            }
            let values = record
                .iter()
                .skip(1)
                .enumerate()
                .map(|(c, s)| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(F::of)
                        .ok_or_else(|| table_err(format!("row {row}, column {}: `{s}` is not a number", &expected[c + 1])))
                })
                .collect::<Result<Vec<F>, _>>()?;
            rows.push(Matrix::from_row_major(dim, values));
        }
        Self::new(first.ok_or_else(|| table_err("table has no rows"))?, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Inclusive index range.
    pub fn range(&self) -> (i64, i64) {
        (self.first, self.first + self.rows.len() as i64 - 1)
    }

    pub fn at(&self, k: i64) -> Result<&Matrix<F>, EvolutionError> {
        let (first, last) = self.range();
        if k < first || k > last {
            return Err(EvolutionError::OutOfTable { k, first, last });
        }
        Ok(&self.rows[(k - first) as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_a_two_by_two_table() {
        let csv = "k,a_1_1,a_1_2,a_2_1,a_2_2\n-1,1,0,0,2\n0,1.5,0,0,0.5\n1,2,1e-3,0,1\n";
        let t = Table::<f64>::from_reader(csv.as_bytes(), 2).unwrap();
        assert_eq!(t.range(), (-1, 1));
        assert_eq!(t.at(1).unwrap()[(0, 1)], 1e-3);
        assert!(matches!(t.at(2), Err(EvolutionError::OutOfTable { k: 2, .. })));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Table::<f64>::from_reader("k,a_1_1\n0,1\n2,1\n".as_bytes(), 1).is_err());
        assert!(Table::<f64>::from_reader("k,b\n0,1\n".as_bytes(), 1).is_err());
        assert!(Table::<f64>::from_reader("k,a_1_1\n0,x\n".as_bytes(), 1).is_err());
        assert!(Table::<f64>::from_reader("k,a_1_1\n".as_bytes(), 1).is_err());
    }
}
