use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use super::MatrixError;

/// Dense real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `M * 1`, the row sums.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Rows selected by `keep` in order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &i in keep {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: keep.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Writes the `m,n` header line followed by one comma-separated line per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{},{}", self.rows, self.cols)?;
        let mut line = String::new();
        for i in 0..self.rows {
            line.clear();
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                write!(line, "{v}").expect("writing to a String");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, MatrixError> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| MatrixError::Parse("empty matrix file".into()))??;
        let (m, n) = header
            .trim()
            .split_once(',')
            .ok_or_else(|| MatrixError::Parse(format!("bad header {header:?}")))?;
        let rows: usize = m
            .trim()
            .parse()
            .map_err(|_| MatrixError::Parse(format!("bad row count {m:?}")))?;
        let cols: usize = n
            .trim()
            .parse()
            .map_err(|_| MatrixError::Parse(format!("bad column count {n:?}")))?;
        let mut data = Vec::with_capacity(rows * cols);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if i >= rows {
                return Err(MatrixError::Parse("more rows than declared".into()));
            }
            let before = data.len();
            for field in line.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| MatrixError::Parse(format!("bad value {field:?}")))?;
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(MatrixError::Parse(format!(
                    "row {i} has {} values, expected {cols}",
                    data.len() - before
                )));
            }
        }
        if data.len() != rows * cols {
            return Err(MatrixError::Parse("fewer rows than declared".into()));
        }
        let m = Self { rows, cols, data };
        if !m.is_finite() {
            return Err(MatrixError::NonFinite);
        }
        Ok(m)
    }
}
