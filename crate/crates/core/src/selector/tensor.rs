use alloc::vec;
use alloc::vec::Vec;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                what: "matrix data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::ShapeMismatch {
                    what: "matrix row",
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Self {
            rows: n,
            cols,
            data,
        })
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

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self · w + bias`, where `bias` is a single row.
    pub fn affine(&self, w: &Matrix, bias: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, w.rows);
        debug_assert_eq!(bias.shape(), (1, w.cols));
        let mut out = Matrix::zeros(self.rows, w.cols);
        for i in 0..self.rows {
            let o = out.row_mut(i);
            o.copy_from_slice(bias.row(0));
            for (k, &x) in self.row(i).iter().enumerate() {
                if x != 0.0 {
                    for (oj, &wj) in o.iter_mut().zip(w.row(k)) {
                        *oj += x * wj;
                    }
                }
            }
        }
        out
    }

    /// `self · wᵀ`.
    pub fn matmul_t(&self, w: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, w.cols);
        let mut out = Matrix::zeros(self.rows, w.rows);
        for i in 0..self.rows {
            let x = self.row(i);
            for j in 0..w.rows {
                out.data[i * w.rows + j] = dot(x, w.row(j));
            }
        }
        out
    }

    /// `self += xᵀ · dy`.
    pub fn add_tn(&mut self, x: &Matrix, dy: &Matrix) {
        debug_assert_eq!((self.rows, self.cols), (x.cols, dy.cols));
        for t in 0..x.rows {
            let dyt = dy.row(t);
            for (k, &xk) in x.row(t).iter().enumerate() {
                if xk != 0.0 {
                    for (g, &d) in self.row_mut(k).iter_mut().zip(dyt) {
                        *g += xk * d;
                    }
                }
            }
        }
    }

    /// Adds the column sums of `dy` into a single-row matrix.
    pub fn add_col_sums(&mut self, dy: &Matrix) {
        debug_assert_eq!((self.rows, self.cols), (1, dy.cols));
        for t in 0..dy.rows {
            for (g, &d) in self.data.iter_mut().zip(dy.row(t)) {
                *g += d;
            }
        }
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(rows).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_and_transposes() {
        let x = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let w = Matrix::from_rows(vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]).unwrap();
        let b = Matrix::from_rows(vec![vec![0.5, 0.5, 0.5]]).unwrap();
        let y = x.affine(&w, &b);
        assert_eq!(y.row(0), &[1.5, 2.5, 3.5]);
        assert_eq!(y.row(1), &[3.5, 4.5, 7.5]);
        let back = y.matmul_t(&w);
        assert_eq!(back.row(0), &[5.0, 6.0]);
        let mut g = Matrix::zeros(2, 3);
        g.add_tn(&x, &y);
        assert_eq!(g.row(0), &[1.5 + 10.5, 2.5 + 13.5, 3.5 + 22.5]);
        let mut s = Matrix::zeros(1, 3);
        s.add_col_sums(&y);
        assert_eq!(s.row(0), &[5.0, 7.0, 11.0]);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Matrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn nested_array_serialization() {
        let m = Matrix::from_rows(vec![vec![1.0, 2.5], vec![-3.0, 0.0]]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[1.0,2.5],[-3.0,0.0]]");
        assert_eq!(serde_json::from_str::<Matrix>(&json).unwrap(), m);
    }
}
