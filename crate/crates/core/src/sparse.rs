//! Compressed sparse row matrices, just enough for feature storage and
//! graph propagation.

use ndarray::Array2;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists. Columns within a row must
    /// be strictly increasing.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let n = rows.len();
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (c, v) in row {
                debug_assert!(c < cols);
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows: n,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &Array2<f64>) -> Self {
        let rows = m
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(c, &x)| (c, x))
                    .collect()
            })
            .collect();
        CsrMatrix::from_rows(m.ncols(), rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                out[[i, j]] = v;
            }
        }
        out
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Scales each row to sum to one; all-zero rows stay zero.
    pub fn row_normalized(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            let span = self.indptr[i]..self.indptr[i + 1];
            let s: f64 = self.values[span.clone()].iter().sum();
            if s != 0.0 {
                for v in &mut out.values[span] {
                    *v /= s;
                }
            }
        }
        out
    }

    /// `self · dense`.
    pub fn dot(&self, dense: &Array2<f64>) -> Array2<f64> {
        assert_eq!(self.cols, dense.nrows(), "inner dimensions differ");
        let mut out = Array2::zeros((self.rows, dense.ncols()));
        for i in 0..self.rows {
            let mut out_row = out.row_mut(i);
            for (j, v) in self.row(i) {
                out_row.scaled_add(v, &dense.row(j));
            }
        }
        out
    }

    /// `selfᵀ · dense`.
    pub fn t_dot(&self, dense: &Array2<f64>) -> Array2<f64> {
        assert_eq!(self.rows, dense.nrows(), "inner dimensions differ");
        let mut out = Array2::zeros((self.cols, dense.ncols()));
        for i in 0..self.rows {
            let src = dense.row(i);
            for (j, v) in self.row(i) {
                out.row_mut(j).scaled_add(v, &src);
            }
        }
        out
    }
}
