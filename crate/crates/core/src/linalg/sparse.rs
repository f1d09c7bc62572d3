//! Compressed sparse row matrices.

use std::collections::BTreeMap;

/// Anything that can apply `y = A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// CSR matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a finalized matrix: duplicates are summed and exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nrows];
        for &(i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            *rows[i].entry(j).or_insert(0.0) += v;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in rows {
            for (j, v) in row {
                if v != 0.0 {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    /// Matrix with the given sparsity pattern and zero values. Column lists
    /// are sorted and deduplicated.
    pub fn from_pattern(nrows: usize, ncols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        assert_eq!(rows.len(), nrows);
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        indptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            indices.extend_from_slice(r);
            indptr.push(indices.len());
        }
        let data = vec![0.0; indices.len()];
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::identity(d.len());
        m.data.copy_from_slice(d);
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    /// Storage position of entry `(i, j)`, if it is in the pattern.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.indptr[i];
        self.indices[start..self.indptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.data[k])
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.shape() == other.shape()
            && self.indptr == other.indptr
            && self.indices == other.indices
    }

    /// Drops stored zeros.
    pub fn prune(&mut self) {
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        indptr.push(0);
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                if self.data[k] != 0.0 {
                    indices.push(self.indices[k]);
                    data.push(self.data[k]);
                }
            }
            indptr.push(indices.len());
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// `y = |A| x` with entrywise absolute values.
    pub fn abs_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                (self.indptr[i]..self.indptr[i + 1])
                    .map(|k| self.data[k].abs() * x[self.indices[k]])
                    .sum()
            })
            .collect()
    }

    /// `y = A^T x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (i, xi) in x.iter().enumerate() {
            for k in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[k]] += self.data[k] * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                indices[next[j]] = i;
                data[next[j]] = self.data[k];
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr,
            indices,
            data,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    /// `self += a * other` for matrices sharing a pattern.
    pub fn add_scaled_same_pattern(&mut self, a: f64, other: &Self) {
        assert!(self.same_pattern(other), "patterns differ");
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    /// General sum `a * self + b * other` (patterns merged, zeros dropped).
    pub fn linear_combination(a: f64, lhs: &Self, b: f64, rhs: &Self) -> Self {
        assert_eq!(lhs.shape(), rhs.shape());
        let mut trip = Vec::with_capacity(lhs.nnz() + rhs.nnz());
        for (m, s) in [(lhs, a), (rhs, b)] {
            for i in 0..m.nrows {
                for k in m.indptr[i]..m.indptr[i + 1] {
                    trip.push((i, m.indices[k], s * m.data[k]));
                }
            }
        }
        Self::from_triplets(lhs.nrows, lhs.ncols, &trip)
    }

    /// Rows selected by `rows`, columns selected by `cols`, renumbered
    /// consecutively.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for &i in rows {
            let mut row: Vec<(usize, f64)> = (self.indptr[i]..self.indptr[i + 1])
                .filter_map(|k| {
                    let j = col_map[self.indices[k]];
                    (j != usize::MAX).then_some((j, self.data[k]))
                })
                .collect();
            row.sort_unstable_by_key(|e| e.0);
            for (j, v) in row {
                indices.push(j);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            nrows: rows.len(),
            ncols: cols.len(),
            indptr,
            indices,
            data,
        }
    }

    /// Largest `|a_ij - a_ji|` relative to the largest `|a_ij|`.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        let diff = Self::linear_combination(1.0, self, -1.0, &t);
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let d = diff.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            d
        } else {
            d / scale
        }
    }

    /// Imposes `x_k = g_k` on the listed DOFs by row and column elimination,
    /// lifting the known values into the right-hand side. Eliminated rows and
    /// columns become identity rows/columns, so symmetric matrices stay
    /// symmetric.
    pub fn apply_dirichlet(&mut self, rhs: &mut [f64], constrained: &[(usize, f64)]) {
        assert_eq!(self.nrows, self.ncols);
        let mut value = vec![None; self.nrows];
        for &(k, g) in constrained {
            assert!(
                self.position(k, k).is_some(),
                "constrained row {k} lacks a diagonal entry"
            );
            value[k] = Some(g);
        }
        for i in 0..self.nrows {
            if let Some(g) = value[i] {
                for k in self.indptr[i]..self.indptr[i + 1] {
                    self.data[k] = if self.indices[k] == i { 1.0 } else { 0.0 };
                }
                rhs[i] = g;
            } else {
                for k in self.indptr[i]..self.indptr[i + 1] {
                    if let Some(g) = value[self.indices[k]] {
                        rhs[i] -= self.data[k] * g;
                        self.data[k] = 0.0;
                    }
                }
            }
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                m[(i, self.indices[k])] += self.data[k];
            }
        }
        m
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        dot(x, &ay)
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.nrows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Removes the arithmetic mean of the entries.
pub fn remove_mean(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseMatrix {
        SparseMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 4.0),
                (0, 1, -1.0),
                (1, 0, -1.0),
                (1, 1, 4.0),
                (1, 2, -1.0),
                (2, 1, -1.0),
                (2, 2, 4.0),
                (2, 2, 0.0),
            ],
        )
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 1.0), (1, 0, -1.0)],
        );
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn matvec_and_transpose() {
        let m = sample();
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![2.0, 4.0, 10.0]);
        let r = SparseMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (1, 0, 2.0), (1, 1, 5.0)]);
        let t = r.transpose();
        assert_eq!(t.shape(), (3, 2));
        assert_eq!(t.get(2, 0), 1.0);
        assert_eq!(t.get(1, 1), 5.0);
        assert_eq!(r.tr_mul_vec(&[1.0, 1.0]), t.mul_vec(&[1.0, 1.0]));
        assert_eq!(m.symmetry_defect(), 0.0);
    }

    #[test]
    fn dirichlet_elimination_keeps_symmetry() {
        let mut m = sample();
        let mut rhs = vec![1.0, 1.0, 1.0];
        m.apply_dirichlet(&mut rhs, &[(2, 0.5)]);
        assert_eq!(m.symmetry_defect(), 0.0);
        assert_eq!(rhs, vec![1.0, 1.5, 0.5]);
        assert_eq!(m.get(2, 2), 1.0);
        assert_eq!(m.get(1, 2), 0.0);
    }

    #[test]
    fn submatrix_selects() {
        let m = sample();
        let s = m.submatrix(&[0, 2], &[1, 2]);
        assert_eq!(
            s.to_dense(),
            nalgebra::DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, -1.0, 4.0])
        );
    }
}
