//! Fixed-coefficient sparse row operators used for incidence aggregation.

use crate::linalg::{Matrix, Real};

/// A sparse linear map `out[r] = Σ coef · in[c]` stored row-compressed.
///
/// Entries within a row are kept sorted by source index, so the accumulation
/// order (destination, then source) is fixed and results are bitwise
/// reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp<T> {
    out_rows: usize,
    in_rows: usize,
    offsets: Vec<usize>,
    sources: Vec<usize>,
    coefs: Vec<T>,
}

impl<T: Real> SparseOp<T> {
    /// Builds the operator from `(destination, source, coefficient)` triplets.
    /// Duplicate `(destination, source)` pairs are summed.
    pub fn from_triplets(out_rows: usize, in_rows: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut offsets = vec![0usize; out_rows + 1];
        let mut sources = Vec::with_capacity(triplets.len());
        let mut coefs: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < out_rows && c < in_rows, "triplet ({r}, {c}) out of range");
            if last == Some((r, c)) {
                *coefs.last_mut().expect("previous entry") += v;
                continue;
            }
            last = Some((r, c));
            offsets[r + 1] += 1;
            sources.push(c);
            coefs.push(v);
        }
        for r in 0..out_rows {
            offsets[r + 1] += offsets[r];
        }
        Self { out_rows, in_rows, offsets, sources, coefs }
    }

    pub fn out_rows(&self) -> usize {
        self.out_rows
    }

    pub fn in_rows(&self) -> usize {
        self.in_rows
    }

    pub fn nnz(&self) -> usize {
        self.sources.len()
    }

    /// Entries of destination row `r` as `(source, coefficient)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.offsets[r]..self.offsets[r + 1];
        self.sources[span.clone()].iter().copied().zip(self.coefs[span].iter().copied())
    }

    /// Applies the operator to the rows of `x`. Destinations without entries
    /// produce zero rows.
    pub fn apply(&self, x: &Matrix<T>) -> Matrix<T> {
        assert_eq!(x.rows(), self.in_rows, "sparse operator input rows mismatch");
        let cols = x.cols();
        let mut out = Matrix::zeros(self.out_rows, cols);
        for r in 0..self.out_rows {
            let dst = out.row_mut(r);
            for (src, w) in self.row(r) {
                for (d, &s) in dst.iter_mut().zip(x.row(src)) {
                    *d += w * s;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.out_rows {
            for (c, w) in self.row(r) {
                triplets.push((c, r, w));
            }
        }
        Self::from_triplets(self.in_rows, self.out_rows, triplets)
    }

    /// Dense `out_rows x in_rows` form, for tests and small-instance checks.
    pub fn to_dense(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.out_rows, self.in_rows);
        for r in 0..self.out_rows {
            for (c, w) in self.row(r) {
                m.set(r, c, m.get(r, c) + w);
            }
        }
        m
    }
}
