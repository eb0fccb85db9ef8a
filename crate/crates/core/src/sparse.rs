//! Compressed sparse row operators.
//!
//! Every degradation operator (decimation D, blur B, motion M, and their
//! products A_i = D·B·M_i) is stored in canonical CSR form: column indices
//! strictly increasing within each row, duplicates merged, no stored zeros,
//! all weights finite. The two hot kernels are the row-major `spmv` and the
//! windowed variants used by partitioned workers.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<S> {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    weights: Vec<S>,
}

impl<S: Scalar> SparseOperator<S> {
    pub fn identity(n: usize) -> Self {
        SparseOperator {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n as u32).collect(),
            weights: vec![S::one(); n],
        }
    }

    /// Builds from (row, col, weight) triplets in any order. Duplicates are
    /// summed; exact zeros are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, S)>,
    ) -> Result<Self> {
        check_col_bound(cols)?;
        let mut per_row: Vec<Vec<(u32, S)>> = vec![Vec::new(); rows];
        for (r, c, w) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::contract(format!(
                    "triplet ({r}, {c}) outside {rows}x{cols} operator"
                )));
            }
            per_row[r].push((c as u32, w));
        }
        Self::from_row_entries(rows, cols, |r, entries| {
            entries.extend_from_slice(&per_row[r])
        })
    }

    /// Builds row by row: `fill(r, entries)` pushes the (col, weight) pairs
    /// of row r in any order; each row is canonicalized (sorted, merged,
    /// zero-free) before storage.
    pub fn from_row_entries(
        rows: usize,
        cols: usize,
        mut fill: impl FnMut(usize, &mut Vec<(u32, S)>),
    ) -> Result<Self> {
        check_col_bound(cols)?;
        let mut row_offsets = Vec::with_capacity(rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut weights = Vec::new();
        let mut scratch: Vec<(u32, S)> = Vec::new();
        for r in 0..rows {
            scratch.clear();
            fill(r, &mut scratch);
            canonicalize_row(&mut scratch)?;
            for &(c, w) in &scratch {
                if c as usize >= cols {
                    return Err(Error::contract(format!(
                        "column {c} outside operator with {cols} columns"
                    )));
                }
                col_indices.push(c);
                weights.push(w);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseOperator {
            rows,
            cols,
            row_offsets,
            col_indices,
            weights,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[u32], &[S]) {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[range.clone()], &self.weights[range])
    }

    /// y = A·x.
    pub fn spmv(&self, x: &[S]) -> Result<Vec<S>> {
        let mut y = vec![S::zero(); self.rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[S], y: &mut [S]) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::contract(format!(
                "spmv: operator has {} columns, input has {}",
                self.cols,
                x.len()
            )));
        }
        if y.len() != self.rows {
            return Err(Error::contract(format!(
                "spmv: operator has {} rows, output has {}",
                self.rows,
                y.len()
            )));
        }
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, ws) = self.row(r);
            let mut acc = S::zero();
            for (&c, &w) in cols.iter().zip(ws) {
                acc += w * x[c as usize];
            }
            *out = acc;
        }
        Ok(())
    }

    /// x = Aᵀ·y, computed by scattering rows (no transposed matrix needed).
    pub fn spmv_transpose(&self, y: &[S]) -> Result<Vec<S>> {
        if y.len() != self.rows {
            return Err(Error::contract(format!(
                "spmv_transpose: operator has {} rows, input has {}",
                self.rows,
                y.len()
            )));
        }
        let mut x = vec![S::zero(); self.cols];
        for r in 0..self.rows {
            let yr = y[r];
            let (cols, ws) = self.row(r);
            for (&c, &w) in cols.iter().zip(ws) {
                x[c as usize] += w * yr;
            }
        }
        Ok(x)
    }

    /// Explicit transpose in canonical CSR form.
    pub fn transpose(&self) -> SparseOperator<S> {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_indices {
            counts[c as usize + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let row_offsets = counts.clone();
        let mut cursor = counts;
        let mut col_indices = vec![0u32; self.nnz()];
        let mut weights = vec![S::zero(); self.nnz()];
        for r in 0..self.rows {
            let (cols, ws) = self.row(r);
            for (&c, &w) in cols.iter().zip(ws) {
                let slot = cursor[c as usize];
                col_indices[slot] = r as u32;
                weights[slot] = w;
                cursor[c as usize] += 1;
            }
        }
        SparseOperator {
            rows: self.cols,
            cols: self.rows,
            row_offsets,
            col_indices,
            weights,
        }
    }

    /// self · other, with the same nonzero pattern as the algebraic product
    /// (duplicates merged, zeros dropped).
    pub fn compose(&self, other: &SparseOperator<S>) -> Result<SparseOperator<S>> {
        if self.cols != other.rows {
            return Err(Error::contract(format!(
                "compose: left operator has {} columns, right has {} rows",
                self.cols, other.rows
            )));
        }
        let mut scratch: Vec<(u32, S)> = Vec::new();
        SparseOperator::from_row_entries(self.rows, other.cols, |r, entries| {
            scratch.clear();
            let (cols, ws) = self.row(r);
            for (&k, &wa) in cols.iter().zip(ws) {
                let (bcols, bws) = other.row(k as usize);
                for (&j, &wb) in bcols.iter().zip(bws) {
                    scratch.push((j, wa * wb));
                }
            }
            entries.extend_from_slice(&scratch);
        })
    }

    /// Restriction to a row range and column range; columns outside the
    /// range are skipped and the kept ones are re-indexed from the range
    /// start. Used by partitioned workers to apply a shared operator on
    /// their window without copying it.
    pub fn window(&self, rows: Range<usize>, cols: Range<usize>) -> OperatorWindow<'_, S> {
        debug_assert!(rows.end <= self.rows && cols.end <= self.cols);
        OperatorWindow {
            op: self,
            rows,
            cols,
        }
    }

    /// Sum of the weights of row r.
    pub fn row_sum(&self, r: usize) -> S {
        self.row(r).1.iter().copied().sum()
    }
}

fn check_col_bound(cols: usize) -> Result<()> {
    if cols > u32::MAX as usize {
        return Err(Error::config(format!(
            "operator with {cols} columns exceeds the u32 column-index range"
        )));
    }
    Ok(())
}

/// Sorts by column, merges duplicates, drops zeros, rejects non-finite
/// weights.
fn canonicalize_row<S: Scalar>(entries: &mut Vec<(u32, S)>) -> Result<()> {
    entries.sort_unstable_by_key(|&(c, _)| c);
    let mut write = 0usize;
    let mut read = 0usize;
    while read < entries.len() {
        let (c, mut w) = entries[read];
        read += 1;
        while read < entries.len() && entries[read].0 == c {
            w += entries[read].1;
            read += 1;
        }
        if !w.is_finite() {
            return Err(Error::contract("non-finite operator weight"));
        }
        if w != S::zero() {
            entries[write] = (c, w);
            write += 1;
        }
    }
    entries.truncate(write);
    Ok(())
}

/// Borrowed view of a row/column sub-block of a CSR operator.
#[derive(Debug, Clone)]
pub struct OperatorWindow<'a, S> {
    op: &'a SparseOperator<S>,
    rows: Range<usize>,
    cols: Range<usize>,
}

impl<'a, S: Scalar> OperatorWindow<'a, S> {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    /// out[r] = Σ_j A[rows.start + r, cols.start + j] · x[j].
    pub fn apply_into(&self, x: &[S], out: &mut [S]) {
        debug_assert_eq!(x.len(), self.cols.len());
        debug_assert_eq!(out.len(), self.rows.len());
        let base = self.cols.start;
        let width = self.cols.len();
        for (local, out_v) in out.iter_mut().enumerate() {
            let (cols, ws) = self.op.row(self.rows.start + local);
            let mut acc = S::zero();
            for (&c, &w) in cols.iter().zip(ws) {
                if let Some(j) = (c as usize).checked_sub(base) {
                    if j < width {
                        acc += w * x[j];
                    }
                }
            }
            *out_v = acc;
        }
    }

    /// out[r] = Σ_j A[...] · x[j] − y[r]; fused residual evaluation.
    pub fn apply_sub_into(&self, x: &[S], y: &[S], out: &mut [S]) {
        debug_assert_eq!(y.len(), self.rows.len());
        self.apply_into(x, out);
        for (o, &yv) in out.iter_mut().zip(y) {
            *o -= yv;
        }
    }

    /// out[r] += Σ_j A[...] · x[j]; used to accumulate per-frame gradients.
    pub fn apply_accumulate(&self, x: &[S], out: &mut [S]) {
        debug_assert_eq!(x.len(), self.cols.len());
        debug_assert_eq!(out.len(), self.rows.len());
        let base = self.cols.start;
        let width = self.cols.len();
        for (local, out_v) in out.iter_mut().enumerate() {
            let (cols, ws) = self.op.row(self.rows.start + local);
            let mut acc = S::zero();
            for (&c, &w) in cols.iter().zip(ws) {
                if let Some(j) = (c as usize).checked_sub(base) {
                    if j < width {
                        acc += w * x[j];
                    }
                }
            }
            *out_v += acc;
        }
    }
}
