use crate::error::{Error, Result};
use crate::matrix::coo::CooElement;
use crate::Scalar;

/// Compressed sparse row matrix.
///
/// Also serves as the condensed view of a left operand: the `j`-th stored
/// element of row `r` sits in condensed column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    num_rows: usize,
    num_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    pub fn from_parts(
        num_rows: usize,
        num_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<u32>,
        values: Vec<T>,
    ) -> Result<Self> {
        if num_rows >= u32::MAX as usize || num_cols >= u32::MAX as usize {
            return Err(Error::InvalidMatrix("dimensions must fit in 32-bit indices".into()));
        }
        if row_ptr.len() != num_rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                num_rows + 1
            )));
        }
        if row_ptr[0] != 0 || row_ptr[num_rows] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::InvalidMatrix("row_ptr bounds disagree with nnz".into()));
        }
        for r in 0..num_rows {
            let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
            if lo > hi {
                return Err(Error::InvalidMatrix(format!("row_ptr decreases at row {r}")));
            }
            let cols = &col_idx[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMatrix(format!("row {r} columns not strictly increasing")));
            }
            if let Some(&c) = cols.last() {
                if c as usize >= num_cols {
                    return Err(Error::InvalidMatrix(format!("row {r} has column {c} >= {num_cols}")));
                }
            }
        }
        Ok(Self { num_rows, num_cols, row_ptr, col_idx, values })
    }

    /// Builds from unordered triplets, summing duplicates.
    pub fn from_triplets(num_rows: usize, num_cols: usize, mut triplets: Vec<(u32, u32, T)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r as usize >= num_rows || *c as usize >= num_cols) {
            return Err(Error::InvalidMatrix(format!("entry ({r}, {c}) outside {num_rows}x{num_cols}")));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; num_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r as usize + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..num_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self::from_parts(num_rows, num_cols, row_ptr, col_idx, values)
    }

    /// Builds from a key-sorted element stream with unique keys.
    pub fn from_sorted_coo(num_rows: usize, num_cols: usize, elems: &[CooElement<T>]) -> Result<Self> {
        let mut row_ptr = vec![0usize; num_rows + 1];
        let mut col_idx = Vec::with_capacity(elems.len());
        let mut values = Vec::with_capacity(elems.len());
        for e in elems {
            let r = e.row() as usize;
            if r >= num_rows {
                return Err(Error::InvalidMatrix(format!("row {r} out of range")));
            }
            row_ptr[r + 1] += 1;
            col_idx.push(e.col());
            values.push(e.value);
        }
        for r in 0..num_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        if elems.windows(2).any(|w| w[0].key >= w[1].key) {
            return Err(Error::InvalidMatrix("coo stream not strictly increasing".into()));
        }
        Self::from_parts(num_rows, num_cols, row_ptr, col_idx, values)
    }

    pub fn zeros(num_rows: usize, num_cols: usize) -> Self {
        Self { num_rows, num_cols, row_ptr: vec![0; num_rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            num_rows: n,
            num_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n as u32).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Dense row-major input; zeros are not stored.
    pub fn from_dense(rows: &[Vec<T>]) -> Result<Self> {
        let num_cols = rows.first().map_or(0, Vec::len);
        let mut trip = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != num_cols {
                return Err(Error::InvalidMatrix("ragged dense input".into()));
            }
            for (c, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    trip.push((r as u32, c as u32, v));
                }
            }
        }
        Self::from_triplets(rows.len(), num_cols, trip)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.num_cols]; self.num_rows];
        for (r, c, v) in self.iter() {
            out[r as usize][c as usize] = v;
        }
        out
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[u32], &[T]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Looks up a single entry.
    pub fn get(&self, r: usize, c: u32) -> Option<T> {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).ok().map(|i| vals[i])
    }

    /// `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, T)> + '_ {
        (0..self.num_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r as u32, c, v))
        })
    }

    /// Bytes of a CSR image: 12 per element (4-byte index, 8-byte value)
    /// plus 4 per row offset.
    pub fn csr_bytes(&self) -> u64 {
        12 * self.nnz() as u64 + 4 * (self.num_rows as u64 + 1)
    }

    /// Per-column `(row, value)` lists, i.e. a CSC view.
    pub fn column_lists(&self) -> Vec<Vec<(u32, T)>> {
        let mut cols = vec![Vec::new(); self.num_cols];
        for (r, c, v) in self.iter() {
            cols[c as usize].push((r, v));
        }
        cols
    }

    pub fn nonempty_columns(&self) -> usize {
        let mut seen = vec![false; self.num_cols];
        for &c in &self.col_idx {
            seen[c as usize] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }

    /// Same structure with every value mapped through `f`.
    pub fn map_values<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Structural equality plus value agreement at `rel_tol` (exact for exact types).
    /// Returns the first mismatching coordinate, if any.
    pub fn first_mismatch(&self, other: &Self, rel_tol: f64) -> Option<(usize, u32)> {
        if self.num_rows != other.num_rows || self.num_cols != other.num_cols {
            return Some((usize::MAX, u32::MAX));
        }
        for r in 0..self.num_rows {
            let (ca, va) = self.row(r);
            let (cb, vb) = other.row(r);
            for i in 0..ca.len().max(cb.len()) {
                match (ca.get(i), cb.get(i)) {
                    (Some(&x), Some(&y)) if x == y => {
                        if !va[i].close_to(vb[i], rel_tol) {
                            return Some((r, x));
                        }
                    }
                    (Some(&x), Some(&y)) => return Some((r, x.min(y))),
                    (Some(&x), None) | (None, Some(&x)) => return Some((r, x)),
                    (None, None) => unreachable!(),
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::<f64>::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 0, 3.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), Some(5.0));
    }

    #[test]
    fn rejects_unsorted_row() {
        let err = CsrMatrix::<f64>::from_parts(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_out_of_range_column() {
        assert!(CsrMatrix::<f64>::from_parts(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
    }

    #[test]
    fn mismatch_reports_coordinate() {
        let a = CsrMatrix::<i64>::from_dense(&[vec![1, 0], vec![0, 2]]).unwrap();
        let b = CsrMatrix::<i64>::from_dense(&[vec![1, 0], vec![0, 3]]).unwrap();
        assert_eq!(a.first_mismatch(&a, 0.0), None);
        assert_eq!(a.first_mismatch(&b, 0.0), Some((1, 1)));
    }

    #[test]
    fn csr_bytes_counts_offsets() {
        let m = CsrMatrix::<f64>::identity(3);
        assert_eq!(m.csr_bytes(), 12 * 3 + 4 * 4);
    }
}
