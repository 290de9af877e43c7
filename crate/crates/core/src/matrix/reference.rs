//! Row-wise (Gustavson) reference product and operand statistics.

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::Scalar;

/// Exact reference product `a × b`.
///
/// Every coordinate that receives at least one product appears in the
/// output, including those whose sum cancels to zero.
pub fn oracle_spgemm<T: Scalar>(a: &CsrMatrix<T>, b: &CsrMatrix<T>) -> Result<CsrMatrix<T>> {
    if a.num_cols() != b.num_rows() {
        return Err(Error::Dimension(format!(
            "{}x{} times {}x{}",
            a.num_rows(),
            a.num_cols(),
            b.num_rows(),
            b.num_cols()
        )));
    }
    let n = b.num_cols();
    let mut acc = vec![T::zero(); n];
    let mut marker = vec![usize::MAX; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut row_ptr = Vec::with_capacity(a.num_rows() + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    for r in 0..a.num_rows() {
        touched.clear();
        let (acols, avals) = a.row(r);
        for (&k, &av) in acols.iter().zip(avals) {
            let (bcols, bvals) = b.row(k as usize);
            for (&c, &bv) in bcols.iter().zip(bvals) {
                let ci = c as usize;
                if marker[ci] != r {
                    marker[ci] = r;
                    acc[ci] = T::zero();
                    touched.push(c);
                }
                acc[ci] += av * bv;
            }
        }
        touched.sort_unstable();
        for &c in &touched {
            col_idx.push(c);
            values.push(acc[c as usize]);
        }
        row_ptr.push(col_idx.len());
    }
    CsrMatrix::from_parts(a.num_rows(), n, row_ptr, col_idx, values)
}

/// Longest row, which is also the number of condensed columns.
pub fn max_row_nnz<T: Scalar>(m: &CsrMatrix<T>) -> usize {
    (0..m.num_rows()).map(|r| m.row_nnz(r)).max().unwrap_or(0)
}

/// Number of scalar products `Σ_{(r,c)∈a} nnz(b row c)`.
pub fn count_multiplies<T: Scalar>(a: &CsrMatrix<T>, b: &CsrMatrix<T>) -> u64 {
    a.col_idx().iter().map(|&c| b.row_nnz(c as usize) as u64).sum()
}

/// One multiply plus one add per product term.
pub fn count_flops<T: Scalar>(a: &CsrMatrix<T>, b: &CsrMatrix<T>) -> u64 {
    2 * count_multiplies(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_checked_two_by_two() {
        let a = CsrMatrix::<f64>::from_dense(&[vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap();
        let b = CsrMatrix::<f64>::from_dense(&[vec![4.0, 0.0], vec![5.0, 6.0]]).unwrap();
        let c = oracle_spgemm(&a, &b).unwrap();
        assert_eq!(c.to_dense(), vec![vec![14.0, 12.0], vec![15.0, 18.0]]);
    }

    #[test]
    fn identity_is_neutral() {
        let m = CsrMatrix::<i64>::from_dense(&[vec![0, 2, 0], vec![1, 0, 3], vec![0, 0, 4]]).unwrap();
        let i = CsrMatrix::identity(3);
        assert_eq!(oracle_spgemm(&i, &m).unwrap(), m);
        assert_eq!(oracle_spgemm(&m, &i).unwrap(), m);
    }

    #[test]
    fn cancellation_zero_is_retained() {
        let a = CsrMatrix::<i64>::from_dense(&[vec![1, 1]]).unwrap();
        let b = CsrMatrix::<i64>::from_dense(&[vec![2], vec![-2]]).unwrap();
        let c = oracle_spgemm(&a, &b).unwrap();
        assert_eq!(c.nnz(), 1);
        assert_eq!(c.get(0, 0), Some(0));
    }

    #[test]
    fn dimension_mismatch() {
        let a = CsrMatrix::<f64>::zeros(2, 3);
        assert!(matches!(oracle_spgemm(&a, &a), Err(Error::Dimension(_))));
    }

    #[test]
    fn longest_row() {
        let m = CsrMatrix::<i64>::from_dense(&[vec![1, 1, 1], vec![0, 1, 0], vec![1, 0, 1]]).unwrap();
        assert_eq!(max_row_nnz(&m), 3);
        assert_eq!(max_row_nnz(&CsrMatrix::<i64>::zeros(0, 0)), 0);
    }

    #[test]
    fn sixteen_columns_condense_to_twelve() {
        // 16-column matrix whose longest row holds 12 entries
        let mut rows = vec![vec![0i64; 16]; 4];
        for c in 0..12 {
            rows[1][c + 2] = 1;
        }
        rows[0][0] = 1;
        rows[2][15] = 1;
        rows[3][7] = 1;
        rows[3][9] = 1;
        let m = CsrMatrix::from_dense(&rows).unwrap();
        assert_eq!(m.num_cols(), 16);
        assert_eq!(max_row_nnz(&m), 12);
    }

    #[test]
    fn flop_counts() {
        let i = CsrMatrix::<f64>::identity(4);
        assert_eq!(count_flops(&i, &i), 8);
        let a = CsrMatrix::<f64>::from_triplets(1, 8, vec![(0, 5, 1.0)]).unwrap();
        let b = CsrMatrix::<f64>::from_triplets(8, 8, (0..7).map(|c| (5, c, 1.0)).collect()).unwrap();
        assert_eq!(count_flops(&a, &b), 14);
    }
}
