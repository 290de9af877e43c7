//! Sparse matrix types, Matrix Market I/O, rMAT synthesis and the reference product.

mod coo;
mod csr;
mod market;
mod reference;
mod rmat;

pub use coo::{is_sorted_by_key, make_key, CooElement, Key};
pub use csr::CsrMatrix;
pub use market::{load_matrix_market, read_matrix_market, write_matrix_market, write_to};
pub use reference::{count_flops, count_multiplies, max_row_nnz, oracle_spgemm};
pub use rmat::{rmat_generate, RmatParams, MAX_RMAT_SCALE};
