//! Cycle-approximate model of an outer-product sparse matrix multiplication
//! accelerator: a streaming comparator-array merger, an on-chip merge tree,
//! matrix condensing, Huffman-ordered merge rounds and a right-matrix row
//! prefetcher, with DRAM traffic accounting and analytical models.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below pick the
//! common instantiations.
//!
//! ```
//! use sparchsim::{simulate, AblationFlags, CsrMatrixI64, HardwareConfig};
//!
//! let a = CsrMatrixI64::from_dense(&[vec![1, 2], vec![3, 4]]).unwrap();
//! let (c, stats) = simulate(&a, &a, &HardwareConfig::default(), &AblationFlags::default()).unwrap();
//! assert_eq!(c.to_dense(), vec![vec![7, 10], vec![15, 22]]);
//! assert_eq!(stats.multiplies, 8);
//! ```

pub mod error;
pub mod matrix;
pub mod memory;
pub mod mergecore;
pub mod mergetree;
mod scalar;
pub mod scheduler;
pub mod simulator;

pub use error::{Error, Result};
pub use matrix::{oracle_spgemm, CooElement, CsrMatrix};
pub use scalar::Scalar;
pub use simulator::{simulate, AblationFlags, HardwareConfig, SimStats};

pub type CsrMatrixF64 = CsrMatrix<f64>;
pub type CsrMatrixF32 = CsrMatrix<f32>;
/// Exact arithmetic for bit-for-bit verification.
pub type CsrMatrixI64 = CsrMatrix<i64>;
pub type CooElementF64 = CooElement<f64>;
pub type SimReportF64 = simulator::SimReport<f64>;
