use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::Scalar;

/// Largest accepted `scale`.
pub const MAX_RMAT_SCALE: u32 = 30;

/// Recursive-matrix generator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmatParams {
    /// log2 of the dimension
    pub scale: u32,
    /// average entries per row before duplicate collapse
    pub edge_factor: u32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub seed: u64,
}

impl RmatParams {
    /// Graph500-style quadrant probabilities (0.57, 0.19, 0.19, 0.05).
    pub fn new(scale: u32, edge_factor: u32, seed: u64) -> Self {
        Self { scale, edge_factor, a: 0.57, b: 0.19, c: 0.19, d: 0.05, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale > MAX_RMAT_SCALE {
            return Err(Error::InvalidParam(format!("rmat scale {} exceeds {MAX_RMAT_SCALE}", self.scale)));
        }
        let probs = [self.a, self.b, self.c, self.d];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParam("rmat probabilities must lie in [0, 1]".into()));
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParam("rmat probabilities must sum to 1".into()));
        }
        Ok(())
    }
}

/// Samples a `2^scale` square matrix by recursive quadrant descent.
///
/// Duplicate coordinates collapse to the first draw; values are uniform over
/// `{1, 2, 3, 4}` so products and sums stay exact.
pub fn rmat_generate<T: Scalar>(p: &RmatParams) -> Result<CsrMatrix<T>> {
    p.validate()?;
    let n = 1usize << p.scale;
    let edges = n * p.edge_factor as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (ab, abc) = (p.a + p.b, p.a + p.b + p.c);
    let mut trip: Vec<(u32, u32, u8)> = Vec::with_capacity(edges);
    for _ in 0..edges {
        let (mut r, mut c) = (0u32, 0u32);
        for level in (0..p.scale).rev() {
            let u: f64 = rng.gen();
            let bit = 1u32 << level;
            if u < p.a {
            } else if u < ab {
                c |= bit;
            } else if u < abc {
                r |= bit;
            } else {
                r |= bit;
                c |= bit;
            }
        }
        trip.push((r, c, rng.gen_range(1..=4)));
    }
    // stable sort keeps the first draw of a coordinate in front
    trip.sort_by_key(|&(r, c, _)| (r, c));
    trip.dedup_by_key(|t| (t.0, t.1));
    let trip = trip.into_iter().map(|(r, c, v)| (r, c, T::from_u8(v).expect("small integers convert"))).collect();
    CsrMatrix::from_triplets(n, n, trip)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_zero_is_one_by_one() {
        let m: CsrMatrix<f64> = rmat_generate(&RmatParams::new(0, 1, 3)).unwrap();
        assert_eq!((m.num_rows(), m.num_cols()), (1, 1));
        assert!(m.nnz() <= 1);
    }

    #[test]
    fn deterministic_for_seed() {
        let p = RmatParams::new(10, 8, 1);
        let a: CsrMatrix<f64> = rmat_generate(&p).unwrap();
        let b: CsrMatrix<f64> = rmat_generate(&p).unwrap();
        assert_eq!(a, b);
        let c: CsrMatrix<f64> = rmat_generate(&RmatParams { seed: 2, ..p }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn density_in_sparse_band() {
        let m: CsrMatrix<f64> = rmat_generate(&RmatParams::new(14, 8, 7)).unwrap();
        let n = m.num_rows() as f64;
        let density = m.nnz() as f64 / (n * n);
        assert!(m.nnz() <= (1 << 14) * 8);
        assert!((5e-5..=6e-3).contains(&density), "density {density}");
    }

    #[test]
    fn values_are_small_integers() {
        let m: CsrMatrix<f64> = rmat_generate(&RmatParams::new(8, 4, 9)).unwrap();
        assert!(m.values().iter().all(|v| [1.0, 2.0, 3.0, 4.0].contains(v)));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(rmat_generate::<f64>(&RmatParams::new(31, 1, 0)).is_err());
        let p = RmatParams { a: 0.5, ..RmatParams::new(4, 1, 0) };
        assert!(rmat_generate::<f64>(&p).is_err());
    }
}
