//! Value types that can flow through the multiplier array and the adders.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, NumAssign, ToPrimitive};

/// Element value type carried by matrices and merge streams.
///
/// Implemented for `f64` (the hardware's double-precision datapath), `f32`,
/// and `i64` for exact integer verification runs.
pub trait Scalar:
    Num + NumAssign + Copy + Debug + Display + PartialOrd + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Whether arithmetic on this type is exact (no rounding).
    const EXACT: bool;

    /// Parses a Matrix Market value token.
    fn parse_value(token: &str) -> Option<Self>;

    /// Relative-tolerance comparison; exact types ignore `rel_tol`.
    fn close_to(self, other: Self, rel_tol: f64) -> bool {
        if Self::EXACT {
            return self == other;
        }
        let (a, b) = match (self.to_f64(), other.to_f64()) {
            (Some(a), Some(b)) => (a, b),
            _ => return false,
        };
        if a == b {
            return true;
        }
        let scale = a.abs().max(b.abs());
        (a - b).abs() <= rel_tol * scale
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn parse_value(token: &str) -> Option<Self> {
        token.parse().ok()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn parse_value(token: &str) -> Option<Self> {
        token.parse().ok()
    }
}

impl Scalar for i64 {
    const EXACT: bool = true;

    fn parse_value(token: &str) -> Option<Self> {
        if let Ok(v) = token.parse::<i64>() {
            return Some(v);
        }
        // integral reals such as "3.0" or "1e2"
        let f: f64 = token.parse().ok()?;
        if f.fract() == 0.0 && f.abs() < 9.0e15 {
            Some(f as i64)
        } else {
            None
        }
    }
}
