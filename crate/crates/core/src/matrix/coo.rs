use crate::Scalar;

/// Combined `(row << 32) | col` coordinate. Ordering on keys equals
/// lexicographic `(row, col)` ordering.
pub type Key = u64;

#[inline]
pub fn make_key(row: u32, col: u32) -> Key {
    ((row as u64) << 32) | col as u64
}

/// One coordinate-format element as it travels through the merge datapath:
/// a 64-bit coordinate and a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooElement<T> {
    pub key: Key,
    pub value: T,
}

impl<T: Scalar> CooElement<T> {
    #[inline]
    pub fn new(row: u32, col: u32, value: T) -> Self {
        Self { key: make_key(row, col), value }
    }

    #[inline]
    pub fn from_key(key: Key, value: T) -> Self {
        Self { key, value }
    }

    #[inline]
    pub fn row(&self) -> u32 {
        (self.key >> 32) as u32
    }

    #[inline]
    pub fn col(&self) -> u32 {
        self.key as u32
    }
}

/// True when keys are non-decreasing.
pub fn is_sorted_by_key<T>(elems: &[CooElement<T>]) -> bool {
    elems.windows(2).all(|w| w[0].key <= w[1].key)
}
