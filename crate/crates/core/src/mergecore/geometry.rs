use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of one binary merge unit.
///
/// A flat unit is a single `window_n × window_n` comparator array. A
/// hierarchical unit splits each window into `top_n` chunks of `low_n`
/// elements; a `top_n × top_n` array over chunk tails picks the chunk pairs
/// handed to `2·top_n − 1` low-level `low_n × low_n` arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergerGeometry {
    pub window_n: usize,
    pub top_n: usize,
    pub low_n: usize,
    pub hierarchical: bool,
}

impl MergerGeometry {
    pub fn flat(window_n: usize) -> Self {
        Self { window_n, top_n: 1, low_n: window_n, hierarchical: false }
    }

    pub fn hierarchical(top_n: usize, low_n: usize) -> Self {
        Self { window_n: top_n * low_n, top_n, low_n, hierarchical: true }
    }

    /// Hierarchical split with the largest chunk size not above `sqrt(width)`,
    /// flat when no such split exists.
    pub fn for_width(width: usize) -> Self {
        let low = (2..=width).take_while(|l| l * l <= width).filter(|l| width.is_multiple_of(*l)).max();
        match low {
            Some(low) => Self::hierarchical(width / low, low),
            None => Self::flat(width),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_n == 0 {
            return Err(Error::InvalidParam("merger window must be at least 1".into()));
        }
        if self.hierarchical && (self.top_n * self.low_n != self.window_n || self.top_n == 0) {
            return Err(Error::InvalidParam(format!(
                "hierarchical merger needs window {} == top {} x low {}",
                self.window_n, self.top_n, self.low_n
            )));
        }
        Ok(())
    }

    pub fn comparator_count(&self) -> usize {
        if self.hierarchical {
            (2 * self.top_n - 1) * self.low_n * self.low_n + self.top_n * self.top_n
        } else {
            self.window_n * self.window_n
        }
    }

    /// Stages behind the comparator array: one adder stage plus a
    /// `ceil(log2 N)`-layer shifter in the zero eliminator.
    pub fn pipeline_latency(&self) -> u64 {
        1 + ceil_log2(self.window_n)
    }
}

impl Default for MergerGeometry {
    fn default() -> Self {
        Self::hierarchical(4, 4)
    }
}

pub(crate) fn ceil_log2(n: usize) -> u64 {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_sixteen_wide_four_by_four() {
        let g = MergerGeometry::default();
        assert_eq!((g.window_n, g.top_n, g.low_n), (16, 4, 4));
        assert_eq!(g.comparator_count(), 128);
        assert_eq!(MergerGeometry::flat(16).comparator_count(), 256);
    }

    #[test]
    fn comparator_count_cube_rule() {
        for t in 2usize..=4 {
            let g = MergerGeometry::hierarchical(t * t, t);
            let expected = (2 * t * t - 1) * t * t + t.pow(4);
            assert_eq!(g.comparator_count(), expected);
            assert!(g.comparator_count() < t.pow(6));
        }
    }

    #[test]
    fn width_split() {
        assert_eq!(MergerGeometry::for_width(16), MergerGeometry::hierarchical(4, 4));
        assert_eq!(MergerGeometry::for_width(8), MergerGeometry::hierarchical(4, 2));
        assert_eq!(MergerGeometry::for_width(7), MergerGeometry::flat(7));
        assert_eq!(MergerGeometry::for_width(2), MergerGeometry::flat(2));
    }

    #[test]
    fn log2_ceil() {
        assert_eq!([1, 2, 3, 4, 8, 9, 16].map(ceil_log2), [0, 1, 2, 2, 3, 4, 4]);
    }
}
