use crate::matrix::CooElement;
use crate::mergecore::geometry::ceil_log2;
use crate::Scalar;

/// Stable compaction of null-marked slots.
///
/// A prefix sum gives each slot the number of nulls before it; layer `b` of
/// the shifter then moves every slot whose count has bit `b` set left by
/// `2^b`. Latency is one cycle per layer, `ceil(log2 n)` for width `n`.
/// Values that are numerically zero but not null-marked survive.
pub fn zero_eliminate<T: Scalar>(block: &[Option<CooElement<T>>], n: usize) -> (Vec<CooElement<T>>, u64) {
    let layers = ceil_log2(n.max(block.len()));
    let mut zero_count = 0usize;
    let mut lanes: Vec<Option<(CooElement<T>, usize)>> = block
        .iter()
        .map(|slot| match slot {
            Some(e) => Some((*e, zero_count)),
            None => {
                zero_count += 1;
                None
            }
        })
        .collect();
    for layer in 0..layers {
        let shift = 1usize << layer;
        let mut next = vec![None; lanes.len()];
        for (pos, lane) in lanes.iter().enumerate() {
            if let Some((e, count)) = *lane {
                let dst = if count & shift != 0 { pos - shift } else { pos };
                debug_assert!(next[dst].is_none(), "shifter collision at lane {dst}");
                next[dst] = Some((e, count));
            }
        }
        lanes = next;
    }
    let survivors = block.len() - zero_count;
    let out = lanes[..survivors].iter().map(|l| l.expect("compacted prefix is dense").0).collect();
    (out, ceil_log2(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_nulls() {
        let a = CooElement::from_key(1, 1.0);
        let b = CooElement::from_key(2, 0.0);
        let (out, lat) = zero_eliminate(&[Some(a), None, Some(b), None], 4);
        assert_eq!(out, vec![a, b]);
        assert_eq!(lat, 2);
    }

    #[test]
    fn all_null() {
        let block: Vec<Option<CooElement<f64>>> = vec![None; 16];
        let (out, lat) = zero_eliminate(&block, 16);
        assert!(out.is_empty());
        assert_eq!(lat, 4);
    }

    #[test]
    fn latency_is_log_n() {
        for (n, lat) in [(2, 1), (4, 2), (8, 3), (16, 4)] {
            let block: Vec<Option<CooElement<f64>>> = Vec::new();
            assert_eq!(zero_eliminate(&block, n).1, lat);
        }
    }
}
