//! Two-level comparator array.
//!
//! Each window is cut into `top_n` chunks of `low_n` slots; slots past the
//! end of a short window hold +∞ padding. The top-level array compares chunk
//! tails and its diagonal groups name one chunk pair each. Low-level array
//! `k` merges its pair and keeps only results inside the min-max bound
//! `(e[k-1], e[k]]`, where `e[k]` is the chunk tail emitted by top-level group
//! `k`. Concatenating the bounded outputs yields the merged window.

use crate::matrix::CooElement;
use crate::mergecore::comparator::{boundary_outputs, Pick};
use crate::mergecore::geometry::MergerGeometry;
use crate::Scalar;

/// Total order over padded slots: padding last, then key, then A before B,
/// then position.
type SlotOrd = (bool, u64, u8, usize);

fn ord_a<T>(a: &[CooElement<T>], i: usize) -> SlotOrd {
    match a.get(i) {
        Some(e) => (false, e.key, 0, i),
        None => (true, 0, 0, i),
    }
}

fn ord_b<T>(b: &[CooElement<T>], j: usize) -> SlotOrd {
    match b.get(j) {
        Some(e) => (false, e.key, 1, j),
        None => (true, 0, 1, j),
    }
}

pub(crate) fn hierarchical_select<T: Scalar>(
    a: &[CooElement<T>],
    b: &[CooElement<T>],
    g: &MergerGeometry,
) -> Vec<Pick> {
    let (top, low) = (g.top_n, g.low_n);
    let tail = |chunk: usize| chunk * low + low - 1;
    let top_picks = boundary_outputs(top, top, 2 * top - 1, |i, j| ord_a(a, tail(i)) < ord_b(b, tail(j)));

    let want = g.window_n.min(a.len() + b.len());
    let mut out = Vec::with_capacity(want);
    let mut lower: Option<SlotOrd> = None;
    for (k, pick) in top_picks.into_iter().enumerate() {
        // boundary tile (ia, ib) of group k; index `top` is the padding row/column
        let (ia, ib, upper) = match pick {
            Pick::A(i) => (i, k - i, ord_a(a, tail(i))),
            Pick::B(j) => (k - j, j, ord_b(b, tail(j))),
        };
        let (a0, b0) = (ia * low, ib * low);
        let (la, lb) = (if ia < top { low } else { 0 }, if ib < top { low } else { 0 });
        let low_picks = boundary_outputs(la, lb, la + lb, |i, j| ord_a(a, a0 + i) < ord_b(b, b0 + j));
        for p in low_picks {
            let (o, pick) = match p {
                Pick::A(i) => (ord_a(a, a0 + i), Pick::A(a0 + i)),
                Pick::B(j) => (ord_b(b, b0 + j), Pick::B(b0 + j)),
            };
            if o.0 || lower.is_some_and(|l| o <= l) || o > upper {
                continue;
            }
            out.push(pick);
        }
        lower = Some(upper);
    }
    debug_assert!(out.len() >= want, "hierarchical merge produced {} of {want}", out.len());
    out.truncate(want);
    out
}
