//! Comparator-array merge of two sorted windows.

use crate::error::{Error, Result};
use crate::matrix::{is_sorted_by_key, CooElement};
use crate::mergecore::geometry::MergerGeometry;
use crate::mergecore::hierarchical::hierarchical_select;
use crate::Scalar;

/// Which input a merged slot came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pick {
    A(usize),
    B(usize),
}

/// Outcome of one merge-unit cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeStepResult<T> {
    /// at most `window_n` elements, key-sorted, A-side first on equal keys
    pub committed: Vec<CooElement<T>>,
    pub take_a: usize,
    pub take_b: usize,
}

/// Boundary detection over an `len_a × len_b` tile grid padded with a
/// right column of '<' and a bottom row of '≥'.
///
/// `a_first(i, j)` is the tile comparison: true ('<') when `a[i]` precedes
/// `b[j]`. Group `k` holds the tiles with `i + j == k`; each group has exactly
/// one boundary tile and its output is the `k`-th merged element. Returns
/// the outputs of groups `0..groups`.
pub(crate) fn boundary_outputs(
    len_a: usize,
    len_b: usize,
    groups: usize,
    a_first: impl Fn(usize, usize) -> bool,
) -> Vec<Pick> {
    // '<' tiles; padding column j == len_b is '<', padding row i == len_a is '≥'
    let lt = |i: usize, j: usize| i < len_a && (j == len_b || a_first(i, j));
    let mut out = Vec::with_capacity(groups);
    for k in 0..groups.min(len_a + len_b) {
        let lo = k.saturating_sub(len_b);
        let hi = k.min(len_a);
        let mut found = None;
        for i in lo..=hi {
            let j = k - i;
            let here = lt(i, j);
            // virtual top row is '<', virtual left column is '≥'
            let top_lt = i == 0 || lt(i - 1, j);
            let left_lt = j > 0 && lt(i, j - 1);
            let boundary = if here { !left_lt } else { top_lt };
            if boundary {
                debug_assert!(found.is_none(), "two boundary tiles in group {k}");
                found = Some(if here { Pick::A(i) } else { Pick::B(j) });
                if !cfg!(debug_assertions) {
                    break;
                }
            }
        }
        out.push(found.expect("every diagonal group has a boundary tile"));
    }
    out
}

pub(crate) fn check_windows<T: Scalar>(a: &[CooElement<T>], b: &[CooElement<T>], g: &MergerGeometry) -> Result<()> {
    g.validate()?;
    if a.len() > g.window_n || b.len() > g.window_n {
        return Err(Error::Contract(format!("window lengths {}/{} exceed N = {}", a.len(), b.len(), g.window_n)));
    }
    if !is_sorted_by_key(a) || !is_sorted_by_key(b) {
        return Err(Error::Contract("merge window is not key-sorted".into()));
    }
    Ok(())
}

pub(crate) fn assemble<T: Scalar>(a: &[CooElement<T>], b: &[CooElement<T>], picks: &[Pick]) -> MergeStepResult<T> {
    let mut take_a = 0;
    let mut take_b = 0;
    let committed = picks
        .iter()
        .map(|p| match *p {
            Pick::A(i) => {
                take_a += 1;
                a[i]
            }
            Pick::B(j) => {
                take_b += 1;
                b[j]
            }
        })
        .collect();
    MergeStepResult { committed, take_a, take_b }
}

/// One cycle of the flat `N × N` comparator array: commits the
/// `min(N, |a| + |b|)` smallest elements of the two windows.
///
/// A window shorter than `N` is taken to be the whole rest of its stream.
pub fn merge_step<T: Scalar>(
    win_a: &[CooElement<T>],
    win_b: &[CooElement<T>],
    geometry: &MergerGeometry,
) -> Result<MergeStepResult<T>> {
    check_windows(win_a, win_b, geometry)?;
    let picks = boundary_outputs(win_a.len(), win_b.len(), geometry.window_n, |i, j| win_a[i].key <= win_b[j].key);
    Ok(assemble(win_a, win_b, &picks))
}

/// Same contract as [`merge_step`], computed with the two-level array.
pub fn hierarchical_merge_step<T: Scalar>(
    win_a: &[CooElement<T>],
    win_b: &[CooElement<T>],
    geometry: &MergerGeometry,
) -> Result<MergeStepResult<T>> {
    check_windows(win_a, win_b, geometry)?;
    if !geometry.hierarchical {
        return Err(Error::InvalidParam("geometry is not hierarchical".into()));
    }
    let picks = hierarchical_select(win_a, win_b, geometry);
    Ok(assemble(win_a, win_b, &picks))
}

/// Dispatches on the geometry kind.
pub fn merge_unit_step<T: Scalar>(
    win_a: &[CooElement<T>],
    win_b: &[CooElement<T>],
    geometry: &MergerGeometry,
) -> Result<MergeStepResult<T>> {
    if geometry.hierarchical {
        hierarchical_merge_step(win_a, win_b, geometry)
    } else {
        merge_step(win_a, win_b, geometry)
    }
}
