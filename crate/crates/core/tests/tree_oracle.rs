use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparchsim::matrix::CooElement;
use sparchsim::mergecore::MergerGeometry;
use sparchsim::mergetree::{merge_arrays, merge_arrays_with, MergeKernel};

fn heap_merge(arrays: &[Vec<CooElement<i64>>]) -> Vec<CooElement<i64>> {
    let mut heap = BinaryHeap::new();
    for (i, a) in arrays.iter().enumerate() {
        if let Some(e) = a.first() {
            heap.push(Reverse((e.key, i, 0usize)));
        }
    }
    let mut out: Vec<CooElement<i64>> = Vec::new();
    while let Some(Reverse((key, i, j))) = heap.pop() {
        let v = arrays[i][j].value;
        match out.last_mut() {
            Some(last) if last.key == key => last.value += v,
            _ => out.push(CooElement::from_key(key, v)),
        }
        if let Some(e) = arrays[i].get(j + 1) {
            heap.push(Reverse((e.key, i, j + 1)));
        }
    }
    out.retain(|e| e.value != 0);
    out
}

fn random_array(rng: &mut ChaCha8Rng, universe: u64) -> Vec<CooElement<i64>> {
    let len = rng.gen_range(0..=200usize);
    let mut keys: Vec<u64> = (0..len).map(|_| rng.gen_range(0..universe)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter().map(|k| CooElement::from_key(k, rng.gen_range(-3i64..=4))).filter(|e| e.value != 0).collect()
}

#[test]
fn tree_merge_matches_heap_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let geometries = [
        MergerGeometry::flat(1),
        MergerGeometry::flat(4),
        MergerGeometry::hierarchical(4, 4),
        MergerGeometry::hierarchical(2, 4),
    ];
    for case in 0..500 {
        let k = rng.gen_range(1..=64usize);
        let layers = (usize::BITS - (k - 1).leading_zeros()).max(1) as usize;
        let g = geometries[case % geometries.len()];
        let depth = g.window_n + 1 + rng.gen_range(0..64usize);
        // small universes force many duplicate keys across arrays
        let universe = if case % 2 == 0 { 300 } else { 1 << 40 };
        let arrays: Vec<_> = (0..k).map(|_| random_array(&mut rng, universe)).collect();
        let expected = heap_merge(&arrays);
        let out = merge_arrays(&arrays, layers, depth, g).unwrap();
        let fast = merge_arrays_with(&arrays, layers, depth, g, MergeKernel::TwoPointer).unwrap();
        assert_eq!(fast, out, "kernels disagree in case {case}");
        let mut got = out.merged;
        got.retain(|e| e.value != 0);
        assert_eq!(got, expected, "case {case} k={k} layers={layers} depth={depth}");
        assert!(out.counters.max_occupancy <= depth);
        let total: usize = arrays.iter().map(Vec::len).sum();
        assert!(out.cycles as usize >= expected.len().div_ceil(g.window_n));
        assert!(total == 0 || out.counters.merges > 0);
    }
}
