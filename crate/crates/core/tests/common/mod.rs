//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sparchsim::matrix::CooElement;
use sparchsim::memory::{BufferConfig, RowPrefetcher};
use sparchsim::mergecore::MergerGeometry;

/// Two-pointer merge, A side first on equal keys.
pub fn two_pointer(a: &[CooElement<i64>], b: &[CooElement<i64>]) -> Vec<(u64, i64, bool)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].key <= b[j].key) {
            out.push((a[i].key, a[i].value, true));
            i += 1;
        } else {
            out.push((b[j].key, b[j].value, false));
            j += 1;
        }
    }
    out
}

pub fn merge_with_sum(a: &[CooElement<i64>], b: &[CooElement<i64>]) -> Vec<CooElement<i64>> {
    let mut out: Vec<CooElement<i64>> = Vec::new();
    for (k, v, _) in two_pointer(a, b) {
        match out.last_mut() {
            Some(l) if l.key == k => l.value += v,
            _ => out.push(CooElement::from_key(k, v)),
        }
    }
    out
}

pub fn sorted_stream(rng: &mut ChaCha8Rng, len: usize, key_space: u64) -> Vec<CooElement<i64>> {
    let mut keys: Vec<u64> = (0..len).map(|_| rng.gen_range(0..key_space)).collect();
    keys.sort_unstable();
    keys.into_iter().map(|k| CooElement::from_key(k, rng.gen_range(-4..=4))).collect()
}

pub fn geometries() -> Vec<MergerGeometry> {
    let mut g = vec![MergerGeometry::flat(1), MergerGeometry::flat(4), MergerGeometry::flat(16)];
    for top in [2, 4] {
        for low in [2, 4] {
            g.push(MergerGeometry::hierarchical(top, low));
        }
    }
    g
}

pub type Trace = Vec<(u32, usize)>;

#[derive(Clone, Copy)]
pub enum Policy {
    Furthest,
    Lru,
    Fifo,
}

/// Naive line-granular cache simulation. Lines of the row being accessed
/// cannot be victims; rows larger than the cache bypass it.
pub fn offline_misses(trace: &Trace, cfg: BufferConfig, policy: Policy) -> u64 {
    let mut cache: Vec<(u32, u32)> = Vec::new(); // front = next victim for Lru/Fifo
    let mut misses = 0u64;
    for (p, &(row, len)) in trace.iter().enumerate() {
        let n = len.div_ceil(cfg.elements_per_line);
        if n > cfg.lines {
            misses += n as u64;
            continue;
        }
        for seg in 0..n as u32 {
            if let Some(i) = cache.iter().position(|&t| t == (row, seg)) {
                if let Policy::Lru = policy {
                    let t = cache.remove(i);
                    cache.push(t);
                }
                continue;
            }
            misses += 1;
            if cache.len() == cfg.lines {
                let victim = match policy {
                    Policy::Lru | Policy::Fifo => cache.iter().position(|t| t.0 != row).unwrap(),
                    Policy::Furthest => {
                        let next = |r: u32| trace[p + 1..].iter().position(|a| a.0 == r).unwrap_or(usize::MAX);
                        let mut best = None;
                        for (i, t) in cache.iter().enumerate() {
                            if t.0 == row {
                                continue;
                            }
                            let d = next(t.0);
                            if best.is_none_or(|(bd, _)| d > bd) {
                                best = Some((d, i));
                            }
                        }
                        best.unwrap().1
                    }
                };
                cache.remove(victim);
            }
            cache.push((row, seg));
        }
    }
    misses
}

pub fn prefetcher_misses(trace: &Trace, cfg: BufferConfig, horizon: usize) -> u64 {
    let mut p = RowPrefetcher::new(cfg);
    p.begin_trace(trace.clone(), horizon);
    while p.step(|_, _| 0).is_some() {}
    p.buffer().miss_lines()
}

pub fn random_trace_case(rng: &mut ChaCha8Rng) -> (Trace, BufferConfig) {
    let cfg =
        BufferConfig { lines: rng.gen_range(1..=12), elements_per_line: rng.gen_range(1..=4), bytes_per_element: 12 };
    let rows = rng.gen_range(2..=30u32);
    let lens: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..=4 * cfg.elements_per_line)).collect();
    let n = rng.gen_range(1..=200);
    let trace = (0..n)
        .map(|_| {
            // skew toward low rows so reuse is common
            let r = rng.gen_range(0..rows).min(rng.gen_range(0..rows));
            (r, lens[r as usize])
        })
        .collect();
    (trace, cfg)
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum internal weight over every plan whose first round has `first`
/// inputs and whose later rounds have exactly `way`.
pub fn exhaustive_min(nodes: Vec<u64>, first: usize, way: usize, memo: &mut HashMap<(Vec<u64>, usize), u64>) -> u64 {
    if nodes.len() <= 1 {
        return 0;
    }
    let mut key = nodes.clone();
    key.sort_unstable();
    if let Some(&v) = memo.get(&(key.clone(), first)) {
        return v;
    }
    let mut best = u64::MAX;
    for pick in combinations(nodes.len(), first) {
        let merged: u64 = pick.iter().map(|&i| nodes[i]).sum();
        let mut rest: Vec<u64> = (0..nodes.len()).filter(|i| !pick.contains(i)).map(|i| nodes[i]).collect();
        rest.push(merged);
        best = best.min(merged + exhaustive_min(rest, way, way, memo));
    }
    memo.insert((key, first), best);
    best
}
