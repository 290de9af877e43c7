//! Full binary merge tree with one shared merge unit per layer.
//!
//! Nodes are heap-indexed: node 0 is the root FIFO, node `v` has children
//! `2v + 1` and `2v + 2`, and the `2^L` leaf FIFOs are the input ports.
//! Layer `d` owns a single merge unit that, each cycle, serves one of the
//! `2^d` nodes at that depth by merging its two child FIFOs into it.
//!
//! A merge commits only elements that no later arrival can precede. For a
//! child whose window is not followed by more buffered data, the bound is the
//! child's frontier: a lower bound on every key that will still be pushed into
//! it. Leaf frontiers come from the port source; internal frontiers are
//! derived bottom-up each cycle.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CooElement, Key};
use crate::mergecore::{adder_stage, merge_unit_step, zero_eliminate, MergerGeometry};
use crate::Scalar;

/// Frontier of a stream that will receive nothing more.
pub const EXHAUSTED: Key = Key::MAX;

pub const MAX_TREE_LAYERS: usize = 8;

/// How a merge unit computes its committed prefix.
///
/// `ComparatorArray` evaluates the tile grid (flat or hierarchical).
/// `TwoPointer` computes the same prefix with a sequential merge; the two
/// agree exactly, so long simulations may use the cheaper one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeKernel {
    ComparatorArray,
    #[default]
    TwoPointer,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TreeCounters {
    pub merges: u64,
    pub adds: u64,
    pub ticks: u64,
    pub max_occupancy: usize,
}

#[derive(Debug, Clone)]
pub struct MergeTree<T> {
    layers: usize,
    fifo_depth: usize,
    geometry: MergerGeometry,
    kernel: MergeKernel,
    fifos: Vec<VecDeque<CooElement<T>>>,
    /// no further pushes will reach this node
    ended: Vec<bool>,
    carry: Vec<Option<CooElement<T>>>,
    leaf_frontier: Vec<Key>,
    round_robin: Vec<usize>,
    last_pushed: Vec<Option<Key>>,
    counters: TreeCounters,
    // per-tick scratch
    snapshot: Vec<usize>,
    fut: Vec<Key>,
    win_a: Vec<CooElement<T>>,
    win_b: Vec<CooElement<T>>,
    merged: Vec<CooElement<T>>,
}

/// Creates an empty tree with `2^layers` leaf ports.
pub fn build_tree<T: Scalar>(layers: usize, fifo_depth: usize, geometry: MergerGeometry) -> Result<MergeTree<T>> {
    MergeTree::new(layers, fifo_depth, geometry)
}

impl<T: Scalar> MergeTree<T> {
    pub fn new(layers: usize, fifo_depth: usize, geometry: MergerGeometry) -> Result<Self> {
        if !(1..=MAX_TREE_LAYERS).contains(&layers) {
            return Err(Error::InvalidParam(format!("tree layers {layers} outside 1..={MAX_TREE_LAYERS}")));
        }
        geometry.validate()?;
        if fifo_depth <= geometry.window_n {
            return Err(Error::InvalidParam(format!(
                "fifo depth {fifo_depth} must exceed merger window {}",
                geometry.window_n
            )));
        }
        let nodes = (1usize << (layers + 1)) - 1;
        Ok(Self {
            layers,
            fifo_depth,
            geometry,
            kernel: MergeKernel::ComparatorArray,
            fifos: (0..nodes).map(|_| VecDeque::with_capacity(fifo_depth)).collect(),
            ended: vec![false; nodes],
            carry: vec![None; nodes],
            leaf_frontier: vec![0; 1 << layers],
            round_robin: vec![0; layers],
            last_pushed: vec![None; nodes],
            counters: TreeCounters::default(),
            snapshot: vec![0; nodes],
            fut: vec![EXHAUSTED; nodes],
            win_a: Vec::with_capacity(geometry.window_n),
            win_b: Vec::with_capacity(geometry.window_n),
            merged: Vec::with_capacity(geometry.window_n),
        })
    }

    pub fn with_kernel(mut self, kernel: MergeKernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn kernel(&self) -> MergeKernel {
        self.kernel
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn leaf_ports(&self) -> usize {
        1 << self.layers
    }

    pub fn node_count(&self) -> usize {
        self.fifos.len()
    }

    pub fn geometry(&self) -> &MergerGeometry {
        &self.geometry
    }

    pub fn fifo_depth(&self) -> usize {
        self.fifo_depth
    }

    pub fn counters(&self) -> TreeCounters {
        self.counters
    }

    fn leaf_node(&self, port: usize) -> usize {
        (1 << self.layers) - 1 + port
    }

    pub fn occupancy(&self, node: usize) -> usize {
        self.fifos[node].len()
    }

    pub fn leaf_len(&self, port: usize) -> usize {
        self.fifos[self.leaf_node(port)].len()
    }

    pub fn leaf_space(&self, port: usize) -> usize {
        self.fifo_depth - self.leaf_len(port)
    }

    pub fn port_ended(&self, port: usize) -> bool {
        self.ended[self.leaf_node(port)]
    }

    /// Appends to a leaf FIFO. Keys must be strictly increasing per port.
    pub fn push_leaf(&mut self, port: usize, e: CooElement<T>) {
        let node = self.leaf_node(port);
        assert!(!self.ended[node], "push to ended port {port}");
        self.push(node, e);
    }

    /// Lower bound on every key the port will still receive.
    pub fn set_leaf_frontier(&mut self, port: usize, key: Key) {
        self.leaf_frontier[port] = key;
    }

    /// Marks the port's source as exhausted.
    pub fn end_port(&mut self, port: usize) {
        let node = self.leaf_node(port);
        self.ended[node] = true;
        self.leaf_frontier[port] = EXHAUSTED;
    }

    fn push(&mut self, node: usize, e: CooElement<T>) {
        let fifo = &mut self.fifos[node];
        assert!(fifo.len() < self.fifo_depth, "fifo {node} overflow");
        if let Some(prev) = self.last_pushed[node] {
            assert!(prev < e.key, "fifo {node} received key {} after {prev}", e.key);
        }
        self.last_pushed[node] = Some(e.key);
        fifo.push_back(e);
        self.counters.max_occupancy = self.counters.max_occupancy.max(fifo.len());
    }

    pub fn root_len(&self) -> usize {
        self.fifos[0].len()
    }

    pub fn pop_root(&mut self, max: usize) -> Vec<CooElement<T>> {
        let n = max.min(self.fifos[0].len());
        self.fifos[0].drain(..n).collect()
    }

    /// Root has ended and been emptied.
    pub fn is_drained(&self) -> bool {
        self.ended[0] && self.fifos[0].is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.fifos.iter().all(VecDeque::is_empty) && self.carry.iter().all(Option::is_none)
    }

    fn compute_frontiers(&mut self) {
        let first_leaf = (1 << self.layers) - 1;
        let mut fut = std::mem::take(&mut self.fut);
        fut.fill(EXHAUSTED);
        for p in 0..self.leaf_ports() {
            let v = first_leaf + p;
            fut[v] = if self.ended[v] { EXHAUSTED } else { self.leaf_frontier[p] };
        }
        for v in (0..first_leaf).rev() {
            if self.ended[v] {
                continue;
            }
            let mut f = self.carry[v].map_or(EXHAUSTED, |c| c.key);
            for c in [2 * v + 1, 2 * v + 2] {
                let k = self.fifos[c].front().map_or(fut[c], |e| e.key);
                f = f.min(k);
            }
            fut[v] = f;
        }
        self.fut = fut;
    }

    /// Key below which nothing more can arrive from child `c` outside its window.
    fn window_bound(&self, c: usize) -> Key {
        let n = self.geometry.window_n;
        match self.fifos[c].get(n) {
            Some(e) => e.key,
            None => self.fut[c],
        }
    }

    /// Advances one clock. Decisions read start-of-cycle occupancy, so no
    /// FIFO can exceed its depth. Returns whether any merger acted.
    pub fn tick(&mut self) -> bool {
        self.counters.ticks += 1;
        for (s, f) in self.snapshot.iter_mut().zip(&self.fifos) {
            *s = f.len();
        }
        self.compute_frontiers();
        let n = self.geometry.window_n;
        let mut progressed = false;
        for d in 0..self.layers {
            let base = (1usize << d) - 1;
            let width = 1usize << d;
            let start = self.round_robin[d];
            for off in 0..width {
                let slot = (start + off) % width;
                let v = base + slot;
                if self.ended[v] {
                    continue;
                }
                let (c1, c2) = (2 * v + 1, 2 * v + 2);
                let free = self.fifo_depth - self.snapshot[v];
                let children_done =
                    self.ended[c1] && self.ended[c2] && self.fifos[c1].is_empty() && self.fifos[c2].is_empty();
                let acted = if children_done {
                    if self.carry[v].is_some() && free == 0 {
                        false
                    } else {
                        if let Some(c) = self.carry[v].take() {
                            self.push(v, c);
                        }
                        self.ended[v] = true;
                        true
                    }
                } else if free > n {
                    self.try_merge(v)
                } else {
                    false
                };
                if acted {
                    self.round_robin[d] = (slot + 1) % width;
                    progressed = true;
                    break;
                }
            }
        }
        progressed
    }

    fn try_merge(&mut self, v: usize) -> bool {
        let (c1, c2) = (2 * v + 1, 2 * v + 2);
        let smallest = match (self.fifos[c1].front(), self.fifos[c2].front()) {
            (None, None) => return false,
            (a, b) => a.map_or(EXHAUSTED, |e| e.key).min(b.map_or(EXHAUSTED, |e| e.key)),
        };
        let limit = self.window_bound(c1).min(self.window_bound(c2));
        if smallest > limit {
            return false;
        }
        let n = self.geometry.window_n;
        let mut wa = std::mem::take(&mut self.win_a);
        let mut wb = std::mem::take(&mut self.win_b);
        let mut merged = std::mem::take(&mut self.merged);
        wa.clear();
        wb.clear();
        wa.extend(self.fifos[c1].iter().take(n).copied());
        wb.extend(self.fifos[c2].iter().take(n).copied());
        let (mut take_a, mut take_b) = match self.kernel {
            MergeKernel::ComparatorArray => {
                let step = merge_unit_step(&wa, &wb, &self.geometry).expect("fifo windows are sorted and bounded");
                merged.clear();
                merged.extend_from_slice(&step.committed);
                (step.take_a, step.take_b)
            }
            MergeKernel::TwoPointer => two_pointer_prefix(&wa, &wb, n, &mut merged),
        };
        if merged.last().is_some_and(|e| e.key > limit) {
            merged.retain(|e| e.key <= limit);
            take_a = wa.iter().filter(|e| e.key <= limit).count();
            take_b = wb.iter().filter(|e| e.key <= limit).count();
        }
        self.fifos[c1].drain(..take_a);
        self.fifos[c2].drain(..take_b);
        let carry_in = self.carry[v].take();
        self.carry[v] = match self.kernel {
            MergeKernel::ComparatorArray => {
                let added = adder_stage(&merged, carry_in);
                self.counters.adds += added.adds;
                for e in zero_eliminate(&added.slots, n).0 {
                    self.push(v, e);
                }
                added.carry
            }
            MergeKernel::TwoPointer => {
                // same sums and survivors as the adder and eliminator stages
                let mut carry = carry_in;
                for &e in &merged {
                    match carry {
                        Some(mut c) if c.key == e.key => {
                            c.value += e.value;
                            self.counters.adds += 1;
                            carry = Some(c);
                        }
                        Some(c) => {
                            self.push(v, c);
                            carry = Some(e);
                        }
                        None => carry = Some(e),
                    }
                }
                carry
            }
        };
        self.win_a = wa;
        self.win_b = wb;
        self.merged = merged;
        self.counters.merges += 1;
        // release the carry once nothing left below can repeat its key
        if let Some(c) = self.carry[v] {
            let next = [c1, c2]
                .into_iter()
                .map(|x| self.fifos[x].front().map_or(self.fut[x], |e| e.key))
                .min()
                .unwrap_or(EXHAUSTED);
            if c.key < next {
                self.push(v, c);
                self.carry[v] = None;
            }
        }
        true
    }
}

/// The `min(n, |a| + |b|)` smallest elements, A first on equal keys.
fn two_pointer_prefix<T: Scalar>(
    a: &[CooElement<T>],
    b: &[CooElement<T>],
    n: usize,
    out: &mut Vec<CooElement<T>>,
) -> (usize, usize) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while out.len() < n && (i < a.len() || j < b.len()) {
        if j == b.len() || (i < a.len() && a[i].key <= b[j].key) {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    (i, j)
}

/// Result of merging a set of arrays through the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeMergeOutput<T> {
    pub merged: Vec<CooElement<T>>,
    pub cycles: u64,
    pub counters: TreeCounters,
}

/// Streams up to `2^layers` sorted arrays through a fresh tree until the
/// root drains. Ports receive up to `window_n` elements per cycle; the root
/// drains up to `window_n` per cycle.
pub fn merge_arrays<T: Scalar>(
    arrays: &[Vec<CooElement<T>>],
    layers: usize,
    fifo_depth: usize,
    geometry: MergerGeometry,
) -> Result<TreeMergeOutput<T>> {
    merge_arrays_with(arrays, layers, fifo_depth, geometry, MergeKernel::ComparatorArray)
}

/// [`merge_arrays`] with an explicit merge kernel.
pub fn merge_arrays_with<T: Scalar>(
    arrays: &[Vec<CooElement<T>>],
    layers: usize,
    fifo_depth: usize,
    geometry: MergerGeometry,
    kernel: MergeKernel,
) -> Result<TreeMergeOutput<T>> {
    let mut tree = MergeTree::new(layers, fifo_depth, geometry)?.with_kernel(kernel);
    if arrays.len() > tree.leaf_ports() {
        return Err(Error::InvalidParam(format!("{} arrays exceed {} leaf ports", arrays.len(), tree.leaf_ports())));
    }
    for (i, arr) in arrays.iter().enumerate() {
        if arr.windows(2).any(|w| w[0].key >= w[1].key) {
            return Err(Error::Contract(format!("input array {i} is not strictly increasing")));
        }
    }
    let n = geometry.window_n;
    let mut cursor = vec![0usize; tree.leaf_ports()];
    let mut merged = Vec::new();
    let mut cycles = 0u64;
    let mut idle = 0u32;
    while !tree.is_drained() {
        let mut moved = false;
        for port in 0..tree.leaf_ports() {
            if tree.port_ended(port) {
                continue;
            }
            let src: &[CooElement<T>] = arrays.get(port).map_or(&[], Vec::as_slice);
            let take = tree.leaf_space(port).min(n).min(src.len() - cursor[port]);
            for e in &src[cursor[port]..cursor[port] + take] {
                tree.push_leaf(port, *e);
            }
            cursor[port] += take;
            moved |= take > 0;
            match src.get(cursor[port]) {
                Some(e) => tree.set_leaf_frontier(port, e.key),
                None => tree.end_port(port),
            }
        }
        moved |= tree.tick();
        let out = tree.pop_root(n);
        moved |= !out.is_empty();
        merged.extend(out);
        cycles += 1;
        idle = if moved { 0 } else { idle + 1 };
        if idle > 2 {
            return Err(Error::Stall { cycle: cycles, msg: "merge tree made no progress".into() });
        }
    }
    let cycles = cycles + layers as u64 * geometry.pipeline_latency();
    Ok(TreeMergeOutput { merged, cycles, counters: tree.counters() })
}
