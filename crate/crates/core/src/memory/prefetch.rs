//! Row prefetch buffer with furthest-next-use line replacement.
//!
//! Rows of the right matrix are cut into fixed-size lines tagged
//! `(row, segment)`. Each resident line carries the position of its row's
//! next access in the left-matrix trace, or infinity when that access lies
//! beyond the look-ahead horizon. A miss evicts the line used furthest in the
//! future; equal candidates go to the least recently used, then the lowest
//! slot index. Lines of the row being loaded are never victims.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type LineTag = (u32, u32);

const NEVER: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BufferConfig {
    pub lines: usize,
    pub elements_per_line: usize,
    pub bytes_per_element: u64,
}

impl Default for BufferConfig {
    fn default() -> Self {
        Self { lines: 1024, elements_per_line: 48, bytes_per_element: 12 }
    }
}

impl BufferConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lines == 0 || self.elements_per_line == 0 {
            return Err(Error::InvalidParam("prefetch buffer needs at least one line of one element".into()));
        }
        Ok(())
    }

    pub fn line_bytes(&self) -> u64 {
        self.elements_per_line as u64 * self.bytes_per_element
    }

    pub fn lines_for(&self, row_len: usize) -> usize {
        row_len.div_ceil(self.elements_per_line)
    }

    /// Elements held by segment `seg` of a row of `row_len` elements.
    pub fn segment_len(&self, row_len: usize, seg: usize) -> usize {
        (row_len - seg * self.elements_per_line).min(self.elements_per_line)
    }
}

/// Next access position of the same id within `horizon` positions, per position.
pub fn next_use_distances(trace: &[u32], horizon: usize) -> Vec<Option<usize>> {
    let mut last_seen: HashMap<u32, usize> = HashMap::new();
    let mut out = vec![None; trace.len()];
    for (i, &r) in trace.iter().enumerate().rev() {
        if let Some(&j) = last_seen.get(&r) {
            if j - i <= horizon {
                out[i] = Some(j);
            }
        }
        last_seen.insert(r, i);
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    tag: LineTag,
    next_use: usize,
    last_use: u64,
    ready: u64,
}

type EvictKey = (usize, Reverse<u64>, Reverse<usize>);

/// Outcome of looking up one row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RowAccess {
    pub hit_lines: u64,
    pub miss_lines: u64,
    pub miss_elements: u64,
    pub victims: Vec<LineTag>,
    /// cycle at which every line of the row is on chip
    pub ready: u64,
}

#[derive(Debug, Clone)]
pub struct PrefetchBuffer {
    config: BufferConfig,
    slots: Vec<Option<Slot>>,
    free: Vec<usize>,
    resident: HashMap<LineTag, usize>,
    order: BTreeSet<EvictKey>,
    clock: u64,
    hits: u64,
    misses: u64,
}

impl PrefetchBuffer {
    pub fn new(config: BufferConfig) -> Self {
        Self {
            config,
            slots: vec![None; config.lines],
            free: (0..config.lines).rev().collect(),
            resident: HashMap::new(),
            order: BTreeSet::new(),
            clock: 0,
            hits: 0,
            misses: 0,
        }
    }

    pub fn config(&self) -> &BufferConfig {
        &self.config
    }

    pub fn hit_lines(&self) -> u64 {
        self.hits
    }

    pub fn miss_lines(&self) -> u64 {
        self.misses
    }

    pub fn resident_lines(&self) -> usize {
        self.resident.len()
    }

    pub fn contains(&self, tag: LineTag) -> bool {
        self.resident.contains_key(&tag)
    }

    fn key(idx: usize, s: &Slot) -> EvictKey {
        (s.next_use, Reverse(s.last_use), Reverse(idx))
    }

    /// Looks up every line of `row`. Missing lines are requested through
    /// `fetch(segment, elements)`, which returns their arrival cycle.
    /// `next_use` is the trace position of the row's next access if visible.
    pub fn access_row(
        &mut self,
        row: u32,
        row_len: usize,
        next_use: Option<usize>,
        mut fetch: impl FnMut(u32, usize) -> u64,
    ) -> RowAccess {
        let next = next_use.unwrap_or(NEVER);
        let nlines = self.config.lines_for(row_len);
        let mut out = RowAccess::default();
        // too large to keep: stream through without disturbing the buffer
        if nlines > self.config.lines {
            for seg in 0..nlines {
                let len = self.config.segment_len(row_len, seg);
                out.ready = out.ready.max(fetch(seg as u32, len));
                out.miss_lines += 1;
                out.miss_elements += len as u64;
            }
            self.misses += out.miss_lines;
            return out;
        }
        // lines of this row stay out of the eviction order until it is loaded
        let mut pinned = Vec::with_capacity(nlines);
        for seg in 0..nlines {
            self.clock += 1;
            let tag = (row, seg as u32);
            if let Some(&idx) = self.resident.get(&tag) {
                let slot = self.slots[idx].as_mut().expect("resident slot is occupied");
                self.order.remove(&Self::key(idx, slot));
                slot.next_use = next;
                slot.last_use = self.clock;
                out.ready = out.ready.max(slot.ready);
                pinned.push(idx);
                out.hit_lines += 1;
                continue;
            }
            let idx = match self.free.pop() {
                Some(i) => i,
                None => {
                    let victim = self.order.pop_last().expect("full buffer has lines");
                    let idx = victim.2 .0;
                    let old = self.slots[idx].take().expect("ordered slot is occupied");
                    self.resident.remove(&old.tag);
                    out.victims.push(old.tag);
                    idx
                }
            };
            let len = self.config.segment_len(row_len, seg);
            let ready = fetch(seg as u32, len);
            self.slots[idx] = Some(Slot { tag, next_use: next, last_use: self.clock, ready });
            pinned.push(idx);
            self.resident.insert(tag, idx);
            out.ready = out.ready.max(ready);
            out.miss_lines += 1;
            out.miss_elements += len as u64;
        }
        for idx in pinned {
            let slot = self.slots[idx].as_ref().expect("pinned slot is occupied");
            self.order.insert(Self::key(idx, slot));
        }
        self.hits += out.hit_lines;
        self.misses += out.miss_lines;
        out
    }

    /// Gives resident lines of `row` whose next use was unknown the position
    /// `next_use`, once the look-ahead window reaches it.
    pub fn reveal(&mut self, row: u32, row_len: usize, next_use: usize) {
        for seg in 0..self.config.lines_for(row_len) {
            if let Some(&idx) = self.resident.get(&(row, seg as u32)) {
                let slot = self.slots[idx].as_mut().expect("resident slot is occupied");
                if slot.next_use == NEVER {
                    self.order.remove(&Self::key(idx, slot));
                    slot.next_use = next_use;
                    self.order.insert(Self::key(idx, slot));
                }
            }
        }
    }
}

/// Prefetch buffer driven by a trace of `(row, row_len)` accesses seen
/// through a sliding look-ahead window of `horizon` positions.
#[derive(Debug, Clone)]
pub struct RowPrefetcher {
    buffer: PrefetchBuffer,
    trace: Vec<(u32, usize)>,
    next: Vec<Option<usize>>,
    prev: Vec<Option<usize>>,
    horizon: usize,
    pos: usize,
}

impl RowPrefetcher {
    pub fn new(config: BufferConfig) -> Self {
        Self {
            buffer: PrefetchBuffer::new(config),
            trace: Vec::new(),
            next: Vec::new(),
            prev: Vec::new(),
            horizon: 0,
            pos: 0,
        }
    }

    /// Starts a new trace. Buffer contents carry over.
    pub fn begin_trace(&mut self, trace: Vec<(u32, usize)>, horizon: usize) {
        let rows: Vec<u32> = trace.iter().map(|t| t.0).collect();
        self.next = next_use_distances(&rows, usize::MAX);
        self.prev = vec![None; rows.len()];
        for (i, n) in self.next.iter().enumerate() {
            if let Some(j) = *n {
                self.prev[j] = Some(i);
            }
        }
        self.trace = trace;
        self.horizon = horizon;
        self.pos = 0;
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.trace.len() - self.pos
    }

    pub fn buffer(&self) -> &PrefetchBuffer {
        &self.buffer
    }

    /// Processes the next trace entry; `None` once the trace is exhausted.
    pub fn step(&mut self, fetch: impl FnMut(u32, usize) -> u64) -> Option<RowAccess> {
        let p = self.pos;
        let &(row, len) = self.trace.get(p)?;
        if let Some(q) = p.checked_add(self.horizon).filter(|&q| q < self.trace.len()) {
            if let Some(pp) = self.prev[q] {
                if pp < p {
                    let (r, l) = self.trace[q];
                    self.buffer.reveal(r, l, q);
                }
            }
        }
        let next = self.next[p].filter(|&j| j - p <= self.horizon);
        self.pos += 1;
        Some(self.buffer.access_row(row, len, next, fetch))
    }
}
