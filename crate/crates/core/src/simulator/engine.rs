//! Cycle loop binding column fetch, row prefetch, multipliers, the merge
//! tree and the partial-result writer.
//!
//! Each plan round binds its inputs to leaf ports: fresh (condensed) columns
//! are fed by the multipliers, stored partial results by a fetcher reading
//! them back from DRAM. The round's root output goes to DRAM as a partial
//! result, or as the final CSR matrix in the last round. When nothing can
//! move in a cycle, time jumps to the next pending DRAM completion.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use super::config::{AblationFlags, HardwareConfig};
use super::stats::{RoundLedger, SimStats, WriteBytes};
use crate::error::{Error, Result};
use crate::matrix::{make_key, max_row_nnz, CooElement, CsrMatrix};
use crate::memory::{bandwidth_utilization, map_address_to_channel, Category, Direction, DramModel, RowPrefetcher};
use crate::mergetree::MergeTree;
use crate::scheduler::{column_leaf_weights, leaf_weights, MergePlan, NodeId};
use crate::Scalar;

/// Bytes of a stored (row, col, value) partial-result element.
pub const PARTIAL_ELEMENT_BYTES: u64 = 16;
/// Bytes of a CSR element (column index and value).
pub const CSR_ELEMENT_BYTES: u64 = 12;

const LEFT_BATCH: usize = 32;
const PARTIAL_CHUNK: usize = 16;
const PARTIAL_STAGING: usize = 256;
const WRITE_CHUNK: usize = 32;
const INDEX_CHUNK: u64 = 256;

#[derive(Debug, Clone, Copy)]
struct LeafEntry<T> {
    row: u32,
    a: T,
    bcol: u32,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct SimReport<T> {
    pub result: CsrMatrix<T>,
    pub stats: SimStats,
    pub plan: MergePlan,
    pub rounds: Vec<RoundLedger>,
}

/// Multiplies `a × b` on the modeled accelerator.
pub fn simulate<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    hw: &HardwareConfig,
    flags: &AblationFlags,
) -> Result<(CsrMatrix<T>, SimStats)> {
    let report = simulate_report(a, b, hw, flags)?;
    Ok((report.result, report.stats))
}

/// The merge plan `simulate` would follow.
pub fn build_plan<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    hw: &HardwareConfig,
    flags: &AblationFlags,
) -> Result<MergePlan> {
    hw.validate()?;
    let weights = if flags.condensing {
        leaf_weights(a, b)?
    } else {
        column_leaf_weights(a, b)?.into_iter().map(|(_, w)| w).collect()
    };
    Ok(flags.schedule.plan(&weights, hw.merge_way(), flags.seed))
}

/// Like [`simulate`], also returning the plan and per-round ledger.
pub fn simulate_report<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    hw: &HardwareConfig,
    flags: &AblationFlags,
) -> Result<SimReport<T>> {
    let plan = build_plan(a, b, hw, flags)?;
    let leaves = build_leaves(a, flags.condensing);
    execute(a, b, hw, flags, &leaves, plan)
}

/// Runs a given plan over the condensed columns of `a` and returns the
/// per-round traffic ledger.
pub fn run_plan<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    hw: &HardwareConfig,
    plan: &MergePlan,
) -> Result<Vec<RoundLedger>> {
    hw.validate()?;
    if plan.num_leaves() != max_row_nnz(a) {
        return Err(Error::Plan(format!(
            "plan has {} leaves but the left matrix has {} condensed columns",
            plan.num_leaves(),
            max_row_nnz(a)
        )));
    }
    let leaves = build_leaves(a, true);
    let flags = AblationFlags::default();
    Ok(execute(a, b, hw, &flags, &leaves, plan.clone())?.rounds)
}

/// One entry list per partial matrix: condensed columns, or the non-empty
/// original columns in ascending order. Entries are sorted by row.
fn build_leaves<T: Scalar>(a: &CsrMatrix<T>, condensing: bool) -> Vec<Vec<LeafEntry<T>>> {
    let mut leaves: Vec<Vec<LeafEntry<T>>> = Vec::new();
    if condensing {
        for r in 0..a.num_rows() {
            let (cols, vals) = a.row(r);
            if cols.len() > leaves.len() {
                leaves.resize_with(cols.len(), Vec::new);
            }
            for (j, (&c, &v)) in cols.iter().zip(vals).enumerate() {
                leaves[j].push(LeafEntry { row: r as u32, a: v, bcol: c });
            }
        }
    } else {
        for (c, list) in a.column_lists().into_iter().enumerate() {
            if !list.is_empty() {
                leaves.push(list.into_iter().map(|(row, v)| LeafEntry { row, a: v, bcol: c as u32 }).collect());
            }
        }
    }
    leaves
}

fn execute<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    hw: &HardwareConfig,
    flags: &AblationFlags,
    leaves: &[Vec<LeafEntry<T>>],
    plan: MergePlan,
) -> Result<SimReport<T>> {
    hw.validate()?;
    if a.num_cols() != b.num_rows() {
        return Err(Error::Dimension(format!(
            "left is {}x{}, right is {}x{}",
            a.num_rows(),
            a.num_cols(),
            b.num_rows(),
            b.num_cols()
        )));
    }
    plan.validate()?;
    if plan.num_leaves() != leaves.len() {
        return Err(Error::Plan(format!("plan has {} leaves, expected {}", plan.num_leaves(), leaves.len())));
    }
    if plan.way > hw.merge_way() {
        return Err(Error::Plan(format!("plan merges {} ways but the tree has {} ports", plan.way, hw.merge_way())));
    }

    let mut rounds: Vec<(Vec<NodeId>, NodeId, u64)> =
        plan.rounds.iter().map(|r| (r.inputs.clone(), r.output, r.weight)).collect();
    if rounds.is_empty() && leaves.len() == 1 {
        rounds.push((vec![0], 0, plan.leaf_weights[0]));
    }

    let mut eng = Engine::new(a, b, hw, flags);
    // row pointers of the right matrix are loaded once
    eng.submit_chunked(4 * (b.num_rows() as u64 + 1), Direction::Read, Category::Right);
    let mut ledger = Vec::with_capacity(rounds.len());
    let mut final_out = Vec::new();
    for (i, (inputs, output, weight)) in rounds.iter().enumerate() {
        let is_final = i + 1 == rounds.len();
        let start = eng.now;
        let before = eng.dram.counters().clone();
        let (out, written_at) = eng.run_round(leaves, inputs, is_final)?;
        let after = eng.dram.counters();
        ledger.push(RoundLedger {
            output: *output,
            inputs: inputs.len(),
            is_final,
            estimated_elements: *weight,
            output_elements: out.len() as u64,
            partial_read_bytes: after.read.partial - before.read.partial,
            partial_write_bytes: after.write.partial - before.write.partial,
            start_cycle: start,
            end_cycle: eng.now,
        });
        if is_final {
            final_out = out;
        } else {
            eng.stored.insert(*output, (out, written_at));
        }
    }

    // row pointers of the final CSR matrix
    let index_bytes = 4 * (a.num_rows() as u64 + 1);
    eng.submit_chunked(index_bytes, Direction::Write, Category::Final);
    let cycles = eng.now.max(eng.last_completion);

    let result = CsrMatrix::from_sorted_coo(a.num_rows(), b.num_cols(), &final_out)
        .map_err(|e| Error::Contract(format!("final output is not a valid matrix: {e}")))?;
    let mut counters = eng.dram.counters().clone();
    if flags.prefetch {
        counters.hit_lines = eng.prefetcher.buffer().hit_lines();
        counters.miss_lines = eng.prefetcher.buffer().miss_lines();
    } else {
        counters.hit_lines = 0;
        counters.miss_lines = eng.unbuffered_lines;
    }
    let seconds = cycles as f64 / (hw.clock_ghz * 1e9);
    let flops = 2 * eng.multiplies;
    let stats = SimStats {
        cycles,
        seconds,
        gflops: if seconds > 0.0 { flops as f64 / seconds / 1e9 } else { 0.0 },
        dram_read_bytes: counters.read,
        dram_write_bytes: WriteBytes { partial: counters.write.partial, final_: counters.write.final_ },
        multiplies: eng.multiplies,
        adds: eng.adds,
        partial_matrices: leaves.len(),
        rounds: ledger.len(),
        hit_rate: counters.hit_rate(),
        bandwidth_utilization: bandwidth_utilization(counters.total_bytes(), cycles, &hw.dram),
        result_nnz: result.nnz(),
    };
    Ok(SimReport { result, stats, plan, rounds: ledger })
}

struct Pending<T> {
    row: u32,
    a: T,
    bcol: u32,
    ready: u64,
    cursor: usize,
}

enum Source<T> {
    Idle,
    Fresh {
        pending: VecDeque<Pending<T>>,
        /// trace positions of this column not yet handed out
        upcoming: VecDeque<usize>,
    },
    Stored {
        data: Vec<CooElement<T>>,
        written_at: u64,
        issued: usize,
        pushed: usize,
        chunks: VecDeque<(usize, u64)>,
    },
}

struct Engine<'a, T> {
    a: &'a CsrMatrix<T>,
    b: &'a CsrMatrix<T>,
    hw: &'a HardwareConfig,
    flags: &'a AblationFlags,
    now: u64,
    last_completion: u64,
    dram: DramModel,
    prefetcher: RowPrefetcher,
    stored: HashMap<NodeId, (Vec<CooElement<T>>, u64)>,
    multiplies: u64,
    adds: u64,
    unbuffered_lines: u64,
    next_channel: usize,
}

impl<'a, T: Scalar> Engine<'a, T> {
    fn new(a: &'a CsrMatrix<T>, b: &'a CsrMatrix<T>, hw: &'a HardwareConfig, flags: &'a AblationFlags) -> Self {
        Self {
            a,
            b,
            hw,
            flags,
            now: 0,
            last_completion: 0,
            dram: DramModel::new(hw.dram),
            prefetcher: RowPrefetcher::new(hw.buffer),
            stored: HashMap::new(),
            multiplies: 0,
            adds: 0,
            unbuffered_lines: 0,
            next_channel: 0,
        }
    }

    fn channel(&mut self) -> usize {
        let ch = self.next_channel % self.hw.dram.channels;
        self.next_channel = (ch + 1) % self.hw.dram.channels;
        ch
    }

    fn submit(&mut self, channel: usize, bytes: u64, dir: Direction, cat: Category) -> u64 {
        let done = self.dram.submit(self.now, channel, bytes, dir, cat);
        self.last_completion = self.last_completion.max(done);
        done
    }

    /// Splits a contiguous transfer round-robin over channels.
    fn submit_chunked(&mut self, bytes: u64, dir: Direction, cat: Category) -> u64 {
        let mut left = bytes;
        let mut done = self.now;
        while left > 0 {
            let k = left.min(INDEX_CHUNK);
            let ch = self.channel();
            done = done.max(self.submit(ch, k, dir, cat));
            left -= k;
        }
        done
    }

    /// Brings one right-matrix row on chip; returns when all of it is there.
    fn fetch_row(&mut self, bcol: u32, row_len: usize) -> u64 {
        let now = self.now;
        let channels = self.hw.dram.channels;
        let elem = self.hw.buffer.bytes_per_element;
        let dram = &mut self.dram;
        let mut last = now;
        if self.flags.prefetch {
            let acc = self
                .prefetcher
                .step(|seg, len| {
                    let ch = map_address_to_channel(bcol, seg, channels);
                    dram.submit(now, ch, len as u64 * elem, Direction::Read, Category::Right)
                })
                .expect("prefetch trace mirrors the fetch order");
            last = last.max(acc.ready);
        } else {
            let cfg = self.hw.buffer;
            for seg in 0..cfg.lines_for(row_len) {
                let len = cfg.segment_len(row_len, seg);
                let ch = map_address_to_channel(bcol, seg as u32, channels);
                last = last.max(dram.submit(now, ch, len as u64 * elem, Direction::Read, Category::Right));
                self.unbuffered_lines += 1;
            }
        }
        self.last_completion = self.last_completion.max(last);
        last
    }

    /// Returns the round's root output and the cycle its last DRAM write lands.
    fn run_round(
        &mut self,
        leaves: &[Vec<LeafEntry<T>>],
        inputs: &[NodeId],
        is_final: bool,
    ) -> Result<(Vec<CooElement<T>>, u64)> {
        let hw = self.hw;
        let b = self.b;
        let n = hw.geometry.window_n;
        let channels = hw.dram.channels;
        let mut tree: MergeTree<T> =
            MergeTree::new(hw.tree_layers, hw.fifo_depth, hw.geometry)?.with_kernel(hw.merge_kernel);
        let ports = tree.leaf_ports();
        if inputs.len() > ports {
            return Err(Error::Plan(format!("round has {} inputs for {ports} ports", inputs.len())));
        }

        let mut sources: Vec<Source<T>> = (0..ports).map(|_| Source::Idle).collect();
        let mut trace: Vec<(u32, u32, u32, T)> = Vec::new();
        let mut fresh_cols = 0u64;
        for (port, &id) in inputs.iter().enumerate() {
            if id < leaves.len() {
                let entries = &leaves[id];
                trace.extend(entries.iter().map(|e| (e.row, port as u32, e.bcol, e.a)));
                sources[port] =
                    Source::Fresh { pending: VecDeque::new(), upcoming: VecDeque::with_capacity(entries.len()) };
                fresh_cols += 1;
            } else {
                let (data, written_at) =
                    self.stored.remove(&id).ok_or_else(|| Error::Plan(format!("node {id} read before it exists")))?;
                sources[port] = Source::Stored { data, written_at, issued: 0, pushed: 0, chunks: VecDeque::new() };
            }
        }
        // left matrix is streamed row by row across the round's columns
        trace.sort_unstable_by_key(|t| (t.0, t.1));
        for (pos, t) in trace.iter().enumerate() {
            if let Source::Fresh { upcoming, .. } = &mut sources[t.1 as usize] {
                upcoming.push_back(pos);
            }
        }

        let mut index_ready = self.now;
        if fresh_cols > 0 {
            let index_bytes = if self.flags.condensing { 4 * (self.a.num_rows() as u64 + 1) } else { 8 * fresh_cols };
            index_ready = self.submit_chunked(index_bytes, Direction::Read, Category::Left);
        }
        // cumulative arrival cycle of each left batch
        let mut left_ready: Vec<u64> = Vec::with_capacity(trace.len().div_ceil(LEFT_BATCH));
        if self.flags.prefetch {
            let rows = trace.iter().map(|t| (t.2, b.row_nnz(t.2 as usize))).collect();
            self.prefetcher.begin_trace(rows, hw.lookahead);
        }

        let (out_bytes, out_cat) =
            if is_final { (CSR_ELEMENT_BYTES, Category::Final) } else { (PARTIAL_ELEMENT_BYTES, Category::Partial) };
        let write_slack = hw.dram.transfer_cycles(WRITE_CHUNK as u64 * out_bytes);
        let mut pf = 0usize;
        let mut consumed = 0usize;
        let mut writer_len = 0usize;
        let mut written_at = self.now;
        let mut out = Vec::new();
        let mut idle = 0u32;
        // extra in-flight allowance granted only to break a window deadlock
        let mut overdraft = 0usize;

        loop {
            let now = self.now;
            let mut progress = false;
            let mut left_wait = None;

            // prefetcher hands left elements and their right rows to ports
            let mut budget = hw.multipliers;
            if pf - consumed < hw.prefetch_window {
                overdraft = 0;
            }
            while budget > 0 && pf < trace.len() && pf - consumed < hw.prefetch_window + overdraft {
                let need = if self.flags.prefetch { pf.saturating_add(hw.lookahead).min(trace.len() - 1) } else { pf };
                while left_ready.len() <= need / LEFT_BATCH {
                    let start = left_ready.len() * LEFT_BATCH;
                    let count = (trace.len() - start).min(LEFT_BATCH) as u64;
                    let ch = self.channel();
                    let done = self.submit(ch, count * CSR_ELEMENT_BYTES, Direction::Read, Category::Left);
                    let prev = left_ready.last().copied().unwrap_or(index_ready);
                    left_ready.push(done.max(prev));
                }
                if left_ready[need / LEFT_BATCH] > now {
                    left_wait = Some(left_ready[need / LEFT_BATCH]);
                    break;
                }
                let (row, port, bcol, aval) = trace[pf];
                let row_len = b.row_nnz(bcol as usize);
                let ready = self.fetch_row(bcol, row_len);
                if let Source::Fresh { pending, upcoming } = &mut sources[port as usize] {
                    upcoming.pop_front();
                    if row_len > 0 {
                        pending.push_back(Pending { row, a: aval, bcol, ready, cursor: 0 });
                    } else {
                        consumed += 1;
                    }
                }
                pf += 1;
                budget -= 1;
                progress = true;
            }

            // stored partial results stream back in
            for (port, src) in sources.iter_mut().enumerate() {
                let Source::Stored { data, written_at: avail, issued, pushed, chunks } = src else {
                    continue;
                };
                if now >= *avail {
                    while *issued < data.len() && *issued - *pushed + PARTIAL_CHUNK <= PARTIAL_STAGING {
                        let end = (*issued + PARTIAL_CHUNK).min(data.len());
                        let ch = self.next_channel % channels;
                        self.next_channel = (ch + 1) % channels;
                        let bytes = (end - *issued) as u64 * PARTIAL_ELEMENT_BYTES;
                        let done = self.dram.submit(now, ch, bytes, Direction::Read, Category::Partial);
                        self.last_completion = self.last_completion.max(done);
                        chunks.push_back((end, done));
                        *issued = end;
                        progress = true;
                    }
                }
                let mut space = tree.leaf_space(port);
                while space > 0 {
                    let Some(&(end, ready)) = chunks.front() else { break };
                    if ready > now {
                        break;
                    }
                    let take = (end - *pushed).min(space);
                    for e in &data[*pushed..*pushed + take] {
                        tree.push_leaf(port, *e);
                    }
                    *pushed += take;
                    space -= take;
                    if *pushed == end {
                        chunks.pop_front();
                    }
                    progress = true;
                }
            }

            // multiplier slots go to the ready streams with the most room
            let mut heap = BinaryHeap::new();
            for (port, src) in sources.iter().enumerate() {
                if let Source::Fresh { pending, .. } = src {
                    let space = tree.leaf_space(port);
                    if space > 0 && pending.front().is_some_and(|h| h.ready <= now) {
                        heap.push((space, Reverse(port)));
                    }
                }
            }
            let mut slots = hw.multipliers;
            while slots > 0 {
                let Some((space, Reverse(port))) = heap.pop() else { break };
                let Source::Fresh { pending, .. } = &mut sources[port] else { unreachable!() };
                let head = pending.front_mut().expect("granted streams have a head");
                let (cols, vals) = b.row(head.bcol as usize);
                tree.push_leaf(port, CooElement::new(head.row, cols[head.cursor], head.a * vals[head.cursor]));
                self.multiplies += 1;
                slots -= 1;
                progress = true;
                head.cursor += 1;
                if head.cursor == cols.len() {
                    pending.pop_front();
                    consumed += 1;
                }
                if space > 1 && pending.front().is_some_and(|h| h.ready <= now) {
                    heap.push((space - 1, Reverse(port)));
                }
            }

            // tell the tree how far each port has progressed
            for (port, src) in sources.iter().enumerate() {
                if tree.port_ended(port) {
                    continue;
                }
                match src {
                    Source::Idle => tree.end_port(port),
                    Source::Fresh { pending, upcoming } => match (pending.front(), upcoming.front()) {
                        (Some(h), _) => {
                            tree.set_leaf_frontier(port, make_key(h.row, b.row(h.bcol as usize).0[h.cursor]))
                        }
                        (None, Some(&q)) => {
                            // the look-ahead FIFO already knows the column's next element
                            let (row, _, bcol, _) = trace[q];
                            let first = b.row(bcol as usize).0.first().copied().unwrap_or(0);
                            tree.set_leaf_frontier(port, make_key(row, first));
                        }
                        (None, None) => tree.end_port(port),
                    },
                    Source::Stored { data, pushed, .. } => match data.get(*pushed) {
                        Some(e) => tree.set_leaf_frontier(port, e.key),
                        None => tree.end_port(port),
                    },
                }
            }

            let before_adds = tree.counters().adds;
            progress |= tree.tick();
            self.adds += tree.counters().adds - before_adds;

            let popped = tree.pop_root(n.min(hw.writer_fifo - writer_len));
            writer_len += popped.len();
            progress |= !popped.is_empty();
            out.extend(popped);

            let drained = tree.is_drained();
            if writer_len >= WRITE_CHUNK || (drained && writer_len > 0) {
                let free = (0..channels)
                    .map(|i| (self.next_channel + i) % channels)
                    .find(|&c| self.dram.channel_free_at(c) <= now + write_slack);
                if let Some(ch) = free {
                    let k = writer_len.min(WRITE_CHUNK);
                    let done = self.submit(ch, k as u64 * out_bytes, Direction::Write, out_cat);
                    self.next_channel = (ch + 1) % channels;
                    written_at = written_at.max(done);
                    writer_len -= k;
                    progress = true;
                }
            }

            if drained && writer_len == 0 {
                self.now += 1;
                break;
            }
            if progress {
                self.now += 1;
                idle = 0;
                continue;
            }

            // nothing moved: skip to the next arrival
            let mut next = left_wait.unwrap_or(u64::MAX);
            for src in &sources {
                match src {
                    Source::Fresh { pending, .. } => {
                        if let Some(h) = pending.front() {
                            if h.ready > now {
                                next = next.min(h.ready);
                            }
                        }
                    }
                    Source::Stored { written_at, chunks, .. } => {
                        if *written_at > now {
                            next = next.min(*written_at);
                        }
                        if let Some(&(_, r)) = chunks.front() {
                            if r > now {
                                next = next.min(r);
                            }
                        }
                    }
                    Source::Idle => {}
                }
            }
            if writer_len > 0 {
                for c in 0..channels {
                    let t = self.dram.channel_free_at(c).saturating_sub(write_slack);
                    if t > now {
                        next = next.min(t);
                    }
                }
            }
            if next != u64::MAX {
                self.now = next;
                idle = 0;
            } else if pf < trace.len() && pf - consumed >= hw.prefetch_window + overdraft {
                // every fetched stream waits on a key beyond the window
                overdraft += hw.multipliers;
                self.now += 1;
            } else {
                idle += 1;
                self.now += 1;
                if idle > 2 {
                    return Err(Error::Stall {
                        cycle: self.now,
                        msg: format!("round stuck with {} of {} left elements fetched", pf, trace.len()),
                    });
                }
            }
        }
        Ok((out, written_at))
    }
}
