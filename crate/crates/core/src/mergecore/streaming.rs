use crate::error::Result;
use crate::matrix::CooElement;
use crate::mergecore::adder::adder_stage;
use crate::mergecore::comparator::merge_unit_step;
use crate::mergecore::eliminator::zero_eliminate;
use crate::mergecore::geometry::MergerGeometry;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct StreamingMergeOutput<T> {
    /// strictly increasing keys, duplicates summed
    pub merged: Vec<CooElement<T>>,
    /// merge-unit invocations
    pub steps: u64,
    /// steps plus pipeline fill
    pub cycles: u64,
    pub adds: u64,
}

/// Merges two sorted streams through merge unit, adder slice and zero
/// eliminator, one window per cycle.
pub fn streaming_merge<T: Scalar>(
    a: &[CooElement<T>],
    b: &[CooElement<T>],
    geometry: &MergerGeometry,
) -> Result<StreamingMergeOutput<T>> {
    geometry.validate()?;
    let n = geometry.window_n;
    let (mut pa, mut pb) = (0usize, 0usize);
    let mut carry = None;
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let mut steps = 0u64;
    let mut adds = 0u64;
    while pa < a.len() || pb < b.len() {
        let wa = &a[pa..(pa + n).min(a.len())];
        let wb = &b[pb..(pb + n).min(b.len())];
        let step = merge_unit_step(wa, wb, geometry)?;
        pa += step.take_a;
        pb += step.take_b;
        steps += 1;
        let added = adder_stage(&step.committed, carry);
        adds += added.adds;
        carry = added.carry;
        merged.extend(zero_eliminate(&added.slots, n).0);
    }
    merged.extend(carry);
    let cycles = if steps == 0 { 0 } else { steps + geometry.pipeline_latency() };
    Ok(StreamingMergeOutput { merged, steps, cycles, adds })
}
