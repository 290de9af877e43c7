use crate::matrix::CooElement;
use crate::Scalar;

/// Output of the duplicate-adder slice.
#[derive(Debug, Clone, PartialEq)]
pub struct AdderOutput<T> {
    /// `None` marks a slot nulled by a summation
    pub slots: Vec<Option<CooElement<T>>>,
    /// last element, withheld because the next block may repeat its key
    pub carry: Option<CooElement<T>>,
    pub adds: u64,
}

/// Sums adjacent same-coordinate elements into the later slot and nulls the
/// earlier one. The carry from the previous block is folded in front.
pub fn adder_stage<T: Scalar>(block: &[CooElement<T>], carry: Option<CooElement<T>>) -> AdderOutput<T> {
    let mut slots: Vec<Option<CooElement<T>>> = Vec::with_capacity(block.len() + 1);
    let mut adds = 0;
    let mut prev: Option<CooElement<T>> = carry;
    for &e in block {
        match prev {
            Some(p) if p.key == e.key => {
                slots.push(None);
                adds += 1;
                prev = Some(CooElement::from_key(e.key, p.value + e.value));
            }
            Some(p) => {
                slots.push(Some(p));
                prev = Some(e);
            }
            None => prev = Some(e),
        }
    }
    AdderOutput { slots, carry: prev, adds }
}
