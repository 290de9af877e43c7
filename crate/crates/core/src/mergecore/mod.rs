//! Binary streaming merge unit: comparator arrays, duplicate adders and the
//! zero eliminator.

mod adder;
mod comparator;
mod eliminator;
mod geometry;
mod hierarchical;
mod streaming;

pub use adder::{adder_stage, AdderOutput};
pub use comparator::{hierarchical_merge_step, merge_step, merge_unit_step, MergeStepResult};
pub use eliminator::zero_eliminate;
pub use geometry::MergerGeometry;
pub use streaming::{streaming_merge, StreamingMergeOutput};
