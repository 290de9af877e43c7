//! DRAM channels, the right-matrix row prefetcher and traffic accounting.

mod dram;
mod prefetch;
mod traffic;

pub use dram::{bandwidth_utilization, map_address_to_channel, DramConfig, DramModel};
pub use prefetch::{next_use_distances, BufferConfig, LineTag, PrefetchBuffer, RowAccess, RowPrefetcher};
pub use traffic::{hit_rate, Category, CategoryBytes, Direction, TrafficCounters};
