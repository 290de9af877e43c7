use serde::{Deserialize, Serialize};

use super::traffic::{Category, Direction, TrafficCounters};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DramConfig {
    pub channels: usize,
    pub bytes_per_cycle: u64,
    pub latency_cycles: u64,
}

impl Default for DramConfig {
    fn default() -> Self {
        Self { channels: 16, bytes_per_cycle: 8, latency_cycles: 64 }
    }
}

impl DramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.bytes_per_cycle == 0 {
            return Err(Error::InvalidParam("dram channels and bytes per cycle must be positive".into()));
        }
        Ok(())
    }

    pub fn aggregate_bytes_per_cycle(&self) -> u64 {
        self.channels as u64 * self.bytes_per_cycle
    }

    pub fn transfer_cycles(&self, bytes: u64) -> u64 {
        bytes.div_ceil(self.bytes_per_cycle)
    }
}

/// Interleaves buffer lines across channels.
pub fn map_address_to_channel(row: u32, segment: u32, channels: usize) -> usize {
    ((row as u64 + segment as u64) % channels as u64) as usize
}

/// Channels serve requests in order; latency overlaps, transfers do not.
#[derive(Debug, Clone)]
pub struct DramModel {
    config: DramConfig,
    free_at: Vec<u64>,
    counters: TrafficCounters,
}

impl DramModel {
    pub fn new(config: DramConfig) -> Self {
        Self { config, free_at: vec![0; config.channels], counters: TrafficCounters::new(config.channels) }
    }

    pub fn config(&self) -> &DramConfig {
        &self.config
    }

    pub fn channels(&self) -> usize {
        self.config.channels
    }

    /// Cycle at which the channel finishes its queued transfers.
    pub fn channel_free_at(&self, channel: usize) -> u64 {
        self.free_at[channel]
    }

    /// Queues a transfer and returns its completion cycle.
    pub fn submit(&mut self, now: u64, channel: usize, bytes: u64, dir: Direction, cat: Category) -> u64 {
        let transfer = self.config.transfer_cycles(bytes);
        let start = now.max(self.free_at[channel]);
        self.free_at[channel] = start + transfer;
        self.counters.channel_busy[channel] += transfer;
        self.counters.record(dir, cat, bytes);
        start + self.config.latency_cycles + transfer
    }

    /// Last cycle any channel is busy.
    pub fn drain_cycle(&self) -> u64 {
        self.free_at.iter().copied().max().unwrap_or(0)
    }

    pub fn counters(&self) -> &TrafficCounters {
        &self.counters
    }

    pub fn counters_mut(&mut self) -> &mut TrafficCounters {
        &mut self.counters
    }

    pub fn into_counters(self) -> TrafficCounters {
        self.counters
    }
}

/// Bytes moved over the peak the channels could have moved in `cycles`.
pub fn bandwidth_utilization(total_bytes: u64, cycles: u64, config: &DramConfig) -> f64 {
    if cycles == 0 {
        return 0.0;
    }
    total_bytes as f64 / (cycles as f64 * config.aggregate_bytes_per_cycle() as f64)
}
