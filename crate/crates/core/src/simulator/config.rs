use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::{BufferConfig, DramConfig};
use crate::mergecore::MergerGeometry;
use crate::mergetree::{MergeKernel, MAX_TREE_LAYERS};
use crate::scheduler::Schedule;

/// Accelerator parameters. Defaults follow the reference architecture:
/// a 16-wide hierarchical merger, a 6-layer tree (64 ways), 16 multipliers,
/// a 1024×48 prefetch buffer, an 8192-element look-ahead window and
/// 16 HBM channels at 8 bytes per cycle, clocked at 1 GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareConfig {
    pub geometry: MergerGeometry,
    pub merge_kernel: MergeKernel,
    pub tree_layers: usize,
    pub fifo_depth: usize,
    pub multipliers: usize,
    pub buffer: BufferConfig,
    pub lookahead: usize,
    /// left-matrix elements the prefetcher may run ahead of the multipliers
    pub prefetch_window: usize,
    pub writer_fifo: usize,
    pub column_fetchers: usize,
    pub dram: DramConfig,
    pub clock_ghz: f64,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        Self {
            geometry: MergerGeometry::default(),
            merge_kernel: MergeKernel::TwoPointer,
            tree_layers: 6,
            fifo_depth: 64,
            multipliers: 16,
            buffer: BufferConfig::default(),
            lookahead: 8192,
            prefetch_window: 768,
            writer_fifo: 1024,
            column_fetchers: 64,
            dram: DramConfig::default(),
            clock_ghz: 1.0,
        }
    }
}

impl HardwareConfig {
    /// Leaf ports of the merge tree, i.e. the widest merge the plan may use.
    pub fn merge_way(&self) -> usize {
        1 << self.tree_layers
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParam(m));
        self.geometry.validate()?;
        self.buffer.validate()?;
        self.dram.validate()?;
        if !(1..=MAX_TREE_LAYERS).contains(&self.tree_layers) {
            return bad(format!("tree_layers {} outside 1..={MAX_TREE_LAYERS}", self.tree_layers));
        }
        if self.fifo_depth <= self.geometry.window_n {
            return bad(format!("fifo_depth {} must exceed merger width {}", self.fifo_depth, self.geometry.window_n));
        }
        if self.writer_fifo < self.geometry.window_n {
            return bad(format!("writer_fifo {} smaller than merger width", self.writer_fifo));
        }
        for (name, v) in [
            ("multipliers", self.multipliers),
            ("prefetch_window", self.prefetch_window),
            ("column_fetchers", self.column_fetchers),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if !(self.clock_ghz > 0.0 && self.clock_ghz.is_finite()) {
            return bad(format!("clock_ghz {} must be positive", self.clock_ghz));
        }
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<V: FromStr>(key: &str, value: &str) -> Result<V> {
            value.trim().parse().map_err(|_| Error::InvalidParam(format!("bad value '{value}' for {key}")))
        }
        match key.trim() {
            "merger_width" => self.geometry = MergerGeometry::for_width(num(key, value)?),
            "flat_merger" => {
                if num::<bool>(key, value)? {
                    self.geometry = MergerGeometry::flat(self.geometry.window_n);
                }
            }
            "merge_kernel" => {
                self.merge_kernel = match value.trim() {
                    "comparator_array" => MergeKernel::ComparatorArray,
                    "two_pointer" => MergeKernel::TwoPointer,
                    v => return Err(Error::InvalidParam(format!("unknown merge kernel '{v}'"))),
                }
            }
            "tree_layers" => self.tree_layers = num(key, value)?,
            "fifo_depth" => self.fifo_depth = num(key, value)?,
            "multipliers" => self.multipliers = num(key, value)?,
            "buffer_lines" => self.buffer.lines = num(key, value)?,
            "line_elements" => self.buffer.elements_per_line = num(key, value)?,
            "lookahead" => self.lookahead = num(key, value)?,
            "prefetch_window" => self.prefetch_window = num(key, value)?,
            "writer_fifo" => self.writer_fifo = num(key, value)?,
            "column_fetchers" => self.column_fetchers = num(key, value)?,
            "dram_channels" => self.dram.channels = num(key, value)?,
            "dram_bytes_per_cycle" => self.dram.bytes_per_cycle = num(key, value)?,
            "dram_latency" => self.dram.latency_cycles = num(key, value)?,
            "clock_ghz" => self.clock_ghz = num(key, value)?,
            other => return Err(Error::InvalidParam(format!("unknown hardware key '{other}'"))),
        }
        Ok(())
    }
}

/// Switches for the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationFlags {
    pub condensing: bool,
    pub schedule: Schedule,
    pub prefetch: bool,
    /// seeds the random schedule
    pub seed: u64,
}

impl Default for AblationFlags {
    fn default() -> Self {
        Self { condensing: true, schedule: Schedule::Huffman, prefetch: true, seed: 0 }
    }
}

impl AblationFlags {
    /// Everything off: original columns, random merge order, no buffer reuse.
    pub fn baseline(seed: u64) -> Self {
        Self { condensing: false, schedule: Schedule::Random, prefetch: false, seed }
    }

    /// All 12 combinations of condensing, schedule and prefetch.
    pub fn all_combinations(seed: u64) -> Vec<Self> {
        let mut out = Vec::with_capacity(12);
        for condensing in [true, false] {
            for schedule in Schedule::ALL {
                for prefetch in [true, false] {
                    out.push(Self { condensing, schedule, prefetch, seed });
                }
            }
        }
        out
    }

    /// Applies one flag: `no-condense`, `no-prefetch`, `condense`,
    /// `prefetch` or `schedule=<name>`.
    pub fn apply(&mut self, flag: &str) -> Result<()> {
        match flag.trim() {
            "no-condense" => self.condensing = false,
            "condense" => self.condensing = true,
            "no-prefetch" => self.prefetch = false,
            "prefetch" => self.prefetch = true,
            f => match f.strip_prefix("schedule=") {
                Some(s) => self.schedule = s.parse()?,
                None => return Err(Error::InvalidParam(format!("unknown flag '{f}'"))),
            },
        }
        Ok(())
    }
}

impl fmt::Display for AblationFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}",
            if self.condensing { "condense" } else { "no-condense" },
            self.schedule,
            if self.prefetch { "prefetch" } else { "no-prefetch" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let hw = HardwareConfig::default();
        hw.validate().unwrap();
        assert_eq!(hw.merge_way(), 64);
        assert_eq!(hw.geometry.window_n, 16);
        assert_eq!(hw.dram.aggregate_bytes_per_cycle(), 128);
    }

    #[test]
    fn overrides() {
        let mut hw = HardwareConfig::default();
        hw.set("merger_width", "8").unwrap();
        hw.set("line_elements", "60").unwrap();
        hw.set("tree_layers", "3").unwrap();
        assert_eq!(hw.geometry.window_n, 8);
        assert_eq!(hw.buffer.elements_per_line, 60);
        assert_eq!(hw.merge_way(), 8);
        assert!(hw.set("warp_drive", "1").is_err());
        assert!(hw.set("lookahead", "lots").is_err());
        hw.set("tree_layers", "9").unwrap();
        assert!(hw.validate().is_err());
    }

    #[test]
    fn flags() {
        let combos = AblationFlags::all_combinations(1);
        assert_eq!(combos.len(), 12);
        let mut f = AblationFlags::default();
        f.apply("no-condense").unwrap();
        f.apply("schedule=sequential").unwrap();
        f.apply("no-prefetch").unwrap();
        assert_eq!(f.to_string(), "no-condense/sequential/no-prefetch");
        assert!(f.apply("turbo").is_err());
    }

    #[test]
    fn json_partial_config() {
        let hw: HardwareConfig = serde_json::from_str(r#"{"tree_layers": 4, "dram": {"channels": 8}}"#).unwrap();
        assert_eq!(hw.tree_layers, 4);
        assert_eq!(hw.dram.channels, 8);
        assert_eq!(hw.dram.bytes_per_cycle, 8);
        assert!(serde_json::from_str::<HardwareConfig>(r#"{"layers": 4}"#).is_err());
    }
}
