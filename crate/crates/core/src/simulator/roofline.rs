use serde::{Deserialize, Serialize};

use super::config::HardwareConfig;
use super::stats::SimStats;
use crate::matrix::CsrMatrix;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roofline {
    /// flops per byte of compulsory traffic (inputs and output read or written once)
    pub intensity: f64,
    pub compute_roof: f64,
    pub memory_roof: f64,
    pub achieved: f64,
}

impl Roofline {
    pub fn bound(&self) -> f64 {
        self.compute_roof.min(self.memory_roof)
    }
}

pub fn compute_roof(hw: &HardwareConfig) -> f64 {
    2.0 * hw.multipliers as f64 * hw.clock_ghz
}

/// Places a finished run under the compute and memory roofs, in GFlop/s.
pub fn roofline<T: Scalar>(
    stats: &SimStats,
    hw: &HardwareConfig,
    a: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    result: &CsrMatrix<T>,
) -> Roofline {
    let bytes = a.csr_bytes() + b.csr_bytes() + result.csr_bytes();
    let intensity = stats.flops() as f64 / bytes as f64;
    let bandwidth = hw.dram.aggregate_bytes_per_cycle() as f64 * hw.clock_ghz;
    Roofline { intensity, compute_roof: compute_roof(hw), memory_roof: intensity * bandwidth, achieved: stats.gflops }
}

/// Intensity from raw counts.
pub fn intensity(flops: u64, input_bytes: u64, output_bytes: u64) -> f64 {
    flops as f64 / (input_bytes + output_bytes) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_compute_roof() {
        assert_eq!(compute_roof(&HardwareConfig::default()), 32.0);
    }

    #[test]
    fn constructed_intensity() {
        assert!((intensity(100, 500, 26) - 0.19).abs() < 0.005);
    }
}
