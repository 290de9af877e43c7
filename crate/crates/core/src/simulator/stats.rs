use serde::{Deserialize, Serialize};

use crate::memory::CategoryBytes;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WriteBytes {
    pub partial: u64,
    #[serde(rename = "final")]
    pub final_: u64,
}

/// Summary of one simulated multiplication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub cycles: u64,
    pub seconds: f64,
    pub gflops: f64,
    pub dram_read_bytes: CategoryBytes,
    pub dram_write_bytes: WriteBytes,
    pub multiplies: u64,
    pub adds: u64,
    pub partial_matrices: usize,
    pub rounds: usize,
    pub hit_rate: Option<f64>,
    pub bandwidth_utilization: f64,
    pub result_nnz: usize,
}

impl SimStats {
    pub fn flops(&self) -> u64 {
        2 * self.multiplies
    }

    pub fn total_dram_bytes(&self) -> u64 {
        self.dram_read_bytes.total() + self.dram_write_bytes.partial + self.dram_write_bytes.final_
    }

    /// Partial results written plus read back.
    pub fn partial_bytes(&self) -> u64 {
        self.dram_read_bytes.partial + self.dram_write_bytes.partial
    }
}

/// Traffic of one merge round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLedger {
    pub output: usize,
    pub inputs: usize,
    pub is_final: bool,
    pub estimated_elements: u64,
    pub output_elements: u64,
    pub partial_read_bytes: u64,
    pub partial_write_bytes: u64,
    pub start_cycle: u64,
    pub end_cycle: u64,
}
