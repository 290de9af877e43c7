//! Whole-accelerator simulation, ablation switches and analytical models.

mod config;
mod engine;
mod model;
mod roofline;
mod stats;

pub use config::{AblationFlags, HardwareConfig};
pub use engine::{
    build_plan, run_plan, simulate, simulate_report, SimReport, CSR_ELEMENT_BYTES, PARTIAL_ELEMENT_BYTES,
};
pub use model::{expected_rereads, traffic_steps, AnalysisParams, RereadEstimate, TrafficSteps};
pub use roofline::{compute_roof, intensity, roofline, Roofline};
pub use stats::{RoundLedger, SimStats, WriteBytes};
