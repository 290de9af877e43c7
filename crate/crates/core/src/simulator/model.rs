//! Closed-form traffic estimates for merging `N` partial matrices with a
//! `w`-way merger when the merge order is random.
//!
//! After each round of `w` inputs the merged output joins the pool again, so
//! a given product is re-read in round `k` with probability `w / (N − k(w−1))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs to the re-read model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    /// partial matrices to merge
    pub n: u64,
    /// merger way
    pub w: u64,
}

impl AnalysisParams {
    pub fn new(n: u64, w: u64) -> Result<Self> {
        if n < 1 || w < 2 {
            return Err(Error::InvalidParam(format!("need n >= 1 and w >= 2, got n={n} w={w}")));
        }
        Ok(Self { n, w })
    }

    /// Merge rounds, `(N − 1) / (w − 1)`.
    pub fn rounds(&self) -> f64 {
        (self.n - 1) as f64 / (self.w - 1) as f64
    }
}

/// Expected reads of one product, in three precisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RereadEstimate {
    pub rounds: f64,
    /// `w/(w−1) · Σ_{i=1..t} 1/(1/(w−1) + i)`
    pub exact: f64,
    /// `w/(w−1) · H_t`
    pub harmonic: f64,
    /// `w/(w−1) · ln t`
    pub log_form: f64,
    /// extra read-write passes beyond the first round, `log_form − 1`
    pub reread_factor: f64,
}

fn sum_terms(t: f64, shift: f64) -> f64 {
    let whole = t.floor() as u64;
    (1..=whole).map(|i| 1.0 / (shift + i as f64)).sum()
}

/// Expected number of rounds a product takes part in. Zero when everything
/// fits in one round (`N ≤ w`).
pub fn expected_rereads(p: AnalysisParams) -> RereadEstimate {
    let t = p.rounds();
    if p.n <= p.w {
        return RereadEstimate { rounds: t, exact: 0.0, harmonic: 0.0, log_form: 0.0, reread_factor: 0.0 };
    }
    let scale = p.w as f64 / (p.w - 1) as f64;
    let log_form = scale * t.ln();
    RereadEstimate {
        rounds: t,
        exact: scale * sum_terms(t, 1.0 / (p.w - 1) as f64),
        harmonic: scale * sum_terms(t, 0.0),
        log_form,
        reread_factor: (log_form - 1.0).max(0.0),
    }
}

/// DRAM traffic of successive optimizations, in multiples of the product
/// count `M`, assuming final results of `final_ratio · M` elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficSteps {
    /// random merge order over original columns: partial and final results
    pub unoptimized: f64,
    /// condensed columns: partial and final results
    pub condensed_partial: f64,
    /// condensed columns: right matrix read per product, plus the above
    pub condensed_total: f64,
    /// Huffman order leaves no partial traffic: right matrix plus final
    pub scheduled_total: f64,
    /// row buffer removes the hit fraction of right-matrix reads
    pub prefetched_total: f64,
}

pub fn traffic_steps(
    columns: u64,
    condensed_columns: u64,
    w: u64,
    final_ratio: f64,
    hit_rate: f64,
) -> Result<TrafficSteps> {
    if !(0.0..=1.0).contains(&hit_rate) {
        return Err(Error::InvalidParam(format!("hit rate {hit_rate} outside [0, 1]")));
    }
    let raw = expected_rereads(AnalysisParams::new(columns, w)?);
    let unoptimized = raw.reread_factor * 2.0 + final_ratio;
    // few condensed columns: whole rounds, harmonic sum without the log shortcut
    let c = AnalysisParams::new(condensed_columns, w)?;
    let rounds = c.rounds().ceil();
    let passes = if condensed_columns <= w { 1.0 } else { w as f64 / (w - 1) as f64 * sum_terms(rounds, 0.0) };
    let condensed_partial = (passes - 1.0) * 2.0 + final_ratio;
    Ok(TrafficSteps {
        unoptimized,
        condensed_partial,
        condensed_total: 1.0 + condensed_partial,
        scheduled_total: 1.0 + final_ratio,
        prefetched_total: (1.0 - hit_rate) + final_ratio,
    })
}
