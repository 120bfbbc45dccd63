use serde::{Deserialize, Serialize};

/// Rate and SINR of one served user in one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkOutcome {
    /// Serving AP.
    pub ap: usize,
    /// Column of the user in the snapshot's channel matrix.
    pub user: usize,
    pub rate_mbps: f64,
    /// Linear SINR.
    pub sinr: f64,
}

/// `min(w log2(1 + sinr), w eta)` in Mbps for a bandwidth in MHz.
pub fn capped_rate(bandwidth_mhz: f64, sinr: f64, eta: f64) -> f64 {
    (bandwidth_mhz * (1.0 + sinr).log2()).min(bandwidth_mhz * eta)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
