//! Frequency-planned pico-cellular downlink under full load.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{capped_rate, LinkOutcome};
use crate::planning::ChannelAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticParams {
    pub eta_sta: f64,
    pub pt_mw: f64,
}

/// Every AP with a served user transmits; a user sees all co-channel
/// transmitters as interference in a band of `W / K` with noise `sigma2 / K`.
pub fn static_rates(
    assignment: &ChannelAssignment,
    served: &[Option<usize>],
    gains: &DMatrix<f64>,
    params: &StaticParams,
    bandwidth_mhz: f64,
    sigma2_mw: f64,
) -> Result<Vec<LinkOutcome>> {
    let n = assignment.channel_of.len();
    if served.len() != n || gains.nrows() != n {
        return Err(Error::invalid(format!(
            "static_rates: {n} APs but {} served entries and {} gain rows",
            served.len(),
            gains.nrows()
        )));
    }
    let k = assignment.k as f64;
    let w = bandwidth_mhz / k;
    let noise = sigma2_mw / k;
    let mut out = Vec::with_capacity(n);
    for (i, user) in served.iter().enumerate() {
        let Some(j) = *user else { continue };
        let signal = gains[(i, j)] * params.pt_mw;
        let interference: f64 = served
            .iter()
            .enumerate()
            .filter(|&(x, s)| x != i && s.is_some() && assignment.co_channel(i, x))
            .map(|(x, _)| gains[(x, j)] * params.pt_mw)
            .sum();
        let sinr = signal / (interference + noise);
        out.push(LinkOutcome {
            ap: i,
            user: j,
            rate_mbps: capped_rate(w, sinr, params.eta_sta),
            sinr,
        });
    }
    Ok(out)
}
