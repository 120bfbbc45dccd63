//! Frequency assignment and reuse-number search.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Estimate;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelAssignment {
    pub k: usize,
    /// Channel index in `[0, k)` per AP.
    pub channel_of: Vec<usize>,
}

impl ChannelAssignment {
    pub fn single_channel(n_ap: usize) -> Self {
        ChannelAssignment {
            k: 1,
            channel_of: vec![0; n_ap],
        }
    }

    pub fn co_channel(&self, a: usize, b: usize) -> bool {
        self.channel_of[a] == self.channel_of[b]
    }
}

/// Greedy minimum-interference channel assignment.
///
/// APs are visited in uniformly random order; each takes the channel with
/// the least aggregate average interference `sum pt * L_ij` from APs
/// already placed on it, lowest channel index on ties. `avg_gains` is the
/// AP-to-AP average gain matrix (no fading).
pub fn assign_channels<R: Rng + ?Sized>(
    avg_gains: &DMatrix<f64>,
    k: usize,
    pt_mw: f64,
    rng: &mut R,
) -> Result<ChannelAssignment> {
    if k == 0 {
        return Err(Error::invalid("channel count must be >= 1"));
    }
    let n = avg_gains.nrows();
    if avg_gains.ncols() != n {
        return Err(Error::invalid("AP gain matrix must be square"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut channel_of = vec![usize::MAX; n];
    let mut load = vec![0.0f64; k];
    for &i in &order {
        load.iter_mut().for_each(|v| *v = 0.0);
        for (j, &c) in channel_of.iter().enumerate() {
            if c != usize::MAX {
                load[c] += pt_mw * avg_gains[(i, j)];
            }
        }
        let mut best = 0;
        for c in 1..k {
            if load[c] < load[best] {
                best = c;
            }
        }
        channel_of[i] = best;
    }
    Ok(ChannelAssignment { k, channel_of })
}

/// Outcome of evaluating one reuse number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReuseRecord {
    pub k: usize,
    /// Area throughput, Mbps/km^2.
    pub throughput: Estimate,
    pub outage: Estimate,
}

impl ReuseRecord {
    /// Outage constraint, judged on the upper confidence bound.
    pub fn meets_outage(&self, beta: f64) -> bool {
        self.outage.upper < beta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseSearchResult {
    /// `None` when no evaluated reuse number met the outage constraint.
    pub k_star: Option<usize>,
    pub records: Vec<ReuseRecord>,
}

impl ReuseSearchResult {
    pub fn best(&self) -> Option<&ReuseRecord> {
        let k = self.k_star?;
        self.records.iter().find(|r| r.k == k)
    }
}

/// Lowest reuse number among `records` that meets the outage constraint.
pub fn select_k_star(records: Vec<ReuseRecord>, beta: f64) -> ReuseSearchResult {
    let k_star = records.iter().filter(|r| r.meets_outage(beta)).map(|r| r.k).min();
    ReuseSearchResult { k_star, records }
}

/// Evaluates every `K = 1..=min(k_max, n_ap)` with `evaluate` (called once
/// with the whole list so implementations can share snapshots) and keeps the
/// smallest feasible one.
pub fn search_k_star<F>(n_ap: usize, k_max: usize, beta: f64, evaluate: F) -> Result<ReuseSearchResult>
where
    F: FnOnce(&[usize]) -> Result<Vec<ReuseRecord>>,
{
    if k_max == 0 {
        return Err(Error::invalid("k_max must be >= 1"));
    }
    let ks: Vec<usize> = (1..=k_max.min(n_ap.max(1))).collect();
    let records = evaluate(&ks)?;
    if records.len() != ks.len() {
        return Err(Error::invalid(format!(
            "reuse evaluator returned {} records for {} reuse numbers",
            records.len(),
            ks.len()
        )));
    }
    Ok(select_k_star(records, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    fn gains(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                1.0 / (1.0 + (i as f64 - j as f64).powi(2))
            }
        })
    }

    #[test]
    fn single_channel_puts_everyone_on_zero() {
        let mut rng = substream(1, 0, 0, Purpose::Assignment);
        let a = assign_channels(&gains(7), 1, 100.0, &mut rng).unwrap();
        assert!(a.channel_of.iter().all(|&c| c == 0));
    }

    #[test]
    fn enough_channels_means_no_sharing() {
        for seed in 0..20 {
            let mut rng = substream(seed, 0, 0, Purpose::Assignment);
            let a = assign_channels(&gains(5), 5, 100.0, &mut rng).unwrap();
            let mut seen = a.channel_of.clone();
            seen.sort_unstable();
            assert_eq!(seen, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn two_aps_two_channels_never_share() {
        for seed in 0..20 {
            let mut rng = substream(seed, 0, 0, Purpose::Assignment);
            let a = assign_channels(&gains(2), 2, 100.0, &mut rng).unwrap();
            assert_ne!(a.channel_of[0], a.channel_of[1]);
        }
    }

    #[test]
    fn zero_channels_rejected() {
        let mut rng = substream(1, 0, 0, Purpose::Assignment);
        assert!(assign_channels(&gains(2), 0, 100.0, &mut rng).is_err());
    }

    fn rec(k: usize, upper: f64) -> ReuseRecord {
        let e = Estimate {
            mean: upper / 2.0,
            n: 10,
            halfwidth: upper / 2.0,
            lower: 0.0,
            upper,
        };
        ReuseRecord {
            k,
            throughput: e,
            outage: e,
        }
    }

    #[test]
    fn k_star_is_smallest_feasible() {
        let r = search_k_star(4, 12, 0.05, |ks| {
            assert_eq!(ks, &[1, 2, 3, 4]);
            Ok(vec![rec(1, 0.3), rec(2, 0.04), rec(3, 0.2), rec(4, 0.01)])
        })
        .unwrap();
        assert_eq!(r.k_star, Some(2));
        assert_eq!(r.best().unwrap().k, 2);

        let r = search_k_star(2, 12, 0.05, |_| Ok(vec![rec(1, 0.3), rec(2, 0.2)])).unwrap();
        assert_eq!(r.k_star, None);
    }
}
