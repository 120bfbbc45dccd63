//! CSMA/CA Wi-Fi: contention graphs, simple sequential inhibition (SSI)
//! sampling of the active AP set, and per-user rates.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::dbm_to_mw;
use crate::error::{Error, Result};
use crate::link::{capped_rate, LinkOutcome};
use crate::planning::ChannelAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WifiParams {
    /// Carrier-sense threshold in dBm. `+inf` disables carrier sensing.
    pub cs_thr_dbm: f64,
    /// Non-overlapping channels.
    pub k_wifi: usize,
    /// Maximum link spectral efficiency, bps/Hz.
    pub eta_wifi: f64,
    pub pt_mw: f64,
}

impl WifiParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_wifi == 0 {
            return Err(Error::invalid("k_wifi must be >= 1"));
        }
        if !(self.eta_wifi > 0.0) || !(self.pt_mw > 0.0) {
            return Err(Error::invalid("eta_wifi and pt_mw must be positive"));
        }
        if self.cs_thr_dbm.is_nan() {
            return Err(Error::invalid("cs_thr_dbm is NaN"));
        }
        Ok(())
    }

    pub fn channel_bandwidth_mhz(&self, total_mhz: f64) -> f64 {
        total_mhz / self.k_wifi as f64
    }
}

/// Co-channel contention domains for one transmission epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentionGraph {
    /// `domain[x]` lists the APs that hear `x` above the threshold and so
    /// defer while `x` transmits. Empty for non-participating APs.
    pub domain: Vec<Vec<usize>>,
    /// APs taking part in contention (those with traffic).
    pub participating: Vec<bool>,
    pub channel_of: Vec<usize>,
    pub k: usize,
}

impl ContentionGraph {
    pub fn ap_count(&self) -> usize {
        self.domain.len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.domain[a].contains(&b) || self.domain[b].contains(&a)
    }

    pub fn edge_count(&self) -> usize {
        let directed: usize = self.domain.iter().map(Vec::len).sum();
        directed / 2
    }
}

/// Builds contention domains from instantaneous AP-to-AP gains.
///
/// AP `i` is in the domain of `x` iff they share a channel, both
/// participate, and `g_ix * pt > CS_thr`. `participating = None` means
/// every AP contends.
pub fn build_contention_graph(
    assignment: &ChannelAssignment,
    ap_gains: &DMatrix<f64>,
    participating: Option<&[bool]>,
    params: &WifiParams,
) -> Result<ContentionGraph> {
    let n = assignment.channel_of.len();
    if ap_gains.shape() != (n, n) {
        return Err(Error::invalid(format!(
            "AP gain matrix is {:?}, expected {n}x{n}",
            ap_gains.shape()
        )));
    }
    let participating: Vec<bool> = match participating {
        Some(p) if p.len() == n => p.to_vec(),
        Some(p) => {
            return Err(Error::invalid(format!(
                "participation mask has {} entries for {n} APs",
                p.len()
            )))
        }
        None => vec![true; n],
    };
    let threshold = dbm_to_mw(params.cs_thr_dbm);
    let mut domain = vec![Vec::new(); n];
    for x in 0..n {
        if !participating[x] {
            continue;
        }
        for i in 0..n {
            if i != x && participating[i] && assignment.co_channel(i, x) && ap_gains[(i, x)] * params.pt_mw > threshold
            {
                domain[x].push(i);
            }
        }
    }
    Ok(ContentionGraph {
        domain,
        participating,
        channel_of: assignment.channel_of.clone(),
        k: assignment.k,
    })
}

/// APs transmitting in one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    pub active: Vec<bool>,
}

impl ActiveSet {
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().enumerate().filter_map(|(i, &a)| a.then_some(i))
    }

    pub fn len(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members on channel `k`.
    pub fn on_channel<'a>(&'a self, graph: &'a ContentionGraph, k: usize) -> impl Iterator<Item = usize> + 'a {
        self.members().filter(move |&i| graph.channel_of[i] == k)
    }

    /// No active AP lies in another active AP's contention domain.
    pub fn is_independent(&self, graph: &ContentionGraph) -> bool {
        self.members().all(|x| graph.domain[x].iter().all(|&i| !self.active[i]))
    }

    /// Every idle participant lies in some active AP's contention domain.
    pub fn is_maximal(&self, graph: &ContentionGraph) -> bool {
        let mut covered = self.active.clone();
        for x in self.members() {
            for &i in &graph.domain[x] {
                covered[i] = true;
            }
        }
        graph.participating.iter().zip(&covered).all(|(&p, &c)| !p || c)
    }
}

/// Simple sequential inhibition: admit participants in uniformly random
/// order, skipping any AP inside the domain of an already admitted one.
pub fn sample_ssi<R: Rng + ?Sized>(graph: &ContentionGraph, rng: &mut R) -> ActiveSet {
    let n = graph.ap_count();
    let mut order: Vec<usize> = (0..n).filter(|&i| graph.participating[i]).collect();
    order.shuffle(rng);
    let mut active = vec![false; n];
    let mut blocked = vec![false; n];
    for x in order {
        if blocked[x] {
            continue;
        }
        active[x] = true;
        for &i in &graph.domain[x] {
            blocked[i] = true;
        }
    }
    ActiveSet { active }
}

/// Rates of the users served by active APs.
///
/// `served[i]` is the user column picked by AP `i` (or `None`), and
/// `gains` is the `[ap, user]` power-gain matrix of the snapshot.
pub fn wifi_rates(
    graph: &ContentionGraph,
    active: &ActiveSet,
    served: &[Option<usize>],
    gains: &DMatrix<f64>,
    params: &WifiParams,
    bandwidth_mhz: f64,
    sigma2_mw: f64,
) -> Result<Vec<LinkOutcome>> {
    let w = params.channel_bandwidth_mhz(bandwidth_mhz);
    let noise = sigma2_mw / params.k_wifi as f64;
    let mut out = Vec::new();
    for i in active.members() {
        let j = served[i].ok_or_else(|| Error::invalid(format!("active AP {i} has no served user")))?;
        let signal = gains[(i, j)] * params.pt_mw;
        let interference: f64 = active
            .on_channel(graph, graph.channel_of[i])
            .filter(|&x| x != i)
            .map(|x| gains[(x, j)] * params.pt_mw)
            .sum();
        let sinr = signal / (interference + noise);
        out.push(LinkOutcome {
            ap: i,
            user: j,
            rate_mbps: capped_rate(w, sinr, params.eta_wifi),
            sinr,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{average_gains, PropagationParams};
    use crate::geometry::{place_aps, ServiceArea};
    use crate::rng::{substream, Purpose};

    fn params(cs: f64) -> WifiParams {
        WifiParams {
            cs_thr_dbm: cs,
            k_wifi: 3,
            eta_wifi: 2.7,
            pt_mw: 100.0,
        }
    }

    fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> ContentionGraph {
        let mut g = DMatrix::zeros(n, n);
        for &(a, b) in edges {
            g[(a, b)] = 1.0;
            g[(b, a)] = 1.0;
        }
        let p = WifiParams {
            cs_thr_dbm: 0.0,
            k_wifi: 1,
            eta_wifi: 2.7,
            pt_mw: 10.0,
        };
        build_contention_graph(&ChannelAssignment::single_channel(n), &g, None, &p).unwrap()
    }

    #[test]
    fn open_environment_is_a_clique_per_channel() {
        let area = ServiceArea::new(100.0, 100.0, 0, 0).unwrap();
        let layout = place_aps(&area, 4, 4).unwrap();
        let prop = PropagationParams {
            l0_db: 37.0,
            alpha: 2.0,
            lw_db: 0.0,
        };
        let avg = average_gains(&layout, &layout.ap_positions, &prop);
        let assignment = ChannelAssignment {
            k: 3,
            channel_of: (0..16).map(|i| i % 3).collect(),
        };
        let g = build_contention_graph(&assignment, &avg, None, &params(-85.0)).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                if a != b {
                    assert_eq!(g.adjacent(a, b), a % 3 == b % 3, "{a} {b}");
                }
            }
        }
        let mut rng = substream(1, 0, 0, Purpose::Contention);
        for _ in 0..50 {
            let s = sample_ssi(&g, &mut rng);
            assert_eq!(s.len(), 3);
            for k in 0..3 {
                assert_eq!(s.on_channel(&g, k).count(), 1);
            }
        }
    }

    #[test]
    fn disabled_threshold_gives_empty_graph() {
        let g = DMatrix::from_element(4, 4, 1.0);
        let graph =
            build_contention_graph(&ChannelAssignment::single_channel(4), &g, None, &params(f64::INFINITY)).unwrap();
        assert_eq!(graph.edge_count(), 0);
        let mut rng = substream(2, 0, 0, Purpose::Contention);
        assert_eq!(sample_ssi(&graph, &mut rng).len(), 4);
    }

    #[test]
    fn different_channels_never_adjacent() {
        let g = DMatrix::from_element(2, 2, 1.0);
        let a = ChannelAssignment {
            k: 2,
            channel_of: vec![0, 1],
        };
        let graph = build_contention_graph(&a, &g, None, &params(-200.0)).unwrap();
        assert!(!graph.adjacent(0, 1));
    }

    #[test]
    fn idle_aps_do_not_contend() {
        let g = graph_from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let mut gains = DMatrix::from_element(3, 3, 1.0);
        gains.fill_diagonal(0.0);
        let p = WifiParams {
            cs_thr_dbm: 0.0,
            k_wifi: 1,
            eta_wifi: 2.7,
            pt_mw: 10.0,
        };
        let graph = build_contention_graph(
            &ChannelAssignment::single_channel(3),
            &gains,
            Some(&[true, false, true]),
            &p,
        )
        .unwrap();
        assert!(graph.domain[1].is_empty());
        assert!(!graph.domain[0].contains(&1));
        let mut rng = substream(3, 0, 0, Purpose::Contention);
        let s = sample_ssi(&graph, &mut rng);
        assert!(!s.active[1]);
        assert_eq!(s.len(), 1);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn ssi_draws_are_independent_and_maximal() {
        let mut rng = substream(4, 0, 0, Purpose::Contention);
        let g = graph_from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]);
        for _ in 0..500 {
            let s = sample_ssi(&g, &mut rng);
            assert!(s.is_independent(&g));
            assert!(s.is_maximal(&g));
        }
    }

    #[test]
    fn single_interference_free_link_hits_the_cap() {
        let graph = graph_from_edges(1, &[]);
        let active = ActiveSet { active: vec![true] };
        let gains = DMatrix::from_element(1, 1, 1e-6);
        let out = wifi_rates(&graph, &active, &[Some(0)], &gains, &params(-85.0), 60.0, 2.484e-10).unwrap();
        assert!((out[0].rate_mbps - 54.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_pair_is_below_zero_db() {
        // two co-channel APs with equal gain to each served user
        let graph = graph_from_edges(2, &[]);
        let active = ActiveSet {
            active: vec![true, true],
        };
        let g = 1e-7;
        let gains = DMatrix::from_element(2, 2, g);
        let sigma2 = 2.484e-10;
        let mut p = params(f64::INFINITY);
        p.k_wifi = 1;
        let out = wifi_rates(&graph, &active, &[Some(0), Some(1)], &gains, &p, 20.0, sigma2).unwrap();
        let expected = 100.0 * g / (100.0 * g + sigma2);
        for o in &out {
            assert!((o.sinr - expected).abs() < 1e-12);
            assert!(o.sinr < 1.0);
            assert!(o.rate_mbps < 20.0);
        }
    }

    #[test]
    fn missing_served_user_is_an_error() {
        let graph = graph_from_edges(1, &[]);
        let active = ActiveSet { active: vec![true] };
        let gains = DMatrix::from_element(1, 1, 1e-6);
        assert!(wifi_rates(&graph, &active, &[None], &gains, &params(-85.0), 60.0, 1e-10).is_err());
    }
}
