//! Slow, independent reference computations used to cross-check the
//! simulator: exhaustive and grid-search versions of the fast paths.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;

use crate::channel::{complex_gaussian, dbm_to_mw, mw_to_dbm, path_loss_db, thermal_noise_mw, PropagationParams};
use crate::error::Result;
use crate::geometry::{wall_crossings, Point, ServiceArea};
use crate::link::capped_rate;
use crate::rng::{substream, Purpose};
use crate::wifi::{sample_ssi, ContentionGraph};
use crate::zf::{allocate_power_weights, build_beamformer, identity_residual, power_cap, sum_rate};

/// Wall count by intersecting the segment with every wall line separately.
pub fn brute_force_crossings(area: &ServiceArea, p: &Point, q: &Point) -> usize {
    let mut count = 0;
    let hits = |a: f64, b: f64, c: f64| {
        if a == b {
            return false;
        }
        let t = (c - a) / (b - a);
        t > 0.0 && t < 1.0
    };
    for i in 1..=area.wx {
        let c = area.lx * i as f64 / (area.wx + 1) as f64;
        if hits(p.x, q.x, c) {
            count += 1;
        }
    }
    for i in 1..=area.wy {
        let c = area.ly * i as f64 / (area.wy + 1) as f64;
        if hits(p.y, q.y, c) {
            count += 1;
        }
    }
    count
}

/// Single-channel contention graph from an undirected edge list.
pub fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> ContentionGraph {
    let mut domain = vec![Vec::new(); n];
    for &(a, b) in edges {
        domain[a].push(b);
        domain[b].push(a);
    }
    ContentionGraph {
        domain,
        participating: vec![true; n],
        channel_of: vec![0; n],
        k: 1,
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Exact distribution of the sequential-inhibition active set, by running
/// the admission rule on every ordering. Keys are sorted member lists.
pub fn ssi_exact_distribution(graph: &ContentionGraph) -> BTreeMap<Vec<usize>, f64> {
    let parts: Vec<usize> = (0..graph.ap_count()).filter(|&i| graph.participating[i]).collect();
    let perms = permutations(&parts);
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for order in &perms {
        let mut chosen: Vec<usize> = Vec::new();
        for &x in order {
            if chosen.iter().all(|&c| !graph.adjacent(c, x)) {
                chosen.push(x);
            }
        }
        chosen.sort_unstable();
        *counts.entry(chosen).or_default() += 1;
    }
    let total = perms.len() as f64;
    counts.into_iter().map(|(k, c)| (k, c as f64 / total)).collect()
}

/// Empirical active-set frequencies from the sampler, keyed like
/// [`ssi_exact_distribution`].
pub fn ssi_empirical_distribution<R: Rng>(
    graph: &ContentionGraph,
    draws: usize,
    rng: &mut R,
) -> BTreeMap<Vec<usize>, f64> {
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..draws {
        let set = sample_ssi(graph, rng);
        *counts.entry(set.members().collect()).or_default() += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / draws as f64)).collect()
}

/// Best sum rate over a `steps` x `steps` grid covering the feasible box of
/// a two-user power allocation.
pub fn papc_grid_search(
    weights: &DMatrix<f64>,
    sigma2_mw: f64,
    pt_mw: f64,
    bandwidth_mhz: f64,
    eta: f64,
    steps: usize,
) -> (f64, [f64; 2]) {
    assert_eq!(weights.ncols(), 2, "grid search is two-dimensional");
    let cap = power_cap(sigma2_mw, eta);
    let upper = |j: usize| {
        weights
            .column(j)
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| pt_mw / w)
            .fold(cap, f64::min)
    };
    let (u0, u1) = (upper(0), upper(1));
    let mut best = (0.0, [0.0, 0.0]);
    for a in 0..steps {
        let p0 = u0 * a as f64 / (steps - 1) as f64;
        for b in 0..steps {
            let p1 = u1 * b as f64 / (steps - 1) as f64;
            let feasible = weights
                .row_iter()
                .all(|r| r[0] * p0 + r[1] * p1 <= pt_mw * (1.0 + 1e-12));
            if !feasible {
                continue;
            }
            let rate =
                capped_rate(bandwidth_mhz, p0 / sigma2_mw, eta) + capped_rate(bandwidth_mhz, p1 / sigma2_mw, eta);
            if rate > best.0 {
                best = (rate, [p0, p1]);
            }
        }
    }
    best
}

/// Received SNR in dB of a single interference-free link, by dB arithmetic.
pub fn link_budget_snr_db(
    prop: &PropagationParams,
    distance_m: f64,
    walls: usize,
    pt_mw: f64,
    temperature_k: f64,
    bandwidth_mhz: f64,
) -> Result<f64> {
    let loss = path_loss_db(prop, distance_m, walls)?;
    Ok(mw_to_dbm(pt_mw) - loss - mw_to_dbm(thermal_noise_mw(temperature_k, bandwidth_mhz)))
}

/// One oracle-versus-implementation comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub name: String,
    pub oracle: f64,
    pub implementation: f64,
    pub tolerance: f64,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        (self.oracle - self.implementation).abs() <= self.tolerance
    }
}

/// Runs a compact battery of comparisons; used by the `oracle` CLI verb.
pub fn run_all(seed: u64) -> Result<Vec<Comparison>> {
    let mut out = Vec::new();

    let area = ServiceArea::new(100.0, 100.0, 4, 4)?;
    let mut rng = substream(seed, 0, 0, Purpose::Users);
    let mut mismatches = 0.0;
    for _ in 0..10_000 {
        let p = Point::new(rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0);
        let q = Point::new(rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0);
        if brute_force_crossings(&area, &p, &q) != wall_crossings(&area, &p, &q) {
            mismatches += 1.0;
        }
    }
    out.push(Comparison {
        name: "wall crossings mismatches (10^4 segments)".into(),
        oracle: 0.0,
        implementation: mismatches,
        tolerance: 0.0,
    });

    let mut rng = substream(seed, 0, 1, Purpose::Contention);
    for (label, graph, set) in [
        (
            "SSI clique P({0})",
            graph_from_edges(3, &[(0, 1), (1, 2), (0, 2)]),
            vec![0],
        ),
        ("SSI path P({0,2})", graph_from_edges(3, &[(0, 1), (1, 2)]), vec![0, 2]),
    ] {
        let exact = ssi_exact_distribution(&graph);
        let emp = ssi_empirical_distribution(&graph, 10_000, &mut rng);
        out.push(Comparison {
            name: label.into(),
            oracle: exact.get(&set).copied().unwrap_or(0.0),
            implementation: emp.get(&set).copied().unwrap_or(0.0),
            tolerance: 0.03,
        });
    }

    let sigma2 = thermal_noise_mw(300.0, 60.0);
    let mut rng = substream(seed, 0, 2, Purpose::Fading);
    let mut worst_gap: f64 = 0.0;
    for _ in 0..20 {
        // mean gain around -80 dB so that both the cap and PAPC can bind
        let scale = 10f64.powf(-8.0 - rng.random::<f64>() * 2.0);
        let h = DMatrix::from_fn(2, 2, |_, _| complex_gaussian(&mut rng, 1.0) * scale.sqrt());
        let Ok(bf) = build_beamformer(&h) else { continue };
        let weights = bf.power_weights();
        let sol = allocate_power_weights(&weights, sigma2, 100.0, 3.75)?;
        let solver = sum_rate(&sol.p, sigma2, 60.0, 3.75);
        let (grid, _) = papc_grid_search(&weights, sigma2, 100.0, 60.0, 3.75, 400);
        if grid > 0.0 {
            worst_gap = worst_gap.max((grid - solver) / grid);
        }
    }
    out.push(Comparison {
        name: "PAPC solver shortfall vs 400x400 grid (worst of 20)".into(),
        oracle: 0.0,
        implementation: worst_gap.max(0.0),
        tolerance: 0.01,
    });

    let mut rng = substream(seed, 0, 3, Purpose::Fading);
    let mut worst_residual: f64 = 0.0;
    for n in [1, 2, 4, 8, 16] {
        for _ in 0..20 {
            let h = DMatrix::from_fn(n, n, |_, _| complex_gaussian(&mut rng, 1.0));
            if let Ok(bf) = build_beamformer(&h) {
                worst_residual = worst_residual.max(identity_residual(&h, &bf.w));
            }
        }
    }
    out.push(Comparison {
        name: "ZF ||H W - I||_inf (worst of 100)".into(),
        oracle: 0.0,
        implementation: worst_residual,
        tolerance: 1e-8,
    });

    let prop = PropagationParams {
        l0_db: 37.0,
        alpha: 2.0,
        lw_db: 0.0,
    };
    // 20 dBm - (37 + 20) dB - (-96.05 dBm)
    let expected = 20.0 - 57.0 - mw_to_dbm(1.38e-23 * 300.0 * 60e6 * 1e3);
    out.push(Comparison {
        name: "10 m open-space SNR, dB".into(),
        oracle: expected,
        implementation: link_budget_snr_db(&prop, 10.0, 0, dbm_to_mw(20.0), 300.0, 60.0)?,
        tolerance: 1e-9,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ssi_on_small_graphs() {
        let clique = ssi_exact_distribution(&graph_from_edges(3, &[(0, 1), (1, 2), (0, 2)]));
        for i in 0..3 {
            assert!((clique[&vec![i]] - 1.0 / 3.0).abs() < 1e-12);
        }
        let path = ssi_exact_distribution(&graph_from_edges(3, &[(0, 1), (1, 2)]));
        assert!((path[&vec![0, 2]] - 2.0 / 3.0).abs() < 1e-12);
        assert!((path[&vec![1]] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn grid_search_single_binding_antenna() {
        // diagonal weights: each user limited by its own antenna
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        let (_, p) = papc_grid_search(&w, 1.0, 1.0, 1.0, 20.0, 401);
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!((p[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn battery_passes() {
        for c in run_all(11).unwrap() {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn brute_force_agrees_on_corner_cases() {
        let area = ServiceArea::new(100.0, 100.0, 4, 4).unwrap();
        let on_wall = Point::new(20.0, 50.0);
        assert_eq!(brute_force_crossings(&area, &on_wall, &Point::new(30.0, 50.0)), 0);
        assert_eq!(
            brute_force_crossings(&area, &Point::new(1.0, 1.0), &Point::new(99.0, 99.0)),
            8
        );
    }
}
