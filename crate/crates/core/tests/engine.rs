use nalgebra::DMatrix;

use indoordim::channel::{complex_gaussian, delayed_csit, thermal_noise_mw, ChannelRealization, DelayedChannel};
use indoordim::engine::{drop_users, evaluate_deployment, SystemKind};
use indoordim::geometry::ServiceArea;
use indoordim::rng::{substream, Purpose};
use indoordim::scenario::Scenario;
use indoordim::zf::{allocate_power, build_beamformer, zf_rates_erroneous, zf_rates_ideal};

fn quick(preset: &str, snapshots: usize) -> Scenario {
    let mut s = Scenario::preset(preset).unwrap();
    s.engine.n_snapshots = snapshots;
    s
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn open_wifi_is_saturated_at_moderate_density() {
    let s = quick("table1-open", 100);
    let r = evaluate_deployment(&s, SystemKind::WifiBaseline, 6, 5).unwrap();
    // one active AP per channel, each at w * 2.7 Mbps, over 0.01 km^2
    let ceiling = 3.0 * 20.0 * 2.7 / 0.01;
    assert!(
        (r.estimate.throughput.mean / ceiling - 1.0).abs() <= 0.02,
        "{:?}",
        r.estimate.throughput
    );
}

#[test]
fn ideal_zf_two_aps_has_no_outage() {
    let s = quick("table1-open", 200);
    let r = evaluate_deployment(&s, SystemKind::ZfIdeal, 2, 1).unwrap();
    assert!(r.estimate.outage.mean < 0.005, "{:?}", r.estimate.outage);
    assert_eq!(r.estimate.redraws, 0);
}

#[test]
fn fully_stale_csit_collapses_sinr() {
    // 8 x 8 Rayleigh channels at a mean SNR of 40 dB, CSIT entirely outdated
    let sigma2 = thermal_noise_mw(300.0, 60.0);
    let gain = 1e4 * sigma2 / 100.0;
    let l = DMatrix::from_element(8, 8, gain);
    let mut rng = substream(5, 0, 0, Purpose::Fading);
    let mut age_rng = substream(5, 0, 0, Purpose::CsitAging);
    let (mut ideal, mut aged) = (Vec::new(), Vec::new());
    for _ in 0..1000 {
        let csit = ChannelRealization::from_parts(
            l.clone(),
            DMatrix::from_fn(8, 8, |_, _| complex_gaussian(&mut rng, 1.0)),
        );
        let Ok(bf) = build_beamformer(&csit.h) else { continue };
        let power = allocate_power(&bf, sigma2, 100.0, 3.75).unwrap();
        let stale = DelayedChannel::new(&csit, delayed_csit(&csit.z, 1.0, 0.0, 1.0, &mut age_rng).unwrap());
        ideal.extend(
            zf_rates_ideal(&power, 60.0, sigma2, 3.75)
                .iter()
                .map(|o| 10.0 * o.sinr.log10()),
        );
        let out = zf_rates_erroneous(&stale.h_true, &bf, &power, 60.0, sigma2, 3.75).unwrap();
        aged.extend(out.iter().map(|o| 10.0 * o.sinr.log10()));
    }
    let drop = median(ideal) - median(aged);
    assert!(drop >= 20.0, "median SINR drop {drop:.2} dB");
}

#[test]
fn dropped_users_are_uniform() {
    let area = ServiceArea::new(100.0, 50.0, 0, 0).unwrap();
    let mut rng = substream(3, 0, 0, Purpose::Users);
    let users = drop_users(&area, 4000, &mut rng).unwrap();
    // Kolmogorov-Smirnov against U(0, 1) on each axis, 1% level
    let ks = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        v.iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
            .fold(0.0, f64::max)
    };
    let crit = 1.63 / (users.len() as f64).sqrt();
    assert!(ks(users.iter().map(|p| p.x / area.lx).collect()) < crit);
    assert!(ks(users.iter().map(|p| p.y / area.ly).collect()) < crit);
}

#[test]
fn obstructed_static_finds_reuse_factor() {
    let s = quick("table1-obstructed", 100);
    let r = evaluate_deployment(&s, SystemKind::Static, 5, 4).unwrap();
    let reuse = r.reuse.as_ref().unwrap();
    assert!(reuse.k_star.is_some());
    assert_eq!(r.k, reuse.k_star);
    assert!(r.outage_ok);
}

#[test]
fn erroneous_zf_is_worse_than_ideal_in_dense_open_space() {
    let s = quick("table1-open", 100);
    let ideal = evaluate_deployment(&s, SystemKind::ZfIdeal, 6, 5).unwrap();
    let err = evaluate_deployment(&s, SystemKind::ZfErroneous, 6, 5).unwrap();
    assert!(err.estimate.outage.mean > ideal.estimate.outage.mean);
    assert!(err.estimate.throughput.mean < ideal.estimate.throughput.mean);
}
