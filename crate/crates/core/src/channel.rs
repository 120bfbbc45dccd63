//! Multiwall pathloss, Rayleigh block fading and outdated CSIT.
//!
//! Channel matrices are indexed `[ap, user]`: entry `(i, j)` is the link
//! from AP `i` to user `j`, `h_ij = sqrt(L_ij) * z_ij`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Layout, Point, Walls};

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.38e-23;

/// APs and users closer than this are evaluated at this distance.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationParams {
    /// Constant loss at 1 m, dB.
    pub l0_db: f64,
    /// Pathloss exponent.
    pub alpha: f64,
    /// Loss per wall crossed, dB.
    pub lw_db: f64,
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        if !self.l0_db.is_finite() {
            return Err(Error::invalid("L0 must be finite"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.lw_db.is_finite() && self.lw_db >= 0.0) {
            return Err(Error::invalid(format!("Lw must be >= 0, got {}", self.lw_db)));
        }
        Ok(())
    }

    /// Average linear gain between two points, distance clamped to 1 m.
    pub fn average_gain(&self, walls: &Walls, a: &Point, b: &Point) -> f64 {
        let d = a.distance(b).max(MIN_DISTANCE_M);
        let phi = walls.crossings(a, b) as f64;
        let db = self.l0_db + 10.0 * self.alpha * d.log10() + phi * self.lw_db;
        linear_gain(db)
    }
}

/// `L0 + 10 alpha log10(d) + phi Lw`.
pub fn path_loss_db(params: &PropagationParams, d: f64, phi: usize) -> Result<f64> {
    params.validate()?;
    if !(d > 0.0) {
        return Err(Error::invalid(format!("distance must be positive, got {d}")));
    }
    Ok(params.l0_db + 10.0 * params.alpha * d.log10() + phi as f64 * params.lw_db)
}

pub fn linear_gain(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Thermal noise `k T W` in mW for a bandwidth given in MHz.
pub fn thermal_noise_mw(temperature_k: f64, bandwidth_mhz: f64) -> f64 {
    BOLTZMANN * temperature_k * bandwidth_mhz * 1e6 * 1e3
}

/// One circularly-symmetric complex Gaussian draw with `E|z|^2 = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Average gain matrix `[ap, user]`.
pub fn average_gains(layout: &Layout, users: &[Point], params: &PropagationParams) -> DMatrix<f64> {
    DMatrix::from_fn(layout.ap_count(), users.len(), |i, j| {
        params.average_gain(&layout.walls, &layout.ap_positions[i], &users[j])
    })
}

/// One block-fading channel snapshot between the APs and a set of users.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Average path gains.
    pub l: DMatrix<f64>,
    /// Small-scale fading.
    pub z: DMatrix<Complex64>,
    /// Complex channel `sqrt(L) * Z`.
    pub h: DMatrix<Complex64>,
    /// Power gains `|h|^2`.
    pub g: DMatrix<f64>,
}

impl ChannelRealization {
    pub fn from_parts(l: DMatrix<f64>, z: DMatrix<Complex64>) -> Self {
        let h = DMatrix::from_fn(l.nrows(), l.ncols(), |i, j| z[(i, j)] * l[(i, j)].sqrt());
        let g = h.map(|v| v.norm_sqr());
        ChannelRealization { l, z, h, g }
    }

    /// Redraws the fading with the same average gains.
    pub fn redraw<R: Rng + ?Sized>(&self, sigma_z2: f64, rng: &mut R) -> Self {
        let z = draw_fading(self.l.nrows(), self.l.ncols(), sigma_z2, rng);
        Self::from_parts(self.l.clone(), z)
    }
}

pub fn draw_fading<R: Rng + ?Sized>(rows: usize, cols: usize, sigma_z2: f64, rng: &mut R) -> DMatrix<Complex64> {
    // column-major fill order is part of the reproducibility contract
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, sigma_z2))
}

pub fn draw_realization<R: Rng + ?Sized>(
    layout: &Layout,
    users: &[Point],
    params: &PropagationParams,
    sigma_z2: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if users.is_empty() {
        return Err(Error::invalid("draw_realization needs at least one user"));
    }
    let l = average_gains(layout, users, params);
    let z = draw_fading(l.nrows(), l.ncols(), sigma_z2, rng);
    Ok(ChannelRealization::from_parts(l, z))
}

/// Instantaneous AP-to-AP power gains used for carrier sensing.
///
/// The link is reciprocal: one fading draw per unordered pair, so the
/// matrix is symmetric. The diagonal is zero.
pub fn draw_ap_gains<R: Rng + ?Sized>(
    layout: &Layout,
    params: &PropagationParams,
    sigma_z2: f64,
    rng: &mut R,
) -> DMatrix<f64> {
    let n = layout.ap_count();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for x in (i + 1)..n {
            let l = params.average_gain(&layout.walls, &layout.ap_positions[i], &layout.ap_positions[x]);
            let v = l * complex_gaussian(rng, sigma_z2).norm_sqr();
            g[(i, x)] = v;
            g[(x, i)] = v;
        }
    }
    g
}

/// Fading after the feedback delay, with the mask of links whose CSIT is stale.
#[derive(Debug, Clone)]
pub struct AgedFading {
    pub z_now: DMatrix<Complex64>,
    pub outdated: DMatrix<bool>,
}

/// Ages the fading seen by the transmitters.
///
/// Each link is independently outdated with probability `delta`; an
/// outdated link evolves by `z_t = rho z_prev + sqrt(1 - rho^2) q`. A
/// uniform and a `q` are drawn for every link regardless of `delta`, so runs
/// with different `delta` on the same stream are coupled: raising `delta`
/// only adds outdated links.
pub fn delayed_csit<R: Rng + ?Sized>(
    z_prev: &DMatrix<Complex64>,
    delta: f64,
    rho: f64,
    sigma_z2: f64,
    rng: &mut R,
) -> Result<AgedFading> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::invalid(format!("delta must lie in [0, 1], got {delta}")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("rho must lie in [0, 1], got {rho}")));
    }
    let innovation = (1.0 - rho * rho).sqrt();
    let (r, c) = z_prev.shape();
    let mut z_now = z_prev.clone();
    let mut outdated = DMatrix::from_element(r, c, false);
    for j in 0..c {
        for i in 0..r {
            let u: f64 = rng.random();
            let q = complex_gaussian(rng, sigma_z2);
            if u < delta {
                outdated[(i, j)] = true;
                z_now[(i, j)] = z_prev[(i, j)] * rho + q * innovation;
            }
        }
    }
    Ok(AgedFading { z_now, outdated })
}

/// CSIT available at the transmitters next to the true channel.
#[derive(Debug, Clone)]
pub struct DelayedChannel {
    /// What the transmitters believe the channel is.
    pub h_hat: DMatrix<Complex64>,
    /// The channel the data actually sees.
    pub h_true: DMatrix<Complex64>,
    pub outdated_mask: DMatrix<bool>,
}

impl DelayedChannel {
    /// `csit` holds the fading at the time of estimation.
    pub fn new(csit: &ChannelRealization, aged: AgedFading) -> Self {
        let l = &csit.l;
        let h_true = DMatrix::from_fn(l.nrows(), l.ncols(), |i, j| aged.z_now[(i, j)] * l[(i, j)].sqrt());
        DelayedChannel {
            h_hat: csit.h.clone(),
            h_true,
            outdated_mask: aged.outdated,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{place_aps, ServiceArea};
    use crate::rng::{substream, Purpose};

    fn open() -> PropagationParams {
        PropagationParams {
            l0_db: 37.0,
            alpha: 2.0,
            lw_db: 0.0,
        }
    }

    #[test]
    fn path_loss_examples() {
        assert!((path_loss_db(&open(), 10.0, 0).unwrap() - 57.0).abs() < 1e-12);
        assert!((path_loss_db(&open(), 1.0, 0).unwrap() - 37.0).abs() < 1e-12);
        let walled = PropagationParams {
            l0_db: 37.0,
            alpha: 4.0,
            lw_db: 10.0,
        };
        assert!((path_loss_db(&walled, 10.0, 3).unwrap() - 107.0).abs() < 1e-12);
        assert!(path_loss_db(&open(), 0.0, 0).is_err());
        assert!(path_loss_db(&open(), -3.0, 0).is_err());
    }

    #[test]
    fn linear_gain_examples() {
        assert_eq!(linear_gain(0.0), 1.0);
        assert!((linear_gain(30.0) - 1e-3).abs() < 1e-18);
        // 10^-5.7 = 10^0.3 * 1e-6
        assert!((linear_gain(57.0) - 1.995_262_315e-6).abs() < 1e-15);
    }

    #[test]
    fn noise_floor_at_sixty_mhz() {
        let n = thermal_noise_mw(300.0, 60.0);
        assert!((n - 2.484e-10).abs() < 1e-14);
        assert!((mw_to_dbm(n) - (-96.05)).abs() < 0.01);
    }

    #[test]
    fn distance_is_clamped_to_one_meter() {
        let area = ServiceArea::new(100.0, 100.0, 0, 0).unwrap();
        let p = Point::new(10.0, 10.0);
        let q = Point::new(10.2, 10.0);
        let g = open().average_gain(&area.walls(), &p, &q);
        assert!((g - linear_gain(37.0)).abs() < 1e-18);
        assert!(g <= 1.0);
    }

    #[test]
    fn realization_identities() {
        let area = ServiceArea::new(100.0, 100.0, 4, 4).unwrap();
        let layout = place_aps(&area, 3, 3).unwrap();
        let users: Vec<Point> = (0..9).map(|k| Point::new(5.0 + 10.0 * k as f64, 47.0)).collect();
        let mut rng = substream(1, 2, 3, Purpose::Fading);
        let params = PropagationParams {
            l0_db: 37.0,
            alpha: 4.0,
            lw_db: 10.0,
        };
        let r = draw_realization(&layout, &users, &params, 1.0, &mut rng).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                assert!(r.l[(i, j)] > 0.0 && r.l[(i, j)] <= 1.0);
                let expect = r.l[(i, j)] * r.z[(i, j)].norm_sqr();
                assert!((r.g[(i, j)] - expect).abs() <= 1e-12 * expect.max(1e-300));
                assert!((r.g[(i, j)] - r.h[(i, j)].norm_sqr()).abs() <= 1e-15 * r.g[(i, j)]);
            }
        }
        assert!(draw_realization(&layout, &[], &params, 1.0, &mut rng).is_err());
    }

    #[test]
    fn fading_power_and_exponential_law() {
        let mut rng = substream(11, 0, 0, Purpose::Fading);
        let n = 100_000;
        let mut samples: Vec<f64> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0).norm_sqr()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        assert!((0.99..=1.01).contains(&mean), "mean {mean}");

        // Kolmogorov-Smirnov against Exp(1), 1% critical value
        samples.sort_by(f64::total_cmp);
        let mut d: f64 = 0.0;
        for (k, &x) in samples.iter().enumerate() {
            let cdf = 1.0 - (-x).exp();
            d = d.max((k + 1) as f64 / n as f64 - cdf).max(cdf - k as f64 / n as f64);
        }
        assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn ap_gains_symmetric() {
        let area = ServiceArea::new(100.0, 100.0, 0, 0).unwrap();
        let layout = place_aps(&area, 3, 2).unwrap();
        let mut rng = substream(3, 0, 0, Purpose::ApFading);
        let g = draw_ap_gains(&layout, &open(), 1.0, &mut rng);
        assert_eq!(g, g.transpose());
        assert!((0..6).all(|i| g[(i, i)] == 0.0));
    }

    fn z_block(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = substream(seed, 0, 0, Purpose::Fading);
        draw_fading(n, n, 1.0, &mut rng)
    }

    #[test]
    fn delta_zero_or_rho_one_keeps_csit_exact() {
        let z = z_block(6, 5);
        let mut rng = substream(5, 0, 0, Purpose::CsitAging);
        let aged = delayed_csit(&z, 0.0, 0.3, 1.0, &mut rng).unwrap();
        assert_eq!(aged.z_now, z);
        assert!(aged.outdated.iter().all(|&b| !b));

        let aged = delayed_csit(&z, 1.0, 1.0, 1.0, &mut rng).unwrap();
        assert_eq!(aged.z_now, z);
        assert!(aged.outdated.iter().all(|&b| b));
    }

    #[test]
    fn delayed_channel_matches_truth_on_fresh_links() {
        let area = ServiceArea::new(100.0, 100.0, 0, 0).unwrap();
        let layout = place_aps(&area, 2, 2).unwrap();
        let users = vec![
            Point::new(10.0, 10.0),
            Point::new(80.0, 20.0),
            Point::new(30.0, 70.0),
            Point::new(90.0, 90.0),
        ];
        let mut rng = substream(8, 0, 0, Purpose::Fading);
        let r = draw_realization(&layout, &users, &open(), 1.0, &mut rng).unwrap();
        let mut rng = substream(8, 0, 0, Purpose::CsitAging);
        let aged = delayed_csit(&r.z, 0.5, 0.9, 1.0, &mut rng).unwrap();
        let dc = DelayedChannel::new(&r, aged);
        for i in 0..4 {
            for j in 0..4 {
                if !dc.outdated_mask[(i, j)] {
                    assert_eq!(dc.h_hat[(i, j)], dc.h_true[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn ar1_statistics() {
        let n = 100_000;
        let mut rng = substream(21, 0, 0, Purpose::Fading);
        let z = draw_fading(n, 1, 1.0, &mut rng);
        let mut rng = substream(21, 0, 0, Purpose::CsitAging);
        let aged = delayed_csit(&z, 1.0, 0.9, 1.0, &mut rng).unwrap();
        let var = aged.z_now.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
        let corr: Complex64 = aged
            .z_now
            .iter()
            .zip(z.iter())
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            / n as f64;
        assert!((corr.re - 0.9).abs() < 0.9 * 0.03, "correlation {corr}");

        // rho = 0: CSIT carries no information about the current fading
        let mut rng = substream(22, 0, 0, Purpose::CsitAging);
        let z = draw_fading(10_000, 1, 1.0, &mut substream(22, 0, 0, Purpose::Fading));
        let aged = delayed_csit(&z, 1.0, 0.0, 1.0, &mut rng).unwrap();
        let corr: Complex64 = aged
            .z_now
            .iter()
            .zip(z.iter())
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            / 10_000.0;
        assert!(corr.norm() < 0.02, "correlation {corr}");
    }

    #[test]
    fn delayed_csit_rejects_bad_probabilities() {
        let z = z_block(2, 1);
        let mut rng = substream(1, 0, 0, Purpose::CsitAging);
        assert!(delayed_csit(&z, 1.5, 0.5, 1.0, &mut rng).is_err());
        assert!(delayed_csit(&z, 0.5, -0.1, 1.0, &mut rng).is_err());
    }
}
