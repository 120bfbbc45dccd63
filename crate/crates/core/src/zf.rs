//! Multi-cell zero-forcing beamforming with per-antenna power constraints.
//!
//! Matrices here use the downlink orientation `y = H x + n`: `H` is
//! `users x antennas`, and the beamformer `W` is `antennas x users`.
//!
//! Power allocation solves
//!
//! ```text
//! maximize   sum_j log2(1 + p_j / sigma2)
//! subject to sum_j |w_ij|^2 p_j <= pt   for every antenna i
//!            0 <= p_j <= sigma2 (2^eta - 1)
//! ```
//!
//! The upper bound on `p_j` is the rate cap `W eta` moved into the
//! constraints; power above it buys nothing. The problem is solved in the
//! normalized variable `x_j = p_j / sigma2` with a primal-dual interior-point
//! method.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{capped_rate, LinkOutcome};

/// Condition number of `H H^dagger` above which the channel is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Required accuracy of `H W = I` (infinity norm).
pub const INVERSION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZfParams {
    pub eta_zf: f64,
    /// Per-antenna power budget, mW.
    pub pt_mw: f64,
    /// Probability that the CSIT of a link is outdated.
    pub delta: f64,
    /// Fading correlation across the feedback delay.
    pub rho: f64,
}

impl ZfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_zf > 0.0) || !(self.pt_mw > 0.0) {
            return Err(Error::invalid("eta_zf and pt_mw must be positive"));
        }
        if !(0.0..=1.0).contains(&self.delta) || !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid("delta and rho must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Beamformer {
    /// `H^dagger (H H^dagger)^-1`, antennas x users.
    pub w: DMatrix<Complex64>,
    /// Estimated condition number of `H H^dagger` after row/column equilibration.
    pub cond: f64,
    /// `||H W - I||_inf` at construction.
    pub residual: f64,
}

impl Beamformer {
    pub fn size(&self) -> usize {
        self.w.ncols()
    }

    /// `|w_ij|^2`, antennas x users.
    pub fn power_weights(&self) -> DMatrix<f64> {
        self.w.map(|v| v.norm_sqr())
    }
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||A B - I||_inf`.
pub fn identity_residual(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let mut p = a * b;
    for k in 0..p.nrows().min(p.ncols()) {
        p[(k, k)] -= Complex64::new(1.0, 0.0);
    }
    p.row_iter()
        .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Builds the zero-forcing beamformer for a square CSIT matrix.
///
/// For square `H`, `H^dagger (H H^dagger)^-1 = H^-1`; the inverse is
/// computed on a row- and column-equilibrated copy so that pathloss
/// spread between users does not masquerade as singularity.
pub fn build_beamformer(h_hat: &DMatrix<Complex64>) -> Result<Beamformer> {
    let n = h_hat.nrows();
    if n == 0 || h_hat.ncols() != n {
        return Err(Error::invalid(format!(
            "beamformer needs a non-empty square channel, got {:?}",
            h_hat.shape()
        )));
    }
    if h_hat.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::invalid("channel matrix has non-finite entries"));
    }
    let row_scale: Vec<f64> = (0..n)
        .map(|j| h_hat.row(j).iter().map(|v| v.norm()).fold(0.0, f64::max))
        .collect();
    if row_scale.contains(&0.0) {
        return Err(Error::SingularChannel { cond: f64::INFINITY });
    }
    let col_scale: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| h_hat[(j, i)].norm() / row_scale[j]).fold(0.0, f64::max))
        .collect();
    if col_scale.contains(&0.0) {
        return Err(Error::SingularChannel { cond: f64::INFINITY });
    }
    let eq = DMatrix::from_fn(n, n, |j, i| h_hat[(j, i)] / (row_scale[j] * col_scale[i]));
    let Some(eq_inv) = eq.clone().lu().try_inverse() else {
        return Err(Error::SingularChannel { cond: f64::INFINITY });
    };
    let kappa = norm1(&eq) * norm1(&eq_inv);
    let cond = kappa * kappa;
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::SingularChannel { cond });
    }
    let mut w = DMatrix::from_fn(n, n, |i, j| eq_inv[(i, j)] / (col_scale[i] * row_scale[j]));
    let mut residual = identity_residual(h_hat, &w);
    if residual > 1e-12 {
        // one step of iterative refinement: W <- W + W (I - H W)
        let mut e = -(h_hat * &w);
        for k in 0..n {
            e[(k, k)] += Complex64::new(1.0, 0.0);
        }
        let refined = &w + &w * e;
        let r = identity_residual(h_hat, &refined);
        if r < residual {
            w = refined;
            residual = r;
        }
    }
    if !(residual < INVERSION_TOLERANCE) {
        return Err(Error::SingularChannel { cond });
    }
    Ok(Beamformer { w, cond, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    /// Symbol powers, mW.
    pub p: Vec<f64>,
    /// Per-antenna transmit power `sum_j |w_ij|^2 p_j`, mW.
    pub loads: Vec<f64>,
    /// Relative KKT residual (stationarity and complementarity) at `p`.
    pub kkt_residual: f64,
    pub newton_steps: usize,
    /// False when the solver hit its iteration limit; `p` is then the best
    /// feasible iterate.
    pub converged: bool,
}

impl PowerAllocation {
    pub fn max_load(&self) -> f64 {
        self.loads.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-user power cap `sigma2 (2^eta - 1)` implied by the rate cap.
pub fn power_cap(sigma2_mw: f64, eta: f64) -> f64 {
    sigma2_mw * (2f64.powf(eta) - 1.0)
}

pub fn antenna_loads(weights: &DMatrix<f64>, p: &[f64]) -> Vec<f64> {
    let pv = DVector::from_column_slice(p);
    (weights * pv).iter().copied().collect()
}

/// Sum rate in Mbps for symbol powers `p`.
pub fn sum_rate(p: &[f64], sigma2_mw: f64, bandwidth_mhz: f64, eta: f64) -> f64 {
    p.iter()
        .map(|&pj| capped_rate(bandwidth_mhz, pj / sigma2_mw, eta))
        .sum()
}

/// Uniform power scaled to the tightest antenna (and the cap).
pub fn equal_power_baseline(weights: &DMatrix<f64>, pt_mw: f64, cap_mw: f64) -> Vec<f64> {
    let m = weights.ncols();
    let worst_row = weights.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
    let level = if worst_row > 0.0 {
        (pt_mw / worst_row).min(cap_mw)
    } else {
        cap_mw
    };
    vec![level; m]
}

fn objective(x: &DVector<f64>) -> f64 {
    x.iter().map(|v| v.ln_1p()).sum()
}

/// Maximizes the capped sum rate under per-antenna power constraints.
pub fn allocate_power(beamformer: &Beamformer, sigma2_mw: f64, pt_mw: f64, eta: f64) -> Result<PowerAllocation> {
    if !(sigma2_mw > 0.0) || !(pt_mw > 0.0) || !(eta > 0.0) {
        return Err(Error::invalid("allocate_power needs positive sigma2, pt and eta"));
    }
    let weights = beamformer.power_weights();
    allocate_power_weights(&weights, sigma2_mw, pt_mw, eta)
}

/// Inequality constraints `B x <= 1`, `x >= 0`, `x <= cap` with their
/// slacks and multipliers.
struct Duals {
    s_b: DVector<f64>,
    s_lo: DVector<f64>,
    s_hi: DVector<f64>,
    l_b: DVector<f64>,
    l_lo: DVector<f64>,
    l_hi: DVector<f64>,
}

impl Duals {
    fn count(&self) -> f64 {
        (self.s_b.len() + self.s_lo.len() + self.s_hi.len()) as f64
    }

    fn gap(&self) -> f64 {
        self.s_b.dot(&self.l_b) + self.s_lo.dot(&self.l_lo) + self.s_hi.dot(&self.l_hi)
    }

    /// Gradient of the Lagrangian of `-sum ln(1 + x)`.
    fn dual_residual(&self, b: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
        let mut r = b.tr_mul(&self.l_b) - &self.l_lo + &self.l_hi;
        for j in 0..x.len() {
            r[j] -= 1.0 / (1.0 + x[j]);
        }
        r
    }
}

fn slacks(b: &DMatrix<f64>, x: &DVector<f64>, cap: f64) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    ((b * x).map(|v| 1.0 - v), x.clone(), x.map(|v| cap - v))
}

fn positive(v: &DVector<f64>) -> bool {
    v.iter().all(|&e| e > 0.0)
}

/// Largest step in `(0, 1]` keeping `v + step * dv` nonnegative.
fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&a, &d)| -a / d)
        .fold(1.0, f64::min)
}

/// As [`allocate_power`], starting from the `|w_ij|^2` matrix.
pub fn allocate_power_weights(weights: &DMatrix<f64>, sigma2_mw: f64, pt_mw: f64, eta: f64) -> Result<PowerAllocation> {
    let m = weights.ncols();
    let cap = 2f64.powf(eta) - 1.0;
    let b = weights * (sigma2_mw / pt_mw);
    if b.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("beamformer weights must be finite"));
    }

    let finish = |x: &DVector<f64>, kkt: f64, steps: usize, converged: bool| {
        let p: Vec<f64> = x.iter().map(|v| v * sigma2_mw).collect();
        let loads = antenna_loads(weights, &p);
        PowerAllocation {
            p,
            loads,
            kkt_residual: kkt,
            newton_steps: steps,
            converged,
        }
    };

    // Every user at its cap is optimal whenever it is feasible.
    let at_cap = DVector::from_element(m, cap);
    if (&b * &at_cap).iter().all(|&v| v <= 1.0) {
        return Ok(finish(&at_cap, 0.0, 0, true));
    }

    // strictly interior start
    let mut x = DVector::from_fn(m, |j, _| {
        let col_max = b.column(j).iter().copied().fold(0.0, f64::max);
        let lim = if col_max > 0.0 { 1.0 / (m as f64 * col_max) } else { cap };
        0.5 * lim.min(cap)
    });
    let (s_b, s_lo, s_hi) = slacks(&b, &x, cap);
    let mut d = Duals {
        l_b: s_b.map(|v| 1.0 / v),
        l_lo: s_lo.map(|v| 1.0 / v),
        l_hi: s_hi.map(|v| 1.0 / v),
        s_b,
        s_lo,
        s_hi,
    };

    const MU: f64 = 10.0;
    const GAP_TOL: f64 = 1e-10;
    const FEAS_TOL: f64 = 1e-10;
    const MAX_STEPS: usize = 200;
    let mut steps = 0;
    let mut converged = false;
    let mut best = (x.clone(), f64::INFINITY);

    while steps < MAX_STEPS {
        let scale = objective(&x).max(1.0);
        let r_dual = d.dual_residual(&b, &x);
        let grad_scale = x.iter().map(|v| 1.0 / (1.0 + v)).fold(0.0, f64::max);
        let kkt = (r_dual.amax() / grad_scale).max(d.gap() / scale);
        if kkt < best.1 {
            best = (x.clone(), kkt);
        }
        if r_dual.amax() <= FEAS_TOL * grad_scale && d.gap() <= GAP_TOL * scale {
            converged = true;
            break;
        }
        steps += 1;
        let t = MU * d.count() / d.gap();

        // reduced Newton system for the primal step
        let w_b = d.l_b.component_div(&d.s_b);
        let scaled = DMatrix::from_fn(b.nrows(), m, |i, j| b[(i, j)] * w_b[i].sqrt());
        let mut hess = scaled.tr_mul(&scaled);
        let mut rhs = -(b.tr_mul(&d.s_b.map(|v| 1.0 / (t * v))));
        for j in 0..m {
            let xj = x[j];
            hess[(j, j)] += 1.0 / ((1.0 + xj) * (1.0 + xj)) + d.l_lo[j] / d.s_lo[j] + d.l_hi[j] / d.s_hi[j];
            rhs[j] += 1.0 / (1.0 + xj) + 1.0 / (t * d.s_lo[j]) - 1.0 / (t * d.s_hi[j]);
        }
        let dx = match Cholesky::new(hess.clone()) {
            Some(ch) => ch.solve(&rhs),
            None => match hess.lu().solve(&rhs) {
                Some(v) => v,
                None => break,
            },
        };
        let ds_b = -(&b * &dx);
        let ds_lo = dx.clone();
        let ds_hi = -dx.clone();
        // dl = (1/t - l s - l ds) / s per constraint
        let dual_step = |l: &DVector<f64>, sl: &DVector<f64>, ds: &DVector<f64>| {
            DVector::from_fn(l.len(), |i, _| (1.0 / t - l[i] * sl[i] - l[i] * ds[i]) / sl[i])
        };
        let dl_b = dual_step(&d.l_b, &d.s_b, &ds_b);
        let dl_lo = dual_step(&d.l_lo, &d.s_lo, &ds_lo);
        let dl_hi = dual_step(&d.l_hi, &d.s_hi, &ds_hi);

        let mut step = 0.99
            * max_step(&d.l_b, &dl_b)
                .min(max_step(&d.l_lo, &dl_lo))
                .min(max_step(&d.l_hi, &dl_hi))
                .min(max_step(&d.s_b, &ds_b))
                .min(max_step(&d.s_lo, &ds_lo))
                .min(max_step(&d.s_hi, &ds_hi));
        step = step.min(1.0);

        let residual_norm = |x: &DVector<f64>, d: &Duals| {
            let rd = d.dual_residual(&b, x);
            let mut sq = rd.norm_squared();
            for (l, s) in [(&d.l_b, &d.s_b), (&d.l_lo, &d.s_lo), (&d.l_hi, &d.s_hi)] {
                sq += l
                    .iter()
                    .zip(s.iter())
                    .map(|(a, c)| (a * c - 1.0 / t).powi(2))
                    .sum::<f64>();
            }
            sq.sqrt()
        };
        let r0 = residual_norm(&x, &d);
        let mut accepted = false;
        for _ in 0..60 {
            let xn = &x + &dx * step;
            let (sb, slo, shi) = slacks(&b, &xn, cap);
            if positive(&sb) && positive(&slo) && positive(&shi) {
                let dn = Duals {
                    l_b: &d.l_b + &dl_b * step,
                    l_lo: &d.l_lo + &dl_lo * step,
                    l_hi: &d.l_hi + &dl_hi * step,
                    s_b: sb,
                    s_lo: slo,
                    s_hi: shi,
                };
                if residual_norm(&xn, &dn) <= (1.0 - 0.01 * step) * r0 {
                    x = xn;
                    d = dn;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    if converged {
        let kkt = kkt_residual(&b, &x, &d);
        return Ok(finish(&x, kkt, steps, true));
    }
    let kkt = best.1;
    Ok(finish(&best.0, kkt, steps, false))
}

/// Relative KKT residual: worst stationarity component over the largest
/// objective gradient, or the duality gap over the objective.
fn kkt_residual(b: &DMatrix<f64>, x: &DVector<f64>, d: &Duals) -> f64 {
    let grad_scale = x.iter().map(|v| 1.0 / (1.0 + v)).fold(0.0, f64::max);
    let stat = d.dual_residual(b, x).amax() / grad_scale.max(f64::MIN_POSITIVE);
    stat.max(d.gap() / objective(x).max(1.0))
}

/// Rates with perfect CSIT: user `j` sees `p_j / sigma2`.
pub fn zf_rates_ideal(power: &PowerAllocation, bandwidth_mhz: f64, sigma2_mw: f64, eta: f64) -> Vec<LinkOutcome> {
    power
        .p
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            let sinr = pj / sigma2_mw;
            LinkOutcome {
                ap: j,
                user: j,
                rate_mbps: capped_rate(bandwidth_mhz, sinr, eta),
                sinr,
            }
        })
        .collect()
}

/// Rates when beamformer and powers were computed from stale CSIT.
///
/// The effective coupling is `C = H_true W`; user `j` gets
/// `|c_jj|^2 p_j / (sum_{m != j} |c_jm|^2 p_m + sigma2)`.
pub fn zf_rates_erroneous(
    h_true: &DMatrix<Complex64>,
    beamformer: &Beamformer,
    power: &PowerAllocation,
    bandwidth_mhz: f64,
    sigma2_mw: f64,
    eta: f64,
) -> Result<Vec<LinkOutcome>> {
    let n = beamformer.size();
    if h_true.shape() != (n, n) || power.p.len() != n {
        return Err(Error::invalid("erroneous ZF: dimension mismatch"));
    }
    let c = h_true * &beamformer.w;
    Ok((0..n)
        .map(|j| {
            let signal = c[(j, j)].norm_sqr() * power.p[j];
            let leakage: f64 = (0..n)
                .filter(|&m| m != j)
                .map(|m| c[(j, m)].norm_sqr() * power.p[m])
                .sum();
            let sinr = signal / (leakage + sigma2_mw);
            LinkOutcome {
                ap: j,
                user: j,
                rate_mbps: capped_rate(bandwidth_mhz, sinr, eta),
                sinr,
            }
        })
        .collect())
}

/// Leakage power `sum_{m != j} |c_jm|^2 p_m` for every user.
pub fn leakage(h_true: &DMatrix<Complex64>, beamformer: &Beamformer, p: &[f64]) -> Vec<f64> {
    let c = h_true * &beamformer.w;
    let n = c.nrows();
    (0..n)
        .map(|j| (0..n).filter(|&m| m != j).map(|m| c[(j, m)].norm_sqr() * p[m]).sum())
        .collect()
}
