//! Point estimates with 95% confidence intervals.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub n: u64,
    /// Half the width of the 95% interval.
    pub halfwidth: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Neumaier-compensated sum, evaluated in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

impl Estimate {
    /// Sample mean with a normal-approximation interval.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Estimate {
                mean: f64::NAN,
                n: 0,
                halfwidth: f64::INFINITY,
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            };
        }
        let mean = compensated_sum(samples) / n as f64;
        let halfwidth = if n > 1 {
            let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
            let var = compensated_sum(&dev) / (n - 1) as f64;
            Z95 * (var / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            n: n as u64,
            halfwidth,
            lower: mean - halfwidth,
            upper: mean + halfwidth,
        }
    }

    /// Proportion `successes / n` with the Wilson score interval.
    pub fn wilson(successes: u64, n: u64) -> Self {
        if n == 0 {
            return Estimate {
                mean: 0.0,
                n: 0,
                halfwidth: 0.5,
                lower: 0.0,
                upper: 1.0,
            };
        }
        let nf = n as f64;
        let p = successes as f64 / nf;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
        Estimate {
            mean: p,
            n,
            halfwidth: half,
            lower: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
            upper: if successes == n { 1.0 } else { (center + half).min(1.0) },
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// True when the two intervals intersect.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_is_exact_on_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(&v), 2.0);
    }

    #[test]
    fn sample_estimate() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.halfwidth - Z95 * sd / 2.0).abs() < 1e-12);
        let single = Estimate::from_samples(&[7.0]);
        assert_eq!((single.mean, single.halfwidth), (7.0, 0.0));
    }

    #[test]
    fn wilson_edges() {
        let e = Estimate::wilson(0, 100);
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.lower, 0.0);
        // z^2 / (n + z^2)
        assert!((e.upper - Z95 * Z95 / (100.0 + Z95 * Z95)).abs() < 1e-12);
        let e = Estimate::wilson(100, 100);
        assert_eq!(e.upper, 1.0);
        let e = Estimate::wilson(30, 100);
        assert!(e.lower < 0.3 && e.upper > 0.3);
        assert!(e.halfwidth >= 0.0);
    }
}
