//! Small statistical helpers: least-squares lines, confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// 97.5% quantile of the standard normal.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 when the fit is exact or `n == 2`).
    pub slope_se: f64,
    /// Residual sum of squares.
    pub rss: f64,
    pub r2: f64,
    pub n: usize,
}

impl LineFit {
    /// Two-sided 95% confidence interval of the slope (Student t, `n - 2` dof).
    pub fn slope_ci95(&self) -> (f64, f64) {
        let half = if self.n > 2 {
            t_quantile_975(self.n - 2) * self.slope_se
        } else {
            f64::INFINITY
        };
        (self.slope - half, self.slope + half)
    }
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::DegenerateFit(format!(
            "{} x values but {} y values",
            n,
            ys.len()
        )));
    }
    if n < 2 {
        return Err(Error::DegenerateFit(format!("{n} points")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 1e-300 * nf) {
        return Err(Error::DegenerateFit("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let slope_se = if n > 2 {
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r2 = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        slope_se,
        rss,
        r2,
        n,
    })
}

/// 97.5% quantile of Student's t with `dof` degrees of freedom.
pub fn t_quantile_975(dof: usize) -> f64 {
    if dof == 0 {
        return f64::INFINITY;
    }
    StudentsT::new(0.0, 1.0, dof as f64)
        .map(|t| t.inverse_cdf(0.975))
        .unwrap_or(Z95)
}

/// Replica count at and above which mean intervals use the normal quantile.
pub const NORMAL_CI_MIN_REPLICAS: u64 = 1000;

/// 95% interval for a mean from `n` samples with standard error `se`:
/// normal quantile when `n >= 1000`, Student t below.
pub fn mean_ci95(mean: f64, se: f64, n: u64) -> (f64, f64) {
    let q = if n >= NORMAL_CI_MIN_REPLICAS {
        Z95
    } else {
        t_quantile_975(n.saturating_sub(1) as usize)
    };
    (mean - q * se, mean + q * se)
}

/// Wilson score interval for a binomial proportion at 95%.
pub fn wilson95(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_has_zero_residual() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!(f.rss < 1e-20);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_standard_error_matches_hand_computation() {
        // x = 0..4, y = (0, 1, 1, 3, 4): Sxx = 10, Sxy = 10, residuals (0.2, 0.2, -0.8, 0.2, 0.2)
        let f = fit_line(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0, 1.0, 1.0, 3.0, 4.0]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!((f.intercept + 0.2).abs() < 1e-12);
        assert!((f.rss - 0.8).abs() < 1e-12);
        assert!((f.slope_se - (0.8f64 / 3.0 / 10.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn t_quantiles() {
        assert!((t_quantile_975(1) - 12.706_204_736).abs() < 1e-6);
        assert!((t_quantile_975(30) - 2.042_272_456).abs() < 1e-6);
    }

    #[test]
    fn two_sample_interval_uses_t() {
        let (lo, hi) = mean_ci95(1.0, 0.5, 2);
        assert!((hi - 1.0 - 12.706_204_736 * 0.5).abs() < 1e-6);
        assert!((1.0 - lo - (hi - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson95(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson95(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }
}
