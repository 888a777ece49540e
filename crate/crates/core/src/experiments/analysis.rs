//! Estimators built on ensemble statistics.

use serde::{Deserialize, Serialize};

use super::{EnsembleConfig, EnsembleStats, Histogram, HorizonStats, RunOptions, Summary};
use crate::error::{Error, Result};
use crate::stats::{fit_line, wilson95, LineFit};

/// `max(1, ln t)`.
pub fn log_t(t: u64) -> f64 {
    (t as f64).ln().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnsRow {
    pub t: u64,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub se: f64,
    pub replicas: u64,
}

impl ReturnsRow {
    pub fn half_width(&self) -> f64 {
        (self.ci_hi - self.ci_lo) / 2.0
    }
}

/// Mean and 95% interval of `V(t; 0)` per horizon.
pub fn returns_table(stats: &EnsembleStats) -> Vec<ReturnsRow> {
    stats
        .horizons
        .iter()
        .map(|h| {
            let s = h.v0().summary();
            ReturnsRow {
                t: h.t,
                mean: s.mean,
                ci_lo: s.ci_lo,
                ci_hi: s.ci_hi,
                se: s.se,
                replicas: h.v0().count,
            }
        })
        .collect()
}

pub fn estimate_returns(config: &EnsembleConfig, opts: RunOptions<'_>) -> Result<Vec<ReturnsRow>> {
    Ok(returns_table(&super::run_ensemble(config, opts)?))
}

/// Growth of the mean from the first to the last horizon, in units of the
/// larger of the two 95% half-widths.
pub fn growth_in_half_widths(rows: &[ReturnsRow]) -> Option<f64> {
    let (first, last) = (rows.first()?, rows.last()?);
    let hw = first.half_width().max(last.half_width());
    Some((last.mean - first.mean) / hw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// `a sqrt(log t) + b`
    SqrtLog,
    /// `a log t + b`
    Log,
    /// `b`
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model: Model,
    pub a: f64,
    pub b: f64,
    pub a_se: f64,
    pub rss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub fits: Vec<ModelFit>,
    pub winner: Model,
    pub horizons: usize,
}

impl RegressionResult {
    pub fn fit(&self, m: Model) -> &ModelFit {
        self.fits
            .iter()
            .find(|f| f.model == m)
            .expect("all models fitted")
    }

    /// The winning model's residual sum is strictly below both others.
    pub fn strictly_best(&self, m: Model) -> bool {
        let r = self.fit(m).rss;
        self.fits.iter().filter(|f| f.model != m).all(|f| r < f.rss)
    }
}

pub const FIT_MIN_HORIZONS: usize = 5;

/// Unweighted least-squares fits of `y` against `sqrt(log t)`, `log t` and a
/// constant; the winner has the smallest residual sum of squares.
pub fn fit_scaling(points: &[(u64, f64)]) -> Result<RegressionResult> {
    if points.len() < FIT_MIN_HORIZONS {
        return Err(Error::Precondition(format!(
            "{} horizons; at least {FIT_MIN_HORIZONS} are needed",
            points.len()
        )));
    }
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ls: Vec<f64> = points.iter().map(|p| log_t(p.0)).collect();
    let sq: Vec<f64> = ls.iter().map(|l| l.sqrt()).collect();
    let from_line = |model, f: LineFit| ModelFit {
        model,
        a: f.slope,
        b: f.intercept,
        a_se: f.slope_se,
        rss: f.rss,
    };
    let sqrt_fit = from_line(Model::SqrtLog, fit_line(&sq, &ys)?);
    let log_fit = from_line(Model::Log, fit_line(&ls, &ys)?);
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let constant = ModelFit {
        model: Model::Constant,
        a: 0.0,
        b: mean,
        a_se: 0.0,
        rss: ys.iter().map(|y| (y - mean) * (y - mean)).sum(),
    };
    let fits = vec![sqrt_fit, log_fit, constant];
    let winner = fits
        .iter()
        .min_by(|a, b| a.rss.total_cmp(&b.rss))
        .map(|f| f.model)
        .expect("three fits");
    Ok(RegressionResult {
        fits,
        winner,
        horizons: points.len(),
    })
}

pub fn fit_returns(rows: &[ReturnsRow]) -> Result<RegressionResult> {
    fit_scaling(&rows.iter().map(|r| (r.t, r.mean)).collect::<Vec<_>>())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub lambda: f64,
    /// Integer threshold `k`; the event is `X > k`.
    pub threshold: u64,
    pub count: u64,
    pub survival: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Empirical survival of a nonnegative integer statistic on the grid
/// `lambda_k = k / scale`, with fits of `ln S` against `lambda` and `lambda^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalReport {
    pub t: u64,
    pub samples: u64,
    pub scale: f64,
    pub points: Vec<SurvivalPoint>,
    /// Points with at least this many exceedances enter the fits.
    pub min_count_for_fit: u64,
    pub fit_lambda: Option<LineFit>,
    pub fit_lambda_sq: Option<LineFit>,
    /// First grid value with an empty tail.
    pub empty_beyond: Option<f64>,
}

impl SurvivalReport {
    /// Upper end of the 95% interval of the `lambda` slope is below 0.
    pub fn lambda_slope_negative(&self) -> bool {
        self.fit_lambda
            .map(|f| f.slope_ci95().1 < 0.0)
            .unwrap_or(false)
    }
}

pub const SURVIVAL_FIT_MIN_COUNT: u64 = 10;

pub fn survival_report(t: u64, hist: &Histogram, scale: f64) -> Result<SurvivalReport> {
    let samples = hist.total();
    if samples == 0 {
        return Err(Error::Precondition("empty histogram".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::Precondition(format!(
            "scale {scale} must be positive"
        )));
    }
    let mut points = Vec::new();
    let mut above = samples;
    let mut empty_beyond = None;
    for (k, &c) in hist.counts.iter().enumerate() {
        above -= c;
        let (ci_lo, ci_hi) = wilson95(above, samples);
        points.push(SurvivalPoint {
            lambda: k as f64 / scale,
            threshold: k as u64,
            count: above,
            survival: above as f64 / samples as f64,
            ci_lo,
            ci_hi,
        });
        if above == 0 {
            empty_beyond = Some(k as f64 / scale);
            break;
        }
    }
    let fitted: Vec<&SurvivalPoint> = points
        .iter()
        .filter(|p| p.count >= SURVIVAL_FIT_MIN_COUNT)
        .collect();
    let ys: Vec<f64> = fitted.iter().map(|p| p.survival.ln()).collect();
    let x1: Vec<f64> = fitted.iter().map(|p| p.lambda).collect();
    let x2: Vec<f64> = x1.iter().map(|l| l * l).collect();
    let (fit_lambda, fit_lambda_sq) = if fitted.len() >= 3 {
        (fit_line(&x1, &ys).ok(), fit_line(&x2, &ys).ok())
    } else {
        (None, None)
    };
    Ok(SurvivalReport {
        t,
        samples,
        scale,
        points,
        min_count_for_fit: SURVIVAL_FIT_MIN_COUNT,
        fit_lambda,
        fit_lambda_sq,
        empty_beyond,
    })
}

pub const TAIL_MIN_REPLICAS: u64 = 10_000;

/// `P(V(t; 0) > lambda sqrt(log t))` on the grid `lambda = k / sqrt(log t)`.
pub fn tail_estimator(t: u64, v0_hist: &Histogram) -> Result<SurvivalReport> {
    if v0_hist.total() < TAIL_MIN_REPLICAS {
        return Err(Error::Precondition(format!(
            "{} replicas; the tail estimator needs at least {TAIL_MIN_REPLICAS}",
            v0_hist.total()
        )));
    }
    survival_report(t, v0_hist, log_t(t).sqrt())
}

/// `P(l > lambda log t)` for the cylinder entry count.
pub fn cylinder_decay(h: &HorizonStats) -> Result<SurvivalReport> {
    if h.l_hist.total() == 0 {
        return Err(Error::Precondition("no cylinder counts recorded".into()));
    }
    survival_report(h.t, &h.l_hist, log_t(h.t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub t: u64,
    /// `N / (t / sqrt(log t))`
    pub n: Summary,
    /// `DF / (t / log t)`
    pub df: Summary,
    /// `F / (t / sqrt(log t))`
    pub f: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub rows: Vec<RatioRow>,
    pub factor: f64,
    /// max / min of the mean ratio across horizons.
    pub n_spread: f64,
    pub df_spread: f64,
    pub f_spread: f64,
}

impl RangeReport {
    pub fn n_bounded(&self) -> bool {
        self.n_spread < self.factor
    }

    pub fn df_bounded(&self) -> bool {
        self.df_spread < self.factor
    }

    pub fn f_bounded(&self) -> bool {
        self.f_spread < self.factor
    }
}

fn spread(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    hi / lo
}

/// Ratios at horizons `t >= t_min`; a sequence counts as bounded when its
/// max/min spread is below `factor`.
pub fn range_and_floor_report(
    stats: &EnsembleStats,
    t_min: u64,
    factor: f64,
) -> Result<RangeReport> {
    let rows: Vec<RatioRow> = stats
        .horizons
        .iter()
        .filter(|h| h.t >= t_min)
        .map(|h| {
            let t = h.t as f64;
            let l = log_t(h.t);
            RatioRow {
                t: h.t,
                n: h.n.scaled_summary(t / l.sqrt()),
                df: h.df.scaled_summary(t / l),
                f: h.f.scaled_summary(t / l.sqrt()),
            }
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::Precondition(format!(
            "no horizon at or above {t_min}"
        )));
    }
    Ok(RangeReport {
        n_spread: spread(rows.iter().map(|r| r.n.mean)),
        df_spread: spread(rows.iter().map(|r| r.df.mean)),
        f_spread: spread(rows.iter().map(|r| r.f.mean)),
        rows,
        factor,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleRow {
    pub t: u64,
    /// Ensemble mean of `z + N_new - F/5`.
    pub mean: f64,
    pub se: f64,
}

impl MartingaleRow {
    pub fn within_3se(&self) -> bool {
        self.mean.abs() <= 3.0 * self.se
    }
}

pub fn martingale_table(stats: &EnsembleStats) -> Vec<MartingaleRow> {
    stats
        .horizons
        .iter()
        .map(|h| {
            let s = h.m_x5.scaled_summary(5.0);
            MartingaleRow {
                t: h.t,
                mean: s.mean,
                se: s.se,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t: u64,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `(mean_a - mean_b) / sqrt(se_a^2 + se_b^2)`
    pub z: f64,
}

/// Horizon-by-horizon two-sample comparison of `V(t; 0)`.
pub fn compare_returns(a: &[ReturnsRow], b: &[ReturnsRow]) -> Result<Vec<ComparisonRow>> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.t != y.t) {
        return Err(Error::ConfigMismatch("horizon schedules differ".into()));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| {
            let s = (x.se * x.se + y.se * y.se).sqrt();
            let d = x.mean - y.mean;
            ComparisonRow {
                t: x.t,
                mean_a: x.mean,
                mean_b: y.mean,
                z: if s > 0.0 {
                    d / s
                } else if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_ensemble, Mode};

    fn geometric(a: u32, b: u32) -> Vec<u64> {
        (a..=b).map(|k| 1u64 << k).collect()
    }

    #[test]
    fn log_convention_floors_at_one() {
        assert_eq!(log_t(1), 1.0);
        assert_eq!(log_t(2), 1.0);
        assert!((log_t(1 << 20) - 20.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn synthetic_sqrt_log_is_recovered() {
        let pts: Vec<(u64, f64)> = geometric(10, 24)
            .into_iter()
            .map(|t| (t, 2.0 * log_t(t).sqrt()))
            .collect();
        let r = fit_scaling(&pts).unwrap();
        assert_eq!(r.winner, Model::SqrtLog);
        assert!(r.fit(Model::SqrtLog).rss < 1e-20);
        assert!((r.fit(Model::SqrtLog).a - 2.0).abs() < 1e-10);
        assert!(r.strictly_best(Model::SqrtLog));
    }

    #[test]
    fn synthetic_log_is_recovered() {
        let pts: Vec<(u64, f64)> = geometric(10, 24)
            .into_iter()
            .map(|t| (t, log_t(t)))
            .collect();
        assert_eq!(fit_scaling(&pts).unwrap().winner, Model::Log);
        let flat: Vec<(u64, f64)> = geometric(10, 24).into_iter().map(|t| (t, 3.0)).collect();
        let r = fit_scaling(&flat).unwrap();
        assert_eq!(r.fit(Model::Constant).rss, 0.0);
    }

    #[test]
    fn fit_needs_five_distinct_horizons() {
        let pts: Vec<(u64, f64)> = geometric(10, 13).into_iter().map(|t| (t, 1.0)).collect();
        assert!(matches!(fit_scaling(&pts), Err(Error::Precondition(_))));
        let tiny: Vec<(u64, f64)> = (1..=5).map(|t| (t / 10 + 1, t as f64)).collect();
        assert!(matches!(fit_scaling(&tiny), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn survival_is_monotone_and_starts_at_positive_mass() {
        let mut h = Histogram::default();
        for k in [1, 1, 2, 3, 3, 3, 5, 8, 13, 0] {
            h.push(k);
        }
        let r = survival_report(100, &h, 2.0).unwrap();
        assert_eq!(r.points[0].lambda, 0.0);
        assert_eq!(r.points[0].survival, 0.9);
        assert!(r.points.windows(2).all(|w| w[1].survival <= w[0].survival));
        assert_eq!(r.empty_beyond, Some(6.5));
        assert!(r
            .points
            .iter()
            .all(|p| p.ci_lo <= p.survival && p.survival <= p.ci_hi));
    }

    #[test]
    fn geometric_tail_gives_negative_slope() {
        // P(X = k) = 2^-(k+1): ln S(k) = -(k+1) ln 2, exactly linear
        let mut h = Histogram::default();
        for k in 0..14 {
            for _ in 0..(1u64 << (14 - k)) {
                h.push(k);
            }
        }
        let r = survival_report(1, &h, 1.0).unwrap();
        let f = r.fit_lambda.unwrap();
        assert!((f.slope + 2f64.ln()).abs() < 0.05);
        assert!(r.lambda_slope_negative());
        assert!(r.fit_lambda_sq.is_some());
    }

    #[test]
    fn tail_estimator_requires_enough_replicas() {
        let mut h = Histogram::default();
        h.push(1);
        assert!(tail_estimator(1 << 10, &h).is_err());
    }

    #[test]
    fn small_ensemble_tables() {
        let cfg = EnsembleConfig::new(geometric(4, 10), 64, 21).with_cylinder(2);
        let stats = run_ensemble(&cfg, RunOptions::default()).unwrap();
        let rows = returns_table(&stats);
        assert_eq!(rows.len(), 7);
        // same replicas at every horizon: V is a prefix count
        assert!(rows.windows(2).all(|w| w[1].mean >= w[0].mean));
        assert!(rows
            .iter()
            .all(|r| r.ci_lo <= r.mean && r.mean <= r.ci_hi && r.replicas == 64));
        let range = range_and_floor_report(&stats, 1 << 6, 3.0).unwrap();
        assert_eq!(range.rows.len(), 5);
        assert!(range
            .rows
            .iter()
            .all(|r| r.df.mean * (r.t as f64 / log_t(r.t))
                <= r.n.mean * (r.t as f64 / log_t(r.t).sqrt())));
        let decay = cylinder_decay(stats.horizons.last().unwrap()).unwrap();
        assert!(decay.points[0].survival == 1.0);
        assert_eq!(martingale_table(&stats).len(), 7);
    }

    #[test]
    fn two_replicas_give_a_finite_interval() {
        let cfg = EnsembleConfig::new(vec![1024], 2, 7);
        let rows = estimate_returns(&cfg, RunOptions::default()).unwrap();
        assert!(rows[0].ci_lo.is_finite() && rows[0].ci_hi.is_finite());
        assert!(rows[0].ci_lo <= rows[0].ci_hi);
    }

    #[test]
    fn comparison_requires_matching_schedules() {
        let a = estimate_returns(
            &EnsembleConfig::new(vec![8, 16], 4, 1),
            RunOptions::default(),
        )
        .unwrap();
        let b = estimate_returns(
            &EnsembleConfig::new(vec![8, 32], 4, 1),
            RunOptions::default(),
        )
        .unwrap();
        assert!(compare_returns(&a, &b).is_err());
        let c = estimate_returns(
            &EnsembleConfig::new(vec![8, 16], 4, 1).with_mode(Mode::Symmetric),
            RunOptions::default(),
        )
        .unwrap();
        assert_eq!(compare_returns(&a, &c).unwrap().len(), 2);
    }
}
