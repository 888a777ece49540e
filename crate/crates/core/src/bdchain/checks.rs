//! Comparison, growth and perturbation properties of hitting probabilities.
//!
//! The exact checks avoid rational division altogether. Writing
//! `q_i = a_i / b_i`, the integers
//!
//! ```text
//! W_k = prod_{i=2}^{k} (b_i - a_i) * prod_{i=k+1}^{n-1} a_i,   k = 1..n-1
//! ```
//!
//! are proportional to the partial products of `rho_i`, so `r_j = S_j / D`
//! with `S_j = W_1 + ... + W_{j-1}` and `D = S_n`. Every inequality between
//! hitting probabilities becomes an inequality between big integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    hit_probs_exact, hit_probs_solve, log_hit_probs, BdChain, RationalChain, RATIONAL_MAX_N,
};
use crate::error::{Error, Result};
use crate::rng::replica_rng;
use crate::stats::{fit_line, LineFit};

impl RationalChain {
    /// Integer partial sums `S_1..S_n` with `r_j = S_j / S_n`.
    pub fn integer_partial_sums(&self) -> Vec<BigInt> {
        let m = self.q.len();
        let a: Vec<&BigInt> = self.q.iter().map(|q| q.numer()).collect();
        let up: Vec<BigInt> = self.q.iter().map(|q| q.denom() - q.numer()).collect();
        // suffix[k] = prod_{i >= k} a_i over interior indices
        let mut suffix = vec![BigInt::from(1); m + 1];
        for k in (0..m).rev() {
            suffix[k] = &suffix[k + 1] * a[k];
        }
        let mut sums = Vec::with_capacity(self.n);
        let mut s = BigInt::zero();
        sums.push(s.clone());
        let mut prefix = BigInt::from(1);
        for k in 0..=m {
            s += &prefix * &suffix[k];
            sums.push(s.clone());
            if k < m {
                prefix *= &up[k];
            }
        }
        sums
    }
}

fn to_f64_ratio(num: &BigInt, den: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    BigRational::new(num.clone(), den.clone())
        .to_f64()
        .unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub r_a: f64,
    pub r_b: f64,
    pub margin: f64,
    pub holds: bool,
    /// Comparison done in exact integer arithmetic.
    pub exact: bool,
}

/// For chains with `q^A_i <= q^B_i` everywhere and a common start, check
/// `r^A <= r^B`.
pub fn dominance_check(a: &BdChain, b: &BdChain) -> Result<DominanceReport> {
    if a.n != b.n || a.start != b.start {
        return Err(Error::Precondition("chains differ in size or start".into()));
    }
    if let Some(i) = a.q.iter().zip(&b.q).position(|(x, y)| x > y) {
        return Err(Error::Precondition(format!(
            "q^A_{} > q^B_{}",
            i + 2,
            i + 2
        )));
    }
    let j = a.start;
    if a.n <= RATIONAL_MAX_N {
        let sa = a.to_rational().integer_partial_sums();
        let sb = b.to_rational().integer_partial_sums();
        let n = a.n;
        let lhs = &sa[j - 1] * &sb[n - 1];
        let rhs = &sb[j - 1] * &sa[n - 1];
        let r_a = to_f64_ratio(&sa[j - 1], &sa[n - 1]);
        let r_b = to_f64_ratio(&sb[j - 1], &sb[n - 1]);
        Ok(DominanceReport {
            r_a,
            r_b,
            margin: r_b - r_a,
            holds: lhs <= rhs,
            exact: true,
        })
    } else {
        let la = log_hit_probs(a)[j - 1];
        let lb = log_hit_probs(b)[j - 1];
        let holds = la <= lb || (la - lb) <= 1e-12 * la.abs().max(1.0);
        let (r_a, r_b) = (la.exp(), lb.exp());
        Ok(DominanceReport {
            r_a,
            r_b,
            margin: r_b - r_a,
            holds,
            exact: false,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub qbar: f64,
    /// `c = (1 - 2 qbar) / (1 - qbar)`.
    pub c: f64,
    /// Smallest `r_{j+1} / r_j` over interior `j`.
    pub min_ratio: f64,
    pub worst_j: usize,
    /// Interior states where `r_{j+1} >= r_j (1 + c)` fails.
    pub violations: Vec<usize>,
    pub exact: bool,
}

impl GrowthReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// With every `q_i <= qbar < 1/2`, check `r_{j+1} >= r_j (1 + c)` for all
/// `j = 2..n-1` where `c = (1 - 2 qbar) / (1 - qbar)`.
pub fn growth_ratio_check(chain: &BdChain, qbar: f64) -> Result<GrowthReport> {
    if !(qbar > 0.0 && qbar < 0.5) {
        return Err(Error::Precondition(format!(
            "qbar = {qbar} not in (0, 1/2)"
        )));
    }
    if let Some(i) = chain.q.iter().position(|&q| q > qbar) {
        return Err(Error::Precondition(format!(
            "q_{} = {} exceeds qbar = {qbar}",
            i + 2,
            chain.q[i]
        )));
    }
    let n = chain.n;
    let c = (1.0 - 2.0 * qbar) / (1.0 - qbar);
    let mut violations = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut worst_j = 2;
    let exact = n <= RATIONAL_MAX_N;
    if exact {
        let s = chain.to_rational().integer_partial_sums();
        let qb = BigRational::from_float(qbar).expect("finite");
        let (qa, qd) = (qb.numer().clone(), qb.denom().clone());
        // r_{j+1} >= r_j (1 + c)  <=>  S_{j+1} (b - a) >= S_j (2b - 3a) for qbar = a / b
        let left_factor = &qd - &qa;
        let right_factor = BigInt::from(2) * &qd - BigInt::from(3) * &qa;
        for j in 2..n {
            let lhs = &s[j] * &left_factor;
            let rhs = &s[j - 1] * &right_factor;
            if lhs < rhs {
                violations.push(j);
            }
            let ratio = to_f64_ratio(&s[j], &s[j - 1]);
            if ratio < min_ratio {
                min_ratio = ratio;
                worst_j = j;
            }
        }
    } else {
        let lr = log_hit_probs(chain);
        let lc = c.ln_1p();
        for j in 2..n {
            let d = lr[j] - lr[j - 1];
            if d < lc - 1e-12 {
                violations.push(j);
            }
            if d.exp() < min_ratio {
                min_ratio = d.exp();
                worst_j = j;
            }
        }
    }
    Ok(GrowthReport {
        qbar,
        c,
        min_ratio,
        worst_j,
        violations,
        exact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbReport {
    pub j: usize,
    pub p: f64,
    pub qbar: f64,
    pub log_r: f64,
    /// Smallest `C >= 1` with
    /// `r_j <= C (p/(1-p))^(n-j) prod_i (1 + C (q_i - p))`,
    /// or `None` when no `C <= PERTURB_C_MAX` works.
    pub c_impl: Option<f64>,
}

pub const PERTURB_C_MAX: f64 = 1e6;
pub const PERTURB_C_TOL: f64 = 1e-9;

fn check_perturb_preconditions(chain: &BdChain, p: f64, qbar: f64) -> Result<()> {
    if !(p > 0.0 && p <= qbar && qbar < 0.5) {
        return Err(Error::Precondition(format!(
            "need 0 < p <= qbar < 1/2, got p = {p}, qbar = {qbar}"
        )));
    }
    if let Some(i) = chain.q.iter().position(|&q| q < p || q > qbar) {
        return Err(Error::Precondition(format!(
            "q_{} = {} outside [{p}, {qbar}]",
            i + 2,
            chain.q[i]
        )));
    }
    Ok(())
}

fn implied_constant(chain: &BdChain, j: usize, p: f64, log_r: f64) -> Option<f64> {
    let n = chain.n;
    let base = (n - j) as f64 * (p / (1.0 - p)).ln();
    let slack = |c: f64| -> f64 {
        c.ln() + base + chain.q.iter().map(|&q| (c * (q - p)).ln_1p()).sum::<f64>() - log_r
    };
    if slack(1.0) >= 0.0 {
        return Some(1.0);
    }
    if slack(PERTURB_C_MAX) < 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (1.0, PERTURB_C_MAX);
    while hi - lo > PERTURB_C_TOL {
        let mid = 0.5 * (lo + hi);
        if slack(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Implied constant of the perturbation bound at the chain's start.
/// The product runs over the interior states `2..n-1`.
pub fn perturb_bound_report(chain: &BdChain, p: f64, qbar: f64) -> Result<PerturbReport> {
    check_perturb_preconditions(chain, p, qbar)?;
    let j = chain.start;
    let log_r = log_hit_probs(chain)[j - 1];
    let c_impl = implied_constant(chain, j, p, log_r);
    Ok(PerturbReport {
        j,
        p,
        qbar,
        log_r,
        c_impl,
    })
}

/// Largest implied constant over all starting states `2..=n`.
pub fn perturb_constant_sup(chain: &BdChain, p: f64, qbar: f64) -> Result<Option<f64>> {
    check_perturb_preconditions(chain, p, qbar)?;
    let lr = log_hit_probs(chain);
    let mut sup: f64 = 1.0;
    for j in 2..=chain.n {
        match implied_constant(chain, j, p, lr[j - 1]) {
            Some(c) => sup = sup.max(c),
            None => return Ok(None),
        }
    }
    Ok(Some(sup))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SitePerturbation {
    pub site: usize,
    pub delta: f64,
    /// `max_j (r'_j / r_j - 1) / delta` over `j` with `r_j > 0`.
    pub implied_constant: f64,
}

impl SitePerturbation {
    /// Whether `r'_j <= r_j (1 + c * delta)` holds for every `j` with this `c`.
    pub fn holds_with(&self, c: f64) -> bool {
        self.implied_constant <= c
    }
}

/// Effect of raising `q_site` to `new_q`.
pub fn single_site_perturbation(
    chain: &BdChain,
    site: usize,
    new_q: f64,
) -> Result<SitePerturbation> {
    if !(2..chain.n).contains(&site) {
        return Err(Error::Precondition(format!("site {site} is not interior")));
    }
    let old = chain.q_at(site);
    if !(new_q > old) {
        return Err(Error::Precondition(format!(
            "new q {new_q} must exceed {old}"
        )));
    }
    let perturbed = chain.with_q_at(site, new_q)?;
    let lr = log_hit_probs(chain);
    let lr2 = log_hit_probs(&perturbed);
    let delta = new_q - old;
    let implied = (1..chain.n)
        .filter(|&k| lr[k].is_finite())
        .map(|k| (lr2[k] - lr[k]).exp_m1() / delta)
        .fold(0.0f64, f64::max);
    Ok(SitePerturbation {
        site,
        delta,
        implied_constant: implied,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub p: f64,
    pub qbar: f64,
    /// `(n, sup_j C_impl)` for every sampled chain.
    pub points: Vec<(usize, f64)>,
    pub fit: LineFit,
    pub slope_ci95: (f64, f64),
    /// Chains for which no admissible constant was found.
    pub unbounded: usize,
}

impl TrendReport {
    /// No significant increase of the implied constant with `n`.
    pub fn no_increasing_trend(&self) -> bool {
        self.unbounded == 0 && self.slope_ci95.0 <= 0.0
    }
}

/// Chain with up-probabilities drawn uniformly from `[lo, hi]`.
pub fn random_chain<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64, start: usize) -> BdChain {
    let q = (0..n - 2)
        .map(|_| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
        .collect();
    BdChain::new(n, q, start).expect("random chain parameters are valid")
}

/// Implied perturbation constants across chain sizes for fixed `(p, qbar)`,
/// with a least-squares trend in `n`.
pub fn perturb_trend(
    p: f64,
    qbar: f64,
    sizes: &[usize],
    chains_per_size: usize,
    seed: u64,
) -> Result<TrendReport> {
    let mut points = Vec::new();
    let mut unbounded = 0;
    for &n in sizes {
        let mut rng = replica_rng(seed, n as u64);
        for _ in 0..chains_per_size {
            let chain = random_chain(&mut rng, n, p, qbar, n);
            match perturb_constant_sup(&chain, p, qbar)? {
                Some(c) => points.push((n, c)),
                None => unbounded += 1,
            }
        }
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, c)| c).collect();
    let fit = fit_line(&xs, &ys)?;
    let slope_ci95 = fit.slope_ci95();
    Ok(TrendReport {
        p,
        qbar,
        points,
        fit,
        slope_ci95,
        unbounded,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub chains: usize,
    pub violations: usize,
    /// Largest relative disagreement (exact-vs-solve sweeps only).
    pub max_rel_err: f64,
    /// First violating chain, for diagnostics.
    pub first_violation: Option<String>,
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Compare the product formula with the tridiagonal oracle on random chains
/// with `3 <= n <= max_n` and `q_i` uniform in `[0.05, 0.95]`.
pub fn sweep_exact_vs_solve(count: usize, max_n: usize, tol: f64, seed: u64) -> SweepReport {
    let mut rng = replica_rng(seed, 0);
    let mut report = SweepReport {
        chains: count,
        ..Default::default()
    };
    for _ in 0..count {
        let n = rng.gen_range(3..=max_n);
        let chain = random_chain(&mut rng, n, 0.05, 0.95, 2);
        let e = hit_probs_exact(&chain);
        let s = hit_probs_solve(&chain);
        let worst = e
            .iter()
            .zip(&s)
            .filter(|(a, b)| a.is_normal() || b.is_normal())
            .map(|(&a, &b)| rel_err(a, b))
            .fold(0.0, f64::max);
        report.max_rel_err = report.max_rel_err.max(worst);
        if worst > tol {
            report.violations += 1;
            report
                .first_violation
                .get_or_insert_with(|| format!("{chain:?}"));
        }
    }
    report
}

/// Random pairs with `q^A <= q^B` elementwise, `3 <= n <= max_n`.
pub fn sweep_dominance(count: usize, max_n: usize, seed: u64) -> Result<SweepReport> {
    let mut rng = replica_rng(seed, 1);
    let mut report = SweepReport {
        chains: count,
        ..Default::default()
    };
    for _ in 0..count {
        let n = rng.gen_range(3..=max_n);
        let start = rng.gen_range(1..=n);
        let a = random_chain(&mut rng, n, 0.02, 0.98, start);
        let qb: Vec<f64> =
            a.q.iter()
                .map(|&q| q + rng.gen::<f64>() * (0.98 - q))
                .collect();
        let b = BdChain::new(n, qb, start)?;
        let r = dominance_check(&a, &b)?;
        if !r.holds {
            report.violations += 1;
            report
                .first_violation
                .get_or_insert_with(|| format!("{a:?} vs {b:?}"));
        }
    }
    Ok(report)
}

/// The bound values used by the growth sweep.
pub const GROWTH_QBARS: [f64; 8] = [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45];

/// Random chains with `q_i` uniform in `(0, qbar]`, `qbar` cycling through
/// [`GROWTH_QBARS`], checked for the growth inequality.
pub fn sweep_growth(count: usize, max_n: usize, seed: u64) -> Result<SweepReport> {
    let mut rng = replica_rng(seed, 2);
    let mut report = SweepReport {
        chains: count,
        ..Default::default()
    };
    for k in 0..count {
        let qbar = GROWTH_QBARS[k % GROWTH_QBARS.len()];
        let n = rng.gen_range(3..=max_n);
        let q: Vec<f64> = (0..n - 2)
            .map(|_| qbar * (1.0 - rng.gen::<f64>()))
            .collect();
        let chain = BdChain::new(n, q, 2)?;
        let g = growth_ratio_check(&chain, qbar)?;
        if !g.holds() {
            report.violations += 1;
            report
                .first_violation
                .get_or_insert_with(|| format!("{chain:?} qbar={qbar}"));
        }
    }
    Ok(report)
}

/// `r_j` nondecreasing in `j` (exact).
pub fn is_monotone_in_start(chain: &RationalChain) -> bool {
    let s = chain.integer_partial_sums();
    s.windows(2).all(|w| !(&w[1] - &w[0]).is_negative())
}
