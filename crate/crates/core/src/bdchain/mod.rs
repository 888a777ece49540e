//! Nearest-neighbor chains on `{1, ..., n}` and their hit-`n`-before-`1`
//! probabilities.
//!
//! From an interior state `i` the chain steps to `i + 1` with probability
//! `q_i` and to `i - 1` otherwise; states `1` and `n` absorb. With
//! `rho_i = (1 - q_i) / q_i` the hitting probability from `j` is
//!
//! ```text
//! r_j = sum_{k=1}^{j-1} prod_{i=2}^{k} rho_i  /  sum_{k=1}^{n-1} prod_{i=2}^{k} rho_i
//! ```
//!
//! Three independent routes compute it: the product formula in log space
//! ([`hit_probs_exact`]), the same formula in exact rational arithmetic
//! ([`RationalChain::hit_probs`]), and a direct tridiagonal solve of the
//! harmonic equations ([`hit_probs_solve`]), which serves as the oracle.

mod checks;

pub use checks::*;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use num_traits::ToPrimitive;

/// Exact probabilities and hitting probabilities.
pub type Rational = BigRational;

use crate::error::{Error, Result};

/// Chains up to this many states are handled in exact rational arithmetic
/// by the checks.
pub const RATIONAL_MAX_N: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct BdChain {
    n: usize,
    /// `q[i - 2]` is the up-probability of interior state `i`.
    q: Vec<f64>,
    start: usize,
}

impl BdChain {
    pub fn new(n: usize, q: Vec<f64>, start: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidChain(format!("n = {n} < 3")));
        }
        if q.len() != n - 2 {
            return Err(Error::InvalidChain(format!(
                "expected {} interior probabilities, got {}",
                n - 2,
                q.len()
            )));
        }
        if let Some((i, &v)) = q.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v < 1.0)) {
            return Err(Error::InvalidChain(format!(
                "q_{} = {v} is not in (0, 1)",
                i + 2
            )));
        }
        if !(1..=n).contains(&start) {
            return Err(Error::InvalidChain(format!(
                "start {start} outside 1..={n}"
            )));
        }
        Ok(BdChain { n, q, start })
    }

    pub fn constant(n: usize, q: f64, start: usize) -> Result<Self> {
        Self::new(n, vec![q; n.saturating_sub(2)], start)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Up-probabilities of states `2..=n-1`.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Up-probability of interior state `i`.
    pub fn q_at(&self, i: usize) -> f64 {
        self.q[i - 2]
    }

    pub fn with_start(&self, start: usize) -> Result<Self> {
        Self::new(self.n, self.q.clone(), start)
    }

    pub fn with_q_at(&self, i: usize, value: f64) -> Result<Self> {
        let mut q = self.q.clone();
        q[i - 2] = value;
        Self::new(self.n, q, self.start)
    }

    /// The same chain with every probability read as an exact rational.
    pub fn to_rational(&self) -> RationalChain {
        let q = self
            .q
            .iter()
            .map(|&v| BigRational::from_float(v).expect("finite probability"))
            .collect();
        RationalChain {
            n: self.n,
            q,
            start: self.start,
        }
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|&t| (t - max).exp()).sum::<f64>().ln()
}

/// Natural logs of the partial products `prod_{i=2}^{k} rho_i`, `k = 1..n-1`.
fn log_weights(chain: &BdChain) -> Vec<f64> {
    let mut out = Vec::with_capacity(chain.n - 1);
    let mut acc = 0.0;
    out.push(acc);
    for &q in &chain.q {
        acc += (-q).ln_1p() - q.ln();
        out.push(acc);
    }
    out
}

/// `ln r_j` for `j = 1..=n` (index `j - 1`); `-inf` at `j = 1`.
pub fn log_hit_probs(chain: &BdChain) -> Vec<f64> {
    let w = log_weights(chain);
    let total = log_sum_exp(&w);
    let mut out = Vec::with_capacity(chain.n);
    out.push(f64::NEG_INFINITY);
    // running log-sum-exp of w[0..j-1], rebased to the running maximum
    let mut max = f64::NEG_INFINITY;
    let mut scaled = 0.0;
    for &wk in &w {
        if wk > max {
            scaled = scaled * (max - wk).exp() + 1.0;
            max = wk;
        } else {
            scaled += (wk - max).exp();
        }
        out.push(max + scaled.ln() - total);
    }
    *out.last_mut().unwrap() = 0.0;
    out
}

/// `r_j` for `j = 1..=n` (index `j - 1`) by the product formula.
pub fn hit_probs_exact(chain: &BdChain) -> Vec<f64> {
    log_hit_probs(chain).into_iter().map(f64::exp).collect()
}

/// Probability of hitting `n` before `1` from the chain's start.
pub fn hit_prob_exact(chain: &BdChain) -> f64 {
    hit_probs_exact(chain)[chain.start - 1]
}

/// `r_j` for `j = 1..=n` by tridiagonal elimination of
/// `r_i = q_i r_{i+1} + (1 - q_i) r_{i-1}`, `r_1 = 0`, `r_n = 1`.
pub fn hit_probs_solve(chain: &BdChain) -> Vec<f64> {
    let n = chain.n;
    let m = n - 2;
    // unknowns r_2..r_{n-1}; row k is state k + 2:
    // -(1 - q) r_{k+1} + r_{k+2} - q r_{k+3} = 0.
    // Forward elimination leaves r_{k+2} = u_k r_{k+3} + d_k. The pivot
    // 1 - (1 - q) u_{k-1} is formed as q + (1 - q)(1 - u_{k-1}) with the
    // complement 1 - u carried along, so no step subtracts nearby numbers.
    let mut u = vec![0.0; m];
    let mut d_prime = vec![0.0; m];
    let mut comp_prev = 1.0;
    let mut d_prev = 0.0;
    for k in 0..m {
        let q = chain.q[k];
        let pivot = q + (1.0 - q) * comp_prev;
        assert!(pivot > 0.0, "singular tridiagonal system for a valid chain");
        u[k] = q / pivot;
        let comp = (1.0 - q) * comp_prev / pivot;
        let d = if k == m - 1 { q } else { 0.0 };
        d_prime[k] = (d + (1.0 - q) * d_prev) / pivot;
        comp_prev = comp;
        d_prev = d_prime[k];
    }
    let mut r = vec![0.0; n];
    r[n - 1] = 1.0;
    let mut next = 1.0;
    for k in (0..m).rev() {
        let v = if k == m - 1 {
            d_prime[k]
        } else {
            d_prime[k] + u[k] * next
        };
        r[k + 1] = v;
        next = v;
    }
    r
}

pub fn hit_prob_solve(chain: &BdChain) -> f64 {
    hit_probs_solve(chain)[chain.start - 1]
}

/// A chain with exact rational up-probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalChain {
    n: usize,
    q: Vec<BigRational>,
    start: usize,
}

impl RationalChain {
    pub fn new(n: usize, q: Vec<BigRational>, start: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidChain(format!("n = {n} < 3")));
        }
        if q.len() != n - 2 {
            return Err(Error::InvalidChain(format!(
                "expected {} interior probabilities, got {}",
                n - 2,
                q.len()
            )));
        }
        if let Some((i, v)) = q
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > BigRational::zero() && **v < BigRational::one()))
        {
            return Err(Error::InvalidChain(format!(
                "q_{} = {v} is not in (0, 1)",
                i + 2
            )));
        }
        if !(1..=n).contains(&start) {
            return Err(Error::InvalidChain(format!(
                "start {start} outside 1..={n}"
            )));
        }
        Ok(RationalChain { n, q, start })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn q(&self) -> &[BigRational] {
        &self.q
    }

    pub fn to_f64(&self) -> Result<BdChain> {
        let q = self
            .q
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect();
        BdChain::new(self.n, q, self.start)
    }

    /// Exact `r_j` for `j = 1..=n` (index `j - 1`).
    pub fn hit_probs(&self) -> Vec<BigRational> {
        let mut weights = Vec::with_capacity(self.n - 1);
        let mut acc = BigRational::one();
        weights.push(acc.clone());
        for q in &self.q {
            acc = acc * ((BigRational::one() - q) / q);
            weights.push(acc.clone());
        }
        let total: BigRational = weights.iter().fold(BigRational::zero(), |s, w| s + w);
        let mut out = Vec::with_capacity(self.n);
        let mut partial = BigRational::zero();
        out.push(partial.clone());
        for w in &weights {
            partial = partial + w;
            out.push(&partial / &total);
        }
        out
    }

    pub fn hit_prob(&self) -> BigRational {
        self.hit_probs().swap_remove(self.start - 1)
    }
}

/// Parse `"p/q"`, an integer, or a decimal literal as an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidChain(format!("cannot parse probability {text:?}"));
    if let Some((a, b)) = t.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(num, den));
    }
    let num: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(num))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn symmetric_three_state_chain() {
        let c = BdChain::constant(3, 0.5, 2).unwrap();
        assert!((hit_prob_exact(&c) - 0.5).abs() < 1e-15);
        assert!((hit_prob_solve(&c) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn four_states_one_third_exact() {
        let c = RationalChain::new(4, vec![rat(1, 3); 2], 2).unwrap();
        let r = c.hit_probs();
        assert_eq!(r, vec![rat(0, 1), rat(1, 7), rat(3, 7), rat(1, 1)]);
    }

    #[test]
    fn four_states_one_third_float_routes() {
        let c = BdChain::constant(4, 1.0 / 3.0, 2).unwrap();
        let e = hit_probs_exact(&c);
        let s = hit_probs_solve(&c);
        assert!((e[1] - 1.0 / 7.0).abs() < 1e-15);
        assert!((s[1] - 1.0 / 7.0).abs() < 1e-15);
        assert!((s[2] - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn boundaries_absorb() {
        let c = BdChain::new(6, vec![0.2, 0.7, 0.4, 0.9], 1).unwrap();
        assert_eq!(hit_prob_exact(&c), 0.0);
        assert_eq!(hit_prob_solve(&c), 0.0);
        let c = c.with_start(6).unwrap();
        assert_eq!(hit_prob_exact(&c), 1.0);
        assert_eq!(hit_prob_solve(&c), 1.0);
    }

    #[test]
    fn constant_chain_closed_form() {
        for &q in &[0.1, 0.3, 0.45, 0.6] {
            let n = 20;
            let rho: f64 = (1.0 - q) / q;
            let c = BdChain::constant(n, q, 2).unwrap();
            let r = hit_probs_exact(&c);
            for j in 1..=n {
                let closed = (rho.powi(j as i32 - 1) - 1.0) / (rho.powi(n as i32 - 1) - 1.0);
                assert!(
                    (r[j - 1] - closed).abs() <= 1e-12 * closed.max(1e-300),
                    "q={q} j={j}"
                );
            }
        }
    }

    #[test]
    fn invalid_probabilities_rejected() {
        assert!(BdChain::new(4, vec![0.5, 1.5], 2).is_err());
        assert!(BdChain::new(4, vec![0.0, 0.5], 2).is_err());
        assert!(BdChain::new(4, vec![0.5], 2).is_err());
        assert!(BdChain::new(2, vec![], 1).is_err());
        assert!(BdChain::new(4, vec![0.5, 0.5], 5).is_err());
        assert!(RationalChain::new(4, vec![rat(3, 2), rat(1, 2)], 2).is_err());
    }

    #[test]
    fn log_probs_survive_underflow() {
        let c = BdChain::constant(2000, 0.1, 2).unwrap();
        let lr = log_hit_probs(&c);
        // r_2 = (rho - 1) / (rho^(n-1) - 1) with rho = 9
        let expected = 8f64.ln() - 1999.0 * 9f64.ln();
        assert!((lr[1] - expected).abs() < 1e-9 * expected.abs());
        assert_eq!(hit_probs_exact(&c)[1], 0.0);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational(" 0.25 ").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("1").unwrap(), rat(1, 1));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn float_to_rational_is_exact() {
        let c = BdChain::new(5, vec![0.3, 0.1, 0.7], 3).unwrap();
        let rc = c.to_rational();
        assert_eq!(rc.to_f64().unwrap(), c);
    }
}
