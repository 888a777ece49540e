use erw_core::bdchain::{
    dominance_check, growth_ratio_check, hit_probs_exact, hit_probs_solve, is_monotone_in_start,
    BdChain, Rational, RationalChain, ToPrimitive,
};
use proptest::prelude::*;

fn rat(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

/// Interior probabilities as small fractions `k / 64`, `1 <= k <= 63`.
fn fractions(max_n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(1i64..64, 1..max_n - 1)
}

fn chain_of(ks: &[i64], start: usize) -> RationalChain {
    RationalChain::new(
        ks.len() + 2,
        ks.iter().map(|&k| rat(k, 64)).collect(),
        start,
    )
    .unwrap()
}

/// Independent oracle: Gaussian elimination over the rationals on the
/// harmonic equations `r_i = q_i r_{i+1} + (1 - q_i) r_{i-1}`.
fn solve_rational(ks: &[i64]) -> Vec<Rational> {
    let n = ks.len() + 2;
    let mut a = vec![vec![rat(0, 1); n + 1]; n];
    a[0][0] = rat(1, 1);
    a[n - 1][n - 1] = rat(1, 1);
    a[n - 1][n] = rat(1, 1);
    for i in 1..n - 1 {
        let q = rat(ks[i - 1], 64);
        a[i][i] = rat(1, 1);
        a[i][i + 1] = -q.clone();
        a[i][i - 1] = q - rat(1, 1);
    }
    for c in 0..n {
        let p = (c..n).find(|&r| a[r][c] != rat(0, 1)).unwrap();
        a.swap(c, p);
        let piv = a[c][c].clone();
        for k in c..=n {
            a[c][k] = &a[c][k] / &piv;
        }
        for r in 0..n {
            if r != c && a[r][c] != rat(0, 1) {
                let f = a[r][c].clone();
                for k in c..=n {
                    let v = &a[c][k] * &f;
                    a[r][k] -= v;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n].clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn rational_formula_matches_elimination(ks in fractions(14)) {
        prop_assert_eq!(chain_of(&ks, 1).hit_probs(), solve_rational(&ks));
    }

    #[test]
    fn boundary_values_and_monotone_in_start(ks in fractions(31)) {
        let c = chain_of(&ks, 2);
        let r = c.hit_probs();
        prop_assert_eq!(r[0].clone(), rat(0, 1));
        prop_assert_eq!(r[r.len() - 1].clone(), rat(1, 1));
        prop_assert!(r.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(is_monotone_in_start(&c));
    }

    #[test]
    fn raising_one_q_never_lowers_any_r(ks in fractions(31), site in 0usize..29, bump in 1i64..32) {
        let site = site % ks.len();
        let mut up = ks.clone();
        up[site] = (up[site] + bump).min(63);
        let lo = chain_of(&ks, 1).hit_probs();
        let hi = chain_of(&up, 1).hit_probs();
        prop_assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b));
    }

    #[test]
    fn float_routes_track_the_rational_value(ks in fractions(31), start in 1usize..31) {
        let n = ks.len() + 2;
        let start = 1 + start % n;
        let q: Vec<f64> = ks.iter().map(|&k| k as f64 / 64.0).collect();
        let f = BdChain::new(n, q, start).unwrap();
        let exact = chain_of(&ks, start).hit_probs();
        let a = hit_probs_exact(&f);
        let b = hit_probs_solve(&f);
        for j in 0..n {
            let e = exact[j].to_f64().unwrap();
            prop_assert!((a[j] - e).abs() <= 1e-12 * e.max(1e-300), "exact j={} {} vs {}", j + 1, a[j], e);
            prop_assert!((b[j] - e).abs() <= 1e-12 * e.max(1e-300), "solve j={} {} vs {}", j + 1, b[j], e);
        }
    }

    #[test]
    fn pointwise_smaller_q_gives_smaller_r(ks in fractions(40), lower in prop::collection::vec(0i64..20, 38), start in 1usize..40) {
        let n = ks.len() + 2;
        let start = 1 + start % n;
        let qb: Vec<f64> = ks.iter().map(|&k| k as f64 / 64.0).collect();
        let qa: Vec<f64> = ks.iter().zip(&lower).map(|(&k, &d)| (k - d).max(1) as f64 / 64.0).collect();
        let rep = dominance_check(&BdChain::new(n, qa, start).unwrap(), &BdChain::new(n, qb, start).unwrap()).unwrap();
        prop_assert!(rep.holds && rep.exact);
    }

    #[test]
    fn growth_ratio_below_one_half(ks in prop::collection::vec(1i64..32, 1..60), qbar_k in 1i64..32) {
        let qbar_k = qbar_k.max(*ks.iter().max().unwrap());
        let qbar = qbar_k as f64 / 64.0;
        let q: Vec<f64> = ks.iter().map(|&k| k as f64 / 64.0).collect();
        let rep = growth_ratio_check(&BdChain::new(ks.len() + 2, q, 2).unwrap(), qbar).unwrap();
        prop_assert!(rep.holds(), "{:?}", rep);
    }
}

#[test]
fn small_chain_by_hand() {
    // n = 4, q = 1/3: rho = 2, r_2 = 1 / (1 + 2 + 4)
    let r = chain_of(&[21, 21], 2).hit_probs();
    let c = RationalChain::new(4, vec![rat(1, 3), rat(1, 3)], 2).unwrap();
    assert_eq!(c.hit_prob(), rat(1, 7));
    assert!(r[1] < rat(1, 6));
    let f = BdChain::constant(4, 0.5, 3).unwrap();
    assert!((hit_probs_solve(&f)[2] - 2.0 / 3.0).abs() < 1e-15);
}
