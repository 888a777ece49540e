use std::fs;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Deserialize;

use erw_core::bdchain::{
    dominance_check, growth_ratio_check, hit_prob_exact, hit_prob_solve, parse_rational,
    perturb_constant_sup, perturb_trend, sweep_dominance, sweep_exact_vs_solve, sweep_growth,
    RationalChain,
};

use crate::{resolve_seed, CmdResult, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    ExactVsSolve,
    Dominance,
    Growth,
    Perturb,
}

#[derive(clap::Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["spec", "random"]))]
pub struct Args {
    /// TOML chain description: `n`, `q` (scalar or list; decimals or `a/b`), `start`,
    /// and optionally `q-b` (dominating chain), `qbar`, `p`.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Random sweep `MAX_N,COUNT`.
    #[arg(long, value_parser = parse_random)]
    random: Option<(usize, usize)>,
    /// Checks to run (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    check: Vec<Check>,
    /// Relative tolerance for exact-vs-solve.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_random(s: &str) -> Result<(usize, usize), String> {
    let (n, c) = s.split_once(',').ok_or("expected MAX_N,COUNT")?;
    let n: usize = n.trim().parse().map_err(|_| format!("bad MAX_N '{n}'"))?;
    let c: usize = c.trim().parse().map_err(|_| format!("bad COUNT '{c}'"))?;
    if n < 3 || c == 0 {
        return Err("MAX_N must be at least 3 and COUNT positive".into());
    }
    Ok((n, c))
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum Prob {
    Num(f64),
    Text(String),
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum Probs {
    One(Prob),
    Many(Vec<Prob>),
}

#[derive(Deserialize, Debug)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Spec {
    n: usize,
    q: Probs,
    start: usize,
    q_b: Option<Probs>,
    qbar: Option<f64>,
    p: Option<f64>,
}

fn rational(p: &Prob) -> Result<erw_core::bdchain::Rational, Failure> {
    match p {
        Prob::Text(s) => Ok(parse_rational(s)?),
        Prob::Num(x) => {
            if !x.is_finite() {
                return Err(Failure::Usage(format!("probability {x} is not finite")));
            }
            // decimal display form (never exponent notation), read exactly
            Ok(parse_rational(&format!("{x}"))?)
        }
    }
}

fn chain(n: usize, q: &Probs, start: usize) -> Result<RationalChain, Failure> {
    if n < 3 {
        return Err(Failure::Usage(format!("n = {n} < 3")));
    }
    let qs = match q {
        Probs::One(p) => vec![rational(p)?; n - 2],
        Probs::Many(v) => v.iter().map(rational).collect::<Result<_, _>>()?,
    };
    Ok(RationalChain::new(n, qs, start)?)
}

fn selected(checks: &[Check], c: Check) -> bool {
    checks.is_empty() || checks.contains(&c)
}

pub fn run(a: Args) -> CmdResult {
    let (seed, _) = resolve_seed(a.seed, None)?;
    match (&a.spec, a.random) {
        (Some(path), _) => run_spec(&a, path),
        (None, Some((n, count))) => run_random(&a, n, count, seed),
        _ => unreachable!("clap enforces one source"),
    }
}

fn run_spec(a: &Args, path: &PathBuf) -> CmdResult {
    let text = fs::read_to_string(path)?;
    let spec: Spec =
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let exact = chain(spec.n, &spec.q, spec.start)?;
    let fchain = exact.to_f64()?;
    let r = exact.hit_prob();
    let product = hit_prob_exact(&fchain);
    let solve = hit_prob_solve(&fchain);
    println!("r={r}");
    println!("r_float={}", num_to_f64(&r));
    println!("r_product={product}");
    println!("r_solve={solve}");
    let mut failures = Vec::new();
    if selected(&a.check, Check::ExactVsSolve) {
        let err = rel_err(product, solve);
        let ok = err <= a.tol;
        println!("exact_vs_solve.rel_err={err:e} {}", verdict(ok));
        if !ok {
            failures.push("exact-vs-solve");
        }
    }
    if selected(&a.check, Check::Dominance) {
        match &spec.q_b {
            Some(qb) => {
                let b = chain(spec.n, qb, spec.start)?.to_f64()?;
                if fchain.q().iter().zip(b.q()).any(|(x, y)| x > y) {
                    return Err(Failure::Usage("q-b must dominate q elementwise".into()));
                }
                let d = dominance_check(&fchain, &b)?;
                println!(
                    "dominance.r_a={} dominance.r_b={} exact={} {}",
                    d.r_a,
                    d.r_b,
                    d.exact,
                    verdict(d.holds)
                );
                if !d.holds {
                    failures.push("dominance");
                }
            }
            None if !a.check.is_empty() => println!("dominance skipped: no q-b in spec"),
            None => {}
        }
    }
    if selected(&a.check, Check::Growth) {
        let max_q = fchain.q().iter().copied().fold(0.0, f64::max);
        let qbar = spec.qbar.unwrap_or(max_q);
        if qbar < 0.5 && max_q <= qbar {
            let g = growth_ratio_check(&fchain, qbar)?;
            println!(
                "growth.qbar={qbar} growth.c={} growth.min_ratio={} growth.violations={} {}",
                g.c,
                g.min_ratio,
                g.violations.len(),
                verdict(g.holds())
            );
            if !g.holds() {
                failures.push("growth");
            }
        } else {
            println!("growth skipped: needs every q_i <= qbar < 1/2");
        }
    }
    if selected(&a.check, Check::Perturb) {
        match spec.p {
            Some(p) => {
                let qbar = spec
                    .qbar
                    .unwrap_or_else(|| fchain.q().iter().copied().fold(0.0, f64::max));
                match perturb_constant_sup(&fchain, p, qbar)? {
                    Some(c) => println!("perturb.p={p} perturb.qbar={qbar} perturb.c_impl={c}"),
                    None => println!("perturb.p={p} perturb.qbar={qbar} perturb.c_impl=unbounded"),
                }
            }
            None if !a.check.is_empty() => println!("perturb skipped: no p in spec"),
            None => {}
        }
    }
    finish(failures)
}

const TREND_PAIRS: [(f64, f64); 3] = [(0.1, 0.2), (0.2, 0.4), (0.3, 0.45)];

fn run_random(a: &Args, max_n: usize, count: usize, seed: u64) -> CmdResult {
    let mut failures = Vec::new();
    if selected(&a.check, Check::ExactVsSolve) {
        let r = sweep_exact_vs_solve(count, max_n, a.tol, seed);
        println!(
            "exact_vs_solve.chains={} violations={} max_rel_err={:e} {}",
            r.chains,
            r.violations,
            r.max_rel_err,
            verdict(r.violations == 0)
        );
        if r.violations > 0 {
            failures.push("exact-vs-solve");
        }
    }
    if selected(&a.check, Check::Dominance) {
        let r = sweep_dominance(count, max_n, seed)?;
        println!(
            "dominance.pairs={} violations={} {}",
            r.chains,
            r.violations,
            verdict(r.violations == 0)
        );
        if r.violations > 0 {
            failures.push("dominance");
        }
    }
    if selected(&a.check, Check::Growth) {
        let r = sweep_growth(count, max_n, seed)?;
        println!(
            "growth.chains={} violations={} {}",
            r.chains,
            r.violations,
            verdict(r.violations == 0)
        );
        if r.violations > 0 {
            failures.push("growth");
        }
    }
    if selected(&a.check, Check::Perturb) {
        if max_n < 5 {
            println!("perturb skipped: needs MAX_N >= 5");
        } else {
            let stride = ((max_n - 5) / 15).max(1);
            let sizes: Vec<usize> = (5..=max_n).step_by(stride).collect();
            let per_size = (count / sizes.len()).clamp(1, 20);
            for (p, qbar) in TREND_PAIRS {
                let t = perturb_trend(p, qbar, &sizes, per_size, seed)?;
                let ok = t.no_increasing_trend();
                println!(
                    "perturb.p={p} qbar={qbar} chains={} slope={:e} slope_ci95=[{:e},{:e}] unbounded={} {}",
                    t.points.len(),
                    t.fit.slope,
                    t.slope_ci95.0,
                    t.slope_ci95.1,
                    t.unbounded,
                    verdict(ok)
                );
                if !ok {
                    failures.push("perturb");
                }
            }
        }
    }
    finish(failures)
}

fn finish(failures: Vec<&str>) -> CmdResult {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(failures.join(", ")))
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn num_to_f64(r: &erw_core::bdchain::Rational) -> f64 {
    use erw_core::bdchain::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
