//! Ensemble Monte Carlo over independent walks from the origin.
//!
//! One walk of length `max t` serves every horizon of the schedule: all
//! recorded quantities are prefix statistics, so the value at horizon `t` is
//! read off when the walk passes time `t`. Estimates at different horizons
//! are therefore correlated and their intervals are per-horizon only.
//!
//! Accumulators are integers (counts, sums, sums of squares), so merging
//! partial ensembles is exact and the result does not depend on how replicas
//! were scheduled across threads.

mod analysis;
mod output;

pub use analysis::*;
pub use output::*;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{replica_rng, MoveSource};
use crate::site::Site;
use crate::stats::mean_ci95;
use crate::walk::{StepRule, Walk};

/// Walk dynamics of an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Mode {
    /// Half-space walk (`erw`).
    HalfSpace,
    /// Symmetric walk in all of Z^3, statistics taken on the folded path.
    Symmetric,
    /// Half-space walk that descends from a new vertex only with probability `p`.
    Drift(f64),
}

impl Mode {
    pub fn rule(self) -> StepRule {
        match self {
            Mode::HalfSpace => StepRule::HalfSpace,
            Mode::Symmetric => StepRule::Symmetric,
            Mode::Drift(p) => StepRule::Drift { p },
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::HalfSpace => f.write_str("erw"),
            Mode::Symmetric => f.write_str("symmetric"),
            Mode::Drift(p) => write!(f, "drift:{p}"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "erw" => Ok(Mode::HalfSpace),
            "symmetric" => Ok(Mode::Symmetric),
            _ => {
                let p = s
                    .strip_prefix("drift:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!(
                            "unknown mode '{s}' (erw, symmetric, drift:p)"
                        ))
                    })?;
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "drift probability {p} is not in (0, 1)"
                    )));
                }
                Ok(Mode::Drift(p))
            }
        }
    }
}

impl From<Mode> for String {
    fn from(m: Mode) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Mode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub t_schedule: Vec<u64>,
    pub replicas: u64,
    pub master_seed: u64,
    pub mode: Mode,
    /// Extra watch targets. The origin is always watched and reported first.
    #[serde(default)]
    pub targets: Vec<Site>,
    /// Radius of the vertical cylinder around the origin column for the
    /// entry count `l`; `None` disables it.
    #[serde(default)]
    pub cylinder_radius: Option<u32>,
}

impl EnsembleConfig {
    pub fn new(t_schedule: Vec<u64>, replicas: u64, master_seed: u64) -> Self {
        EnsembleConfig {
            t_schedule,
            replicas,
            master_seed,
            mode: Mode::HalfSpace,
            targets: vec![],
            cylinder_radius: None,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_targets(mut self, targets: Vec<Site>) -> Self {
        self.targets = targets;
        self
    }

    pub fn with_cylinder(mut self, radius: u32) -> Self {
        self.cylinder_radius = Some(radius);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_schedule.is_empty() {
            return Err(Error::InvalidConfig("empty horizon schedule".into()));
        }
        if self.t_schedule[0] == 0 {
            return Err(Error::InvalidConfig("horizons must be at least 1".into()));
        }
        if let Some(w) = self.t_schedule.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "horizons not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if self.replicas < 2 {
            return Err(Error::InvalidConfig(format!(
                "replicas = {} < 2",
                self.replicas
            )));
        }
        if let Mode::Drift(p) = self.mode {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "drift probability {p} is not in (0, 1)"
                )));
            }
        }
        if self.mode != Mode::Symmetric {
            if let Some(s) = self.targets.iter().find(|s| s.z < 0) {
                return Err(Error::BelowFloor(*s));
            }
        }
        if self.cylinder_radius == Some(0) {
            return Err(Error::InvalidConfig(
                "cylinder radius must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Watch list: the origin followed by the distinct extra targets.
    pub fn watch_list(&self) -> Vec<Site> {
        let mut w = vec![Site::ORIGIN];
        for t in &self.targets {
            let t = t.folded();
            if !w.contains(&t) {
                w.push(t);
            }
        }
        w
    }

    /// Everything except the replica count; partial ensembles with the same
    /// identity can be merged.
    pub fn identity(&self) -> ConfigIdentity {
        ConfigIdentity {
            t_schedule: self.t_schedule.clone(),
            master_seed: self.master_seed,
            mode: self.mode,
            watch: self.watch_list(),
            cylinder_radius: self.cylinder_radius,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigIdentity {
    pub t_schedule: Vec<u64>,
    pub master_seed: u64,
    pub mode: Mode,
    pub watch: Vec<Site>,
    pub cylinder_radius: Option<u32>,
}

/// Quantities of one walk at one horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStats {
    pub t: u64,
    /// `V(t; w)` for each watched site, origin first.
    pub visits: Vec<u64>,
    /// Distinct sites visited, `N_new + DF`.
    pub n: u64,
    pub df: u64,
    pub f: u64,
    pub n_new: u64,
    pub z: i64,
    /// `5 M(t) = 5 z + 5 N_new - F`.
    pub m_x5: i64,
    /// Cylinder entries `l` (0 when no cylinder is configured).
    pub l: u64,
}

impl PathStats {
    pub fn m(&self) -> f64 {
        self.m_x5 as f64 / 5.0
    }
}

/// Entry counter for the cylinder `x^2 + y^2 <= r^2` with exits from the
/// cylinder of radius `2r`. Entries are looked for from time 1 on.
#[derive(Clone, Copy, Debug)]
struct Cylinder {
    r2: i64,
    out2: i64,
    inside: bool,
    entries: u64,
}

impl Cylinder {
    fn new(r: u32) -> Self {
        let r = r as i64;
        Cylinder {
            r2: r * r,
            out2: 4 * r * r,
            inside: false,
            entries: 0,
        }
    }

    /// Feed the position at time `s >= 1`.
    #[inline]
    fn observe(&mut self, p: Site) {
        let d2 = p.x as i64 * p.x as i64 + p.y as i64 * p.y as i64;
        if self.inside {
            if d2 > self.out2 {
                self.inside = false;
            }
        } else if d2 <= self.r2 {
            self.inside = true;
            self.entries += 1;
        }
    }
}

fn snapshot(w: &Walk, t: u64, l: u64) -> PathStats {
    let c = w.counters();
    PathStats {
        t,
        n: c.distinct_sites(),
        df: c.distinct_floor,
        f: c.floor_hits,
        n_new: c.new_hits,
        z: c.z(),
        m_x5: c.drift_residual_x5(),
        visits: c.visits,
        l,
    }
}

/// Run one walk from the origin through `horizons`, recording the path
/// statistics at each. `l` at horizon `t` counts entries at times `< t`.
pub fn run_path<M: MoveSource + ?Sized>(
    mode: Mode,
    horizons: &[u64],
    watch: &[Site],
    cylinder_radius: Option<u32>,
    src: &mut M,
) -> Vec<PathStats> {
    let mut w: Walk = Walk::new(mode.rule(), watch);
    let mut out = Vec::with_capacity(horizons.len());
    match cylinder_radius {
        None => w.run_checkpoints(horizons, src, |i, w| out.push(snapshot(w, horizons[i], 0))),
        Some(r) => {
            let mut cyl = Cylinder::new(r);
            for &h in horizons {
                while w.time() < h {
                    if w.time() >= 1 {
                        cyl.observe(w.position());
                    }
                    w.step(src);
                }
                out.push(snapshot(&w, h, cyl.entries));
            }
        }
    }
    out
}

/// A single half-space walk of `t` steps from the origin. `visits` holds
/// `V(t; 0)` followed by the other targets.
pub fn run_walk_stats<M: MoveSource + ?Sized>(
    t: u64,
    src: &mut M,
    targets: &[Site],
) -> Result<PathStats> {
    if t == 0 {
        return Err(Error::Precondition("t must be at least 1".into()));
    }
    if let Some(s) = targets.iter().find(|s| s.z < 0) {
        return Err(Error::BelowFloor(*s));
    }
    let mut watch = vec![Site::ORIGIN];
    watch.extend(targets.iter().filter(|&&s| s != Site::ORIGIN));
    Ok(run_path(Mode::HalfSpace, &[t], &watch, None, src)
        .pop()
        .expect("one horizon"))
}

/// Exact integer moments of one statistic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accum {
    pub count: u64,
    pub sum: i128,
    pub sum_sq: i128,
}

impl Accum {
    #[inline]
    pub fn push(&mut self, x: i64) {
        self.count += 1;
        self.sum += x as i128;
        self.sum_sq += (x as i128) * (x as i128);
    }

    pub fn merge(&mut self, other: &Accum) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as i128;
        let num = n * self.sum_sq - self.sum * self.sum;
        num as f64 / (n * (n - 1)) as f64
    }

    pub fn std_err(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn ci95(&self) -> (f64, f64) {
        mean_ci95(self.mean(), self.std_err(), self.count)
    }

    /// Same statistic divided by a positive constant.
    pub fn scaled_summary(&self, divisor: f64) -> Summary {
        let (lo, hi) = self.ci95();
        Summary {
            mean: self.mean() / divisor,
            ci_lo: lo / divisor,
            ci_hi: hi / divisor,
            se: self.std_err() / divisor,
        }
    }

    pub fn summary(&self) -> Summary {
        self.scaled_summary(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub se: f64,
}

/// Sparse-free histogram: `counts[k]` replicas took value `k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    #[inline]
    pub fn push(&mut self, k: u64) {
        let k = k as usize;
        if k >= self.counts.len() {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of samples strictly greater than `x`.
    pub fn count_above(&self, x: f64) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(k, _)| *k as f64 > x)
            .map(|(_, c)| c)
            .sum()
    }
}

/// All accumulators at one horizon.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonStats {
    pub t: u64,
    /// `V(t; w)` per watched site, origin first.
    pub visits: Vec<Accum>,
    pub n: Accum,
    pub df: Accum,
    pub f: Accum,
    pub n_new: Accum,
    pub z: Accum,
    pub m_x5: Accum,
    pub l: Accum,
    pub v0_hist: Histogram,
    pub l_hist: Histogram,
}

impl HorizonStats {
    fn empty(t: u64, watched: usize) -> Self {
        HorizonStats {
            t,
            visits: vec![Accum::default(); watched],
            ..Default::default()
        }
    }

    fn push(&mut self, p: &PathStats, cylinder: bool) {
        for (a, &v) in self.visits.iter_mut().zip(&p.visits) {
            a.push(v as i64);
        }
        self.n.push(p.n as i64);
        self.df.push(p.df as i64);
        self.f.push(p.f as i64);
        self.n_new.push(p.n_new as i64);
        self.z.push(p.z);
        self.m_x5.push(p.m_x5);
        self.v0_hist.push(p.visits[0]);
        if cylinder {
            self.l.push(p.l as i64);
            self.l_hist.push(p.l);
        }
    }

    fn merge(&mut self, o: &HorizonStats) {
        for (a, b) in self.visits.iter_mut().zip(&o.visits) {
            a.merge(b);
        }
        self.n.merge(&o.n);
        self.df.merge(&o.df);
        self.f.merge(&o.f);
        self.n_new.merge(&o.n_new);
        self.z.merge(&o.z);
        self.m_x5.merge(&o.m_x5);
        self.l.merge(&o.l);
        self.v0_hist.merge(&o.v0_hist);
        self.l_hist.merge(&o.l_hist);
    }

    /// `V(t; 0)`.
    pub fn v0(&self) -> &Accum {
        &self.visits[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub identity: ConfigIdentity,
    pub replicas: u64,
    pub horizons: Vec<HorizonStats>,
}

impl EnsembleStats {
    pub fn empty(identity: ConfigIdentity) -> Self {
        let horizons = identity
            .t_schedule
            .iter()
            .map(|&t| HorizonStats::empty(t, identity.watch.len()))
            .collect();
        EnsembleStats {
            identity,
            replicas: 0,
            horizons,
        }
    }

    pub fn push_path(&mut self, path: &[PathStats]) {
        let cyl = self.identity.cylinder_radius.is_some();
        for (h, p) in self.horizons.iter_mut().zip(path) {
            h.push(p, cyl);
        }
        self.replicas += 1;
    }

    /// Accumulator merge. Fails when the two ensembles come from different
    /// configurations.
    pub fn merge(mut self, other: &EnsembleStats) -> Result<EnsembleStats> {
        if self.identity != other.identity {
            return Err(Error::ConfigMismatch(format!(
                "{:?} vs {:?}",
                self.identity, other.identity
            )));
        }
        self.absorb(other);
        Ok(self)
    }

    fn absorb(&mut self, other: &EnsembleStats) {
        for (a, b) in self.horizons.iter_mut().zip(&other.horizons) {
            a.merge(b);
        }
        self.replicas += other.replicas;
    }

    pub fn horizon(&self, t: u64) -> Option<&HorizonStats> {
        self.horizons.iter().find(|h| h.t == t)
    }
}

/// Replicas `range` of `config` in sequence. Replica `i` uses stream
/// `(master_seed, i)`.
pub fn run_replicas(config: &EnsembleConfig, range: std::ops::Range<u64>) -> Result<EnsembleStats> {
    config.validate()?;
    let identity = config.identity();
    let mut stats = EnsembleStats::empty(identity.clone());
    for i in range {
        let mut rng = replica_rng(config.master_seed, i);
        let path = run_path(
            config.mode,
            &config.t_schedule,
            &identity.watch,
            config.cylinder_radius,
            &mut rng,
        );
        stats.push_path(&path);
    }
    Ok(stats)
}

/// Execution options of [`run_ensemble`]; they never change the result.
#[derive(Clone, Copy, Default)]
pub struct RunOptions<'a> {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Called with `(done, total)` replicas as chunks complete.
    pub progress: Option<&'a (dyn Fn(u64, u64) + Sync)>,
}

const CHUNK: u64 = 8;

/// All replicas of `config`, in parallel.
pub fn run_ensemble(config: &EnsembleConfig, opts: RunOptions<'_>) -> Result<EnsembleStats> {
    config.validate()?;
    let total = config.replicas;
    let chunks = total.div_ceil(CHUNK);
    let done = AtomicU64::new(0);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let range = c * CHUNK..((c + 1) * CHUNK).min(total);
                let n = range.end - range.start;
                let s = run_replicas(config, range).expect("validated config");
                let d = done.fetch_add(n, Ordering::Relaxed) + n;
                if let Some(p) = opts.progress {
                    p(d, total);
                }
                s
            })
            .reduce(
                || EnsembleStats::empty(config.identity()),
                |mut a, b| {
                    a.absorb(&b);
                    a
                },
            )
    };
    match opts.threads {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}
