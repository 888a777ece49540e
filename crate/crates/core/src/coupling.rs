//! Downward coupling of two half-space walks.
//!
//! Two walks `R` and `S` start at the same vertex with visited sets
//! `Vis_R ⊆ Vis_S`, both downward-closed. At every coupling step:
//!
//! 1. same kind of vertex: both make the same move (one variate for floor or
//!    visited, no variate for a pair of descents);
//! 2. one at a new vertex, the other not: the one at the new vertex steps
//!    down, the other waits;
//! 3. one visited, one floor: the visited walker moves; the floor walker
//!    waits if that move was down and copies it otherwise.
//!
//! With `Wait_R`, `Wait_S` the wait counts and `tau` the coupling clock, each
//! walk has made `tau - Wait` real moves. The construction keeps `(x, y)`
//! equal, `z_R - Wait_R = z_S - Wait_S`, `z_R <= z_S`, and whenever `S` is not
//! at a new vertex, `Vis_S` is downward-closed and contains `Vis_R`. In
//! checked mode every one of these is verified after every step.
//!
//! The membership part of the last property is verified incrementally: a
//! site `R` adds that `S` does not yet hold, and a site `S` adds whose lower
//! neighbor `S` does not yet hold, stay pending until the next step at which
//! `S` is not at a new vertex, and must be resolved by then.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legal::{is_legal_configuration, Connectivity, Verdict};
use crate::rng::{replica_rng, MoveSource};
use crate::site::{Dir, Site, StepKind};
use crate::stats::{mean_ci95, wilson95};
use crate::store::{ColumnStore, VisitedStore};
use crate::walk::{StepRule, Walk};

/// What happened at one coupling step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoupledMove {
    /// Both walkers made the same move.
    Together(Dir),
    /// `R` stepped down from a new vertex, `S` waited.
    RDescends,
    /// `S` stepped down from a new vertex, `R` waited.
    SDescends,
    /// `R` (visited) moved, `S` (floor) copied.
    RLeadsSFollows(Dir),
    /// `R` (visited) moved down, `S` (floor) waited.
    RLeadsSWaits,
    /// `S` (visited) moved, `R` (floor) copied.
    SLeadsRFollows(Dir),
    /// `S` (visited) moved down, `R` (floor) waited.
    SLeadsRWaits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub tau: u64,
    pub r: Site,
    pub s: Site,
    pub kind_r: StepKind,
    pub kind_s: StepKind,
    pub action: CoupledMove,
}

#[derive(Clone, Debug, Default)]
struct Checker {
    pending_r: Vec<Site>,
    pending_s: Vec<Site>,
    transcript: Vec<TranscriptEntry>,
}

#[derive(Clone, Debug)]
pub struct CouplingState<S: VisitedStore = ColumnStore> {
    r: Walk<S>,
    s: Walk<S>,
    wait_r: u64,
    wait_s: u64,
    tau: u64,
    checker: Option<Checker>,
}

impl<S: VisitedStore> CouplingState<S> {
    /// Couple two walks started at `w` from the given configurations.
    /// Both configurations must be legal and `vis_r ⊆ vis_s`.
    pub fn new(w: Site, vis_r: &[Site], vis_s: &[Site], checked: bool) -> Result<Self> {
        if w.z < 0 {
            return Err(Error::BelowFloor(w));
        }
        for cfg in [vis_r, vis_s] {
            if let Verdict::Illegal { reason, site } =
                is_legal_configuration(cfg, Connectivity::FloorAdjoined)
            {
                return Err(Error::IllegalConfiguration {
                    reason: reason.to_string(),
                    site,
                });
            }
        }
        let store_r = S::from_sites(vis_r.iter().copied())?;
        let store_s = S::from_sites(vis_s.iter().copied())?;
        if let Some(&missing) = vis_r.iter().find(|&&x| !store_s.contains(x)) {
            return Err(Error::Precondition(format!(
                "{missing} is visited by R but not by S"
            )));
        }
        let r = Walk::from_configuration(StepRule::HalfSpace, w, store_r, &[])?;
        let s = Walk::from_configuration(StepRule::HalfSpace, w, store_s, &[])?;
        Ok(CouplingState {
            r,
            s,
            wait_r: 0,
            wait_s: 0,
            tau: 0,
            checker: checked.then(Checker::default),
        })
    }

    pub fn r(&self) -> &Walk<S> {
        &self.r
    }

    pub fn s(&self) -> &Walk<S> {
        &self.s
    }

    pub fn wait_r(&self) -> u64 {
        self.wait_r
    }

    pub fn wait_s(&self) -> u64 {
        self.wait_s
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    /// Real moves made by `R`.
    pub fn t_r(&self) -> u64 {
        self.tau - self.wait_r
    }

    /// Real moves made by `S`.
    pub fn t_s(&self) -> u64 {
        self.tau - self.wait_s
    }

    pub fn is_checked(&self) -> bool {
        self.checker.is_some()
    }

    /// Full step transcript (checked mode only).
    pub fn transcript(&self) -> &[TranscriptEntry] {
        self.checker
            .as_ref()
            .map(|c| c.transcript.as_slice())
            .unwrap_or(&[])
    }

    /// One coupling step. In checked mode, returns an error as soon as any
    /// invariant fails.
    pub fn coupled_step<M: MoveSource + ?Sized>(&mut self, src: &mut M) -> Result<CoupledMove> {
        let (pr, ps) = (self.r.position(), self.s.position());
        let (kr, ks) = (self.r.kind(), self.s.kind());
        if self.checker.is_some() && pr == ps && ks == StepKind::New && kr == StepKind::Visited {
            return Err(
                self.violation("both walkers share a vertex that is new for S but visited for R")
            );
        }
        let action = match (kr, ks) {
            (StepKind::Floor, StepKind::Floor) => {
                let d = Dir::from_index(src.pick(5));
                self.r.apply_move(d);
                self.s.apply_move(d);
                CoupledMove::Together(d)
            }
            (StepKind::Visited, StepKind::Visited) => {
                let d = Dir::from_index(src.pick(6));
                self.r.apply_move(d);
                self.s.apply_move(d);
                CoupledMove::Together(d)
            }
            (StepKind::New, StepKind::New) => {
                self.r.apply_move(Dir::Down);
                self.s.apply_move(Dir::Down);
                CoupledMove::Together(Dir::Down)
            }
            (StepKind::New, _) => {
                self.r.apply_move(Dir::Down);
                self.wait_s += 1;
                CoupledMove::RDescends
            }
            (_, StepKind::New) => {
                self.s.apply_move(Dir::Down);
                self.wait_r += 1;
                CoupledMove::SDescends
            }
            (StepKind::Visited, StepKind::Floor) => {
                let d = Dir::from_index(src.pick(6));
                self.r.apply_move(d);
                if d == Dir::Down {
                    self.wait_s += 1;
                    CoupledMove::RLeadsSWaits
                } else {
                    self.s.apply_move(d);
                    CoupledMove::RLeadsSFollows(d)
                }
            }
            (StepKind::Floor, StepKind::Visited) => {
                let d = Dir::from_index(src.pick(6));
                self.s.apply_move(d);
                if d == Dir::Down {
                    self.wait_r += 1;
                    CoupledMove::SLeadsRWaits
                } else {
                    self.r.apply_move(d);
                    CoupledMove::SLeadsRFollows(d)
                }
            }
        };
        self.tau += 1;
        if let Some(ch) = self.checker.as_mut() {
            ch.transcript.push(TranscriptEntry {
                tau: self.tau,
                r: pr,
                s: ps,
                kind_r: kr,
                kind_s: ks,
                action,
            });
            let r_added = kr == StepKind::New && !matches!(action, CoupledMove::SDescends);
            let s_added = ks == StepKind::New && !matches!(action, CoupledMove::RDescends);
            if r_added && !self.s.store().contains(pr) {
                ch.pending_r.push(pr);
            }
            if s_added && ps.z > 1 && !self.s.store().contains(ps.below()) {
                ch.pending_s.push(ps);
            }
            self.check_invariants()?;
        }
        Ok(action)
    }

    fn violation(&self, what: &str) -> Error {
        let tail: Vec<String> = self
            .transcript()
            .iter()
            .rev()
            .take(8)
            .rev()
            .map(|e| {
                format!(
                    "tau={} R={} S={} {:?}/{:?} {:?}",
                    e.tau, e.r, e.s, e.kind_r, e.kind_s, e.action
                )
            })
            .collect();
        Error::CouplingViolation {
            step: self.tau,
            what: format!(
                "{what}; R={} S={} wait_R={} wait_S={}; last steps: [{}]",
                self.r.position(),
                self.s.position(),
                self.wait_r,
                self.wait_s,
                tail.join("; ")
            ),
        }
    }

    fn check_invariants(&mut self) -> Result<()> {
        let (r, s) = (self.r.position(), self.s.position());
        if r.x != s.x || r.y != s.y {
            return Err(self.violation("(x, y) differ"));
        }
        if r.z as i64 - self.wait_r as i64 != s.z as i64 - self.wait_s as i64 {
            return Err(self.violation("z_R - Wait_R != z_S - Wait_S"));
        }
        if r.z > s.z {
            return Err(self.violation("z_R > z_S"));
        }
        if s.z == 0 && r != s {
            return Err(self.violation("S on the floor without R at the same vertex"));
        }
        if self.t_r() != self.r.time() || self.t_s() != self.s.time() {
            return Err(self.violation("real-time clocks out of step with tau - Wait"));
        }
        if self.s.kind() != StepKind::New {
            let ch = self.checker.as_mut().expect("checked mode");
            let pending_r = std::mem::take(&mut ch.pending_r);
            let pending_s = std::mem::take(&mut ch.pending_s);
            if let Some(x) = pending_r.iter().find(|&&x| !self.s.store().contains(x)) {
                let msg = format!("Vis_R not contained in Vis_S: {x} missing from S");
                return Err(self.violation(&msg));
            }
            if let Some(x) = pending_s
                .iter()
                .find(|&&x| !self.s.store().contains(x.below()))
            {
                let msg = format!("Vis_S not downward-closed below {x}");
                return Err(self.violation(&msg));
            }
        }
        Ok(())
    }

    /// O(|Vis|) verification of the last claim: if `S` is not at a new
    /// vertex, `Vis_S` is downward-closed and contains `Vis_R`.
    pub fn full_containment_check(&self) -> bool {
        if self.s.kind() == StepKind::New {
            return true;
        }
        let vs = self.s.store();
        let closed = vs
            .sites()
            .iter()
            .all(|x| x.z == 1 || vs.contains(x.below()));
        closed && self.r.store().sites().iter().all(|&x| vs.contains(x))
    }
}

/// Result of one coupled run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingRun {
    /// Visits of `R` to the target during its first `t` moves (time 0 included).
    pub v_r: u64,
    /// Same for `S`.
    pub v_s: u64,
    pub wait_r: u64,
    pub wait_s: u64,
    pub tau: u64,
    /// Coupling steps at which `S` was at the target while `R` was not
    /// (always 0 when the construction is correct).
    pub unmatched_s_visits: u64,
}

impl CouplingRun {
    pub fn dominated(&self) -> bool {
        self.v_r >= self.v_s && self.unmatched_s_visits == 0
    }
}

/// Run the coupling until both walks have made at least `t` real moves and
/// count visits to the floor vertex `v` within each walk's first `t` moves.
pub fn run_coupling<S: VisitedStore, M: MoveSource + ?Sized>(
    w: Site,
    vis_r: &[Site],
    vis_s: &[Site],
    t: u64,
    v: Site,
    checked: bool,
    src: &mut M,
) -> Result<CouplingRun> {
    if !v.is_floor() {
        return Err(Error::NotFloorTarget(v));
    }
    let mut state: CouplingState<S> = CouplingState::new(w, vis_r, vis_s, checked)?;
    let mut v_r = u64::from(w == v);
    let mut v_s = v_r;
    let mut unmatched = 0;
    while state.t_r() < t || state.t_s() < t {
        let (tr, ts) = (state.t_r(), state.t_s());
        state.coupled_step(src)?;
        let (r, s) = (state.r().position(), state.s().position());
        if state.t_r() > tr && state.t_r() <= t && r == v {
            v_r += 1;
        }
        if state.t_s() > ts && state.t_s() <= t && s == v {
            v_s += 1;
        }
        if s == v && r != v {
            unmatched += 1;
            if checked {
                return Err(state.violation("S at the target without R"));
            }
        }
    }
    if checked && v_r < v_s {
        return Err(state.violation(&format!("V_R = {v_r} < V_S = {v_s}")));
    }
    Ok(CouplingRun {
        v_r,
        v_s,
        wait_r: state.wait_r(),
        wait_s: state.wait_s(),
        tau: state.tau(),
        unmatched_s_visits: unmatched,
    })
}

/// Parameters shared by every run of a dominance ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub start: Site,
    pub vis_r: Vec<Site>,
    pub vis_s: Vec<Site>,
    pub t: u64,
    pub target: Site,
    pub checked: bool,
}

/// Empirical tail `P(V >= k)` for `k = 1..=max` with Wilson bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub k: u64,
    pub p_r: f64,
    pub p_s: f64,
    /// `(p_r - p_s) / sigma` with `sigma` the two-sample standard error.
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub params: CouplingParams,
    pub runs: usize,
    pub seed: u64,
    pub mean_v_r: f64,
    pub mean_v_s: f64,
    pub mean_ci_r: (f64, f64),
    pub mean_ci_s: (f64, f64),
    /// Runs with `V_R < V_S` or an unmatched `S` visit.
    pub path_violations: usize,
    /// Runs with `V_R = V_S`.
    pub equal_runs: usize,
    /// Runs that raised a checked-mode invariant error, with messages.
    pub claim_violations: Vec<String>,
    /// Index of the first run that raised an invariant error.
    pub first_failed_run: Option<usize>,
    pub total_wait_r: u64,
    pub total_wait_s: u64,
    pub tail: Vec<TailPoint>,
    /// Smallest `z` over the tail; `>= -3` means the distributional
    /// inequality holds within three standard errors.
    pub min_tail_z: f64,
    /// Counts compare each walk after exactly `t` real moves; the coupling
    /// is continued until both clocks reach `t`, and a partial last move of
    /// either walk is not counted.
    pub clock_convention: String,
}

impl DominanceReport {
    pub fn clean(&self) -> bool {
        self.path_violations == 0 && self.claim_violations.is_empty() && self.min_tail_z >= -3.0
    }
}

fn tail_points(vr: &[u64], vs: &[u64]) -> (Vec<TailPoint>, f64) {
    let n = vr.len().max(1) as f64;
    let kmax = vr.iter().chain(vs).copied().max().unwrap_or(0);
    let mut tail = Vec::new();
    let mut min_z = f64::INFINITY;
    for k in 1..=kmax {
        let p_r = vr.iter().filter(|&&x| x >= k).count() as f64 / vr.len().max(1) as f64;
        let p_s = vs.iter().filter(|&&x| x >= k).count() as f64 / vs.len().max(1) as f64;
        let var = p_r * (1.0 - p_r) / n + p_s * (1.0 - p_s) / vs.len().max(1) as f64;
        let z = if var > 0.0 {
            (p_r - p_s) / var.sqrt()
        } else if p_r >= p_s {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        min_z = min_z.min(z);
        tail.push(TailPoint { k, p_r, p_s, z });
    }
    (
        tail,
        if min_z.is_finite() || min_z == f64::NEG_INFINITY {
            min_z
        } else {
            0.0
        },
    )
}

fn mean_and_ci(xs: &[u64]) -> (f64, (f64, f64)) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<u64>() as f64 / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, mean_ci95(mean, (var / n).sqrt(), xs.len() as u64))
}

/// Run `runs` independent couplings (replica `i` uses stream `(seed, i)`).
pub fn dominance_ensemble(
    params: &CouplingParams,
    runs: usize,
    seed: u64,
) -> Result<DominanceReport> {
    if !params.target.is_floor() {
        return Err(Error::NotFloorTarget(params.target));
    }
    // validate once up front so configuration errors are not reported per run
    CouplingState::<ColumnStore>::new(params.start, &params.vis_r, &params.vis_s, false)?;
    let results: Vec<Result<CouplingRun>> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i as u64);
            run_coupling::<ColumnStore, _>(
                params.start,
                &params.vis_r,
                &params.vis_s,
                params.t,
                params.target,
                params.checked,
                &mut rng,
            )
        })
        .collect();
    let mut vr = Vec::with_capacity(runs);
    let mut vs = Vec::with_capacity(runs);
    let mut claim_violations = Vec::new();
    let mut path_violations = 0;
    let mut equal_runs = 0;
    let mut first_failed_run = None;
    let (mut wr, mut ws) = (0, 0);
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok(run) => {
                if !run.dominated() {
                    path_violations += 1;
                }
                if run.v_r == run.v_s {
                    equal_runs += 1;
                }
                wr += run.wait_r;
                ws += run.wait_s;
                vr.push(run.v_r);
                vs.push(run.v_s);
            }
            Err(e) => {
                first_failed_run.get_or_insert(i);
                claim_violations.push(format!("run {i}: {e}"));
            }
        }
    }
    let (tail, min_tail_z) = tail_points(&vr, &vs);
    let (mean_v_r, mean_ci_r) = mean_and_ci(&vr);
    let (mean_v_s, mean_ci_s) = mean_and_ci(&vs);
    Ok(DominanceReport {
        params: params.clone(),
        runs,
        seed,
        mean_v_r,
        mean_v_s,
        mean_ci_r,
        mean_ci_s,
        path_violations,
        equal_runs,
        claim_violations,
        first_failed_run,
        total_wait_r: wr,
        total_wait_s: ws,
        tail,
        min_tail_z,
        clock_convention: "each walk counted over its first t real moves; coupling continued until both clocks reach t".into(),
    })
}

/// Re-run coupling `run` of a checked ensemble and return its transcript
/// up to the end or the first invariant error.
pub fn replay_transcript(
    params: &CouplingParams,
    seed: u64,
    run: usize,
) -> Result<(Vec<TranscriptEntry>, Option<Error>)> {
    let mut state: CouplingState =
        CouplingState::new(params.start, &params.vis_r, &params.vis_s, true)?;
    let mut rng = replica_rng(seed, run as u64);
    while state.t_r() < params.t || state.t_s() < params.t {
        if let Err(e) = state.coupled_step(&mut rng) {
            return Ok((state.transcript().to_vec(), Some(e)));
        }
    }
    Ok((state.transcript().to_vec(), None))
}

/// Distributional comparison without coupling: `R` and `S` are run as two
/// independent ensembles (replica `i` of `S` uses stream `(seed, runs + i)`).
pub fn independent_dominance(
    params: &CouplingParams,
    runs: usize,
    seed: u64,
) -> Result<(Vec<TailPoint>, f64)> {
    if !params.target.is_floor() {
        return Err(Error::NotFloorTarget(params.target));
    }
    let one = |vis: &[Site], stream: u64| -> Result<u64> {
        let store = ColumnStore::from_sites(vis.iter().copied())?;
        let mut w =
            Walk::from_configuration(StepRule::HalfSpace, params.start, store, &[params.target])?;
        let mut rng = replica_rng(seed, stream);
        w.run_to(params.t, &mut rng);
        Ok(w.visits()[0])
    };
    let vr: Vec<u64> = (0..runs)
        .into_par_iter()
        .map(|i| one(&params.vis_r, i as u64))
        .collect::<Result<_>>()?;
    let vs: Vec<u64> = (0..runs)
        .into_par_iter()
        .map(|i| one(&params.vis_s, (runs + i) as u64))
        .collect::<Result<_>>()?;
    Ok(tail_points(&vr, &vs))
}

/// Estimates of both sides of `E(V(t; v) | V(t; v) != 0) <= E V(t; 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionedReport {
    pub target: Site,
    pub t: u64,
    pub replicas: usize,
    /// Replicas that reached the target within `t` steps.
    pub hits: usize,
    pub lhs_mean: f64,
    pub lhs_se: f64,
    pub rhs_mean: f64,
    pub rhs_se: f64,
    /// `lhs <= rhs + 3 sqrt(se_l^2 + se_r^2)`.
    pub holds: bool,
    pub hit_rate_ci: (f64, f64),
}

/// Left side: walks from the origin that reach the floor vertex `v` by time
/// `t`, counting visits to `v` during the `t` steps after the first hit
/// (the hit included). Right side: `V(t; 0)` from the origin. Replica `i`
/// uses stream `(seed, i)` on both sides, so `v = 0` gives identical samples.
pub fn conditioned_visit_bound_experiment(
    v: Site,
    t: u64,
    replicas: usize,
    seed: u64,
) -> Result<ConditionedReport> {
    if !v.is_floor() {
        return Err(Error::NotFloorTarget(v));
    }
    let samples: Vec<(Option<u64>, u64)> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i as u64);
            let mut w: Walk = Walk::new(StepRule::HalfSpace, &[v]);
            while w.visits()[0] == 0 && w.time() < t {
                w.step(&mut rng);
            }
            let lhs = if w.visits()[0] > 0 {
                let hit = w.time();
                w.run_to(hit + t, &mut rng);
                Some(w.visits()[0])
            } else {
                None
            };
            let mut rng = replica_rng(seed, i as u64);
            let mut w0: Walk = Walk::new(StepRule::HalfSpace, &[Site::ORIGIN]);
            w0.run_to(t, &mut rng);
            (lhs, w0.visits()[0])
        })
        .collect();
    let lhs: Vec<u64> = samples.iter().filter_map(|s| s.0).collect();
    let rhs: Vec<u64> = samples.iter().map(|s| s.1).collect();
    if lhs.len() < 2 {
        return Err(Error::Precondition(format!(
            "only {} of {replicas} walks reached {v} within {t} steps",
            lhs.len()
        )));
    }
    let stat = |xs: &[u64]| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<u64>() as f64 / n;
        let var = xs.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    };
    let (lhs_mean, lhs_se) = stat(&lhs);
    let (rhs_mean, rhs_se) = stat(&rhs);
    let holds = lhs_mean <= rhs_mean + 3.0 * (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    Ok(ConditionedReport {
        target: v,
        t,
        replicas,
        hits: lhs.len(),
        lhs_mean,
        lhs_se,
        rhs_mean,
        rhs_se,
        holds,
        hit_rate_ci: wilson95(lhs.len() as u64, replicas as u64),
    })
}
