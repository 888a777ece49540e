//! Excited random walk in the half-space `z >= 0` and its variants.
//!
//! * Floor (`z == 0`): up or one of the four sides, 1/5 each.
//! * Visited non-floor vertex: simple random walk step, 1/6 each.
//! * New non-floor vertex: deterministic step down.
//!
//! The symmetric variant lives on all of Z^3: the middle plane moves 1/5 per
//! side and 1/10 up or down, excited steps point toward `z = 0`, and a vertex
//! counts as visited when it or its mirror image was visited. Its image under
//! `z -> |z|` is the half-space walk, so the symmetric walk keeps its visited
//! set and all counters in folded coordinates.
//!
//! Counting conventions, for a walk observed after `t` steps:
//!
//! * `F(t)`     = #{u < t : z(u) = 0}
//! * `N_new(t)` = #{u < t : R(u) is New}
//! * `DF(t)`    = distinct floor points among R(0..t)
//! * `N(t)`     = `N_new(t) + DF(t)`, the distinct vertices among R(0..t)
//!   when the walk starts from an empty configuration
//! * `V(t; v)`  = #{0 <= u <= t : R(u) = v}, time 0 included

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::MoveSource;
use crate::site::{Dir, Site, StepKind};
use crate::store::{ColumnStore, VisitedStore};

/// Step rule in force.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepRule {
    /// The half-space walk.
    HalfSpace,
    /// The full-space walk with mirror-symmetric visitation.
    Symmetric,
    /// Half-space walk whose excited step goes down only with probability
    /// `p`; otherwise the walker takes a simple random walk step. New
    /// vertices become visited either way, so the visited set need not stay
    /// downward-closed.
    Drift { p: f64 },
}

impl StepRule {
    pub fn is_half_space(&self) -> bool {
        !matches!(self, StepRule::Symmetric)
    }
}

/// Classify a half-space position against a visited set.
pub fn classify<S: VisitedStore>(position: Site, store: &S) -> Result<StepKind> {
    if position.z < 0 {
        return Err(Error::BelowFloor(position));
    }
    Ok(kind_of(position, store))
}

#[inline]
fn kind_of<S: VisitedStore>(folded: Site, store: &S) -> StepKind {
    if folded.z == 0 {
        StepKind::Floor
    } else if store.contains(folded) {
        StepKind::Visited
    } else {
        StepKind::New
    }
}

/// Draw the move for a walker at height `z` whose vertex has kind `kind`.
#[inline]
pub fn choose_move<M: MoveSource + ?Sized>(
    rule: StepRule,
    kind: StepKind,
    z: i32,
    src: &mut M,
) -> Dir {
    match (kind, rule) {
        (StepKind::Floor, StepRule::Symmetric) => match src.pick(10) {
            k @ 0..=7 => Dir::from_index(k / 2),
            8 => Dir::Up,
            _ => Dir::Down,
        },
        (StepKind::Floor, _) => Dir::from_index(src.pick(5)),
        (StepKind::Visited, _) => Dir::from_index(src.pick(6)),
        (StepKind::New, StepRule::HalfSpace) => Dir::Down,
        (StepKind::New, StepRule::Symmetric) => {
            if z > 0 {
                Dir::Down
            } else {
                Dir::Up
            }
        }
        (StepKind::New, StepRule::Drift { p }) => {
            if src.unit() < p {
                Dir::Down
            } else {
                Dir::from_index(src.pick(6))
            }
        }
    }
}

/// Counters of one walk at its current time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub t: u64,
    pub position: Site,
    /// Visits to each watched target, in watch-list order.
    pub visits: Vec<u64>,
    pub floor_hits: u64,
    pub new_hits: u64,
    pub distinct_floor: u64,
}

impl Counters {
    /// `N(t)`.
    pub fn distinct_sites(&self) -> u64 {
        self.new_hits + self.distinct_floor
    }

    /// Height of the folded position.
    pub fn z(&self) -> i64 {
        self.position.z.unsigned_abs() as i64
    }

    /// `5 * M(t)` with `M(t) = z(t) + N_new(t) - F(t)/5`; an integer.
    pub fn drift_residual_x5(&self) -> i64 {
        5 * self.z() + 5 * self.new_hits as i64 - self.floor_hits as i64
    }
}

#[derive(Clone, Debug)]
pub struct Walk<S: VisitedStore = ColumnStore> {
    rule: StepRule,
    start: Site,
    pos: Site,
    store: S,
    t: u64,
    floor_hits: u64,
    new_hits: u64,
    distinct_floor: u64,
    watch: Vec<Site>,
    visits: Vec<u64>,
}

impl<S: VisitedStore> Walk<S> {
    /// Walk from the origin with nothing visited.
    pub fn new(rule: StepRule, watch: &[Site]) -> Self {
        Self::from_configuration(rule, Site::ORIGIN, S::default(), watch)
            .expect("origin is a valid start")
    }

    /// Walk from `(start, store)`. Watch targets are given in folded
    /// coordinates.
    pub fn from_configuration(
        rule: StepRule,
        start: Site,
        store: S,
        watch: &[Site],
    ) -> Result<Self> {
        if rule.is_half_space() && start.z < 0 {
            return Err(Error::BelowFloor(start));
        }
        if let StepRule::Drift { p } = rule {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Precondition(format!(
                    "drift probability {p} outside [0, 1]"
                )));
            }
        }
        if let Some(bad) = watch.iter().find(|s| s.z < 0) {
            return Err(Error::BelowFloor(*bad));
        }
        let visits = watch
            .iter()
            .map(|&w| u64::from(start.folded() == w))
            .collect();
        Ok(Walk {
            rule,
            start,
            pos: start,
            store,
            t: 0,
            floor_hits: 0,
            new_hits: 0,
            distinct_floor: 0,
            watch: watch.to_vec(),
            visits,
        })
    }

    pub fn rule(&self) -> StepRule {
        self.rule
    }

    pub fn start(&self) -> Site {
        self.start
    }

    /// Current position (signed `z` for the symmetric walk).
    pub fn position(&self) -> Site {
        self.pos
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn store(&self) -> &S {
        &self.store
    }

    pub fn watch(&self) -> &[Site] {
        &self.watch
    }

    pub fn visits(&self) -> &[u64] {
        &self.visits
    }

    pub fn floor_hits(&self) -> u64 {
        self.floor_hits
    }

    pub fn new_hits(&self) -> u64 {
        self.new_hits
    }

    pub fn distinct_floor(&self) -> u64 {
        self.distinct_floor
    }

    /// Step kind of the current vertex.
    #[inline]
    pub fn kind(&self) -> StepKind {
        kind_of(self.pos.folded(), &self.store)
    }

    pub fn counters(&self) -> Counters {
        Counters {
            t: self.t,
            position: self.pos,
            visits: self.visits.clone(),
            floor_hits: self.floor_hits,
            new_hits: self.new_hits,
            distinct_floor: self.distinct_floor,
        }
    }

    /// One step of the walk. Returns the kind of the vertex it left.
    #[inline]
    pub fn step<M: MoveSource + ?Sized>(&mut self, src: &mut M) -> StepKind {
        let kind = self.kind();
        let dir = choose_move(self.rule, kind, self.pos.z, src);
        self.depart(kind);
        self.arrive(dir);
        kind
    }

    /// Apply an externally chosen move. The move must be one the current
    /// rule can produce from the current vertex.
    pub fn apply_move(&mut self, dir: Dir) -> StepKind {
        let kind = self.kind();
        debug_assert!(
            self.move_allowed(kind, dir),
            "{dir:?} not allowed from {kind:?} at {}",
            self.pos
        );
        self.depart(kind);
        self.arrive(dir);
        kind
    }

    fn move_allowed(&self, kind: StepKind, dir: Dir) -> bool {
        match (kind, self.rule) {
            (StepKind::Floor, StepRule::Symmetric) => true,
            (StepKind::Floor, _) => dir != Dir::Down,
            (StepKind::Visited, _) => true,
            (StepKind::New, StepRule::HalfSpace) => dir == Dir::Down,
            (StepKind::New, StepRule::Symmetric) => {
                dir == if self.pos.z > 0 { Dir::Down } else { Dir::Up }
            }
            (StepKind::New, StepRule::Drift { .. }) => true,
        }
    }

    #[inline]
    fn depart(&mut self, kind: StepKind) {
        match kind {
            StepKind::Floor => {
                self.floor_hits += 1;
                if self.store.mark_floor(self.pos.x, self.pos.y) {
                    self.distinct_floor += 1;
                }
            }
            StepKind::New => {
                self.new_hits += 1;
                let inserted = self.store.insert(self.pos.folded());
                debug_assert_eq!(inserted, Ok(true));
            }
            StepKind::Visited => {}
        }
    }

    #[inline]
    fn arrive(&mut self, dir: Dir) {
        self.pos = self.pos.shifted(dir);
        self.t += 1;
        if !self.watch.is_empty() {
            let here = self.pos.folded();
            for (w, v) in self.watch.iter().zip(self.visits.iter_mut()) {
                if *w == here {
                    *v += 1;
                }
            }
        }
    }

    /// Run until time `t_end`.
    pub fn run_to<M: MoveSource + ?Sized>(&mut self, t_end: u64, src: &mut M) {
        while self.t < t_end {
            self.step(src);
        }
    }

    /// Run through increasing `horizons`, calling `at` when each is reached.
    pub fn run_checkpoints<M, F>(&mut self, horizons: &[u64], src: &mut M, mut at: F)
    where
        M: MoveSource + ?Sized,
        F: FnMut(usize, &Self),
    {
        for (i, &h) in horizons.iter().enumerate() {
            self.run_to(h, src);
            at(i, self);
        }
    }

    /// Run `steps` steps and return the visited positions, starting point included.
    pub fn trajectory<M: MoveSource + ?Sized>(&mut self, steps: u64, src: &mut M) -> Vec<Site> {
        let mut path = Vec::with_capacity(steps as usize + 1);
        path.push(self.pos);
        for _ in 0..steps {
            self.step(src);
            path.push(self.pos);
        }
        path
    }
}

/// Coordinate-wise image of a path under `(x, y, z) -> (x, y, |z|)`.
pub fn fold(path: &[Site]) -> Vec<Site> {
    path.iter().map(|s| s.folded()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{replica_rng, Scripted};
    use crate::store::NaiveSet;

    fn s(x: i32, y: i32, z: i32) -> Site {
        Site::new(x, y, z)
    }

    #[test]
    fn classify_examples() {
        let empty = ColumnStore::default();
        assert_eq!(classify(s(3, 4, 0), &empty).unwrap(), StepKind::Floor);
        assert_eq!(classify(s(0, 0, 1), &empty).unwrap(), StepKind::New);
        let with = ColumnStore::from_sites([s(0, 0, 1)]).unwrap();
        assert_eq!(classify(s(0, 0, 1), &with).unwrap(), StepKind::Visited);
        assert_eq!(classify(s(3, 4, 0), &with).unwrap(), StepKind::Floor);
        assert_eq!(
            classify(s(0, 0, -1), &empty),
            Err(Error::BelowFloor(s(0, 0, -1)))
        );
    }

    #[test]
    fn new_vertex_steps_down() {
        let mut w: Walk =
            Walk::from_configuration(StepRule::HalfSpace, s(0, 0, 3), ColumnStore::default(), &[])
                .unwrap();
        let mut src = Scripted::new(vec![]);
        assert_eq!(w.step(&mut src), StepKind::New);
        assert_eq!(w.position(), s(0, 0, 2));
        assert_eq!(src.picks_used(), 0);
    }

    #[test]
    fn symmetric_new_vertex_below_plane_steps_up() {
        let mut w: Walk = Walk::from_configuration(
            StepRule::Symmetric,
            s(1, 1, -2),
            ColumnStore::default(),
            &[],
        )
        .unwrap();
        assert_eq!(w.step(&mut Scripted::new(vec![])), StepKind::New);
        assert_eq!(w.position(), s(1, 1, -1));
    }

    #[test]
    fn symmetric_mirror_counts_as_visited() {
        let store = ColumnStore::from_sites([s(0, 0, 1), s(0, 0, 2)]).unwrap();
        let w: Walk =
            Walk::from_configuration(StepRule::Symmetric, s(0, 0, -2), store, &[]).unwrap();
        assert_eq!(w.kind(), StepKind::Visited);
    }

    #[test]
    fn half_space_rejects_start_below_floor() {
        let r: Result<Walk> = Walk::from_configuration(
            StepRule::HalfSpace,
            s(0, 0, -1),
            ColumnStore::default(),
            &[],
        );
        assert!(r.is_err());
    }

    #[test]
    fn first_step_bookkeeping() {
        let mut rng = replica_rng(1, 0);
        let mut w: Walk = Walk::new(StepRule::HalfSpace, &[Site::ORIGIN]);
        w.step(&mut rng);
        let c = w.counters();
        assert_eq!(c.floor_hits, 1);
        assert_eq!(c.distinct_sites(), 1);
        assert_eq!(c.distinct_floor, 1);
        assert_eq!(c.new_hits, 0);
        assert!(c.visits[0] == 1 || c.visits[0] == 2);
        assert!(c.position.z == 0 || c.position.z == 1);
    }

    #[test]
    fn hand_computed_micro_path() {
        // floor: 4 = up, 0 = east, 1 = west; visited: 4 = up, 5 = down
        let mut src = Scripted::new(vec![4, 0, 4, 1, 4, 4, 5]);
        let mut w: Walk<NaiveSet> = Walk::new(StepRule::HalfSpace, &[Site::ORIGIN, s(1, 0, 0)]);
        let path = w.trajectory(10, &mut src);
        let expected = vec![
            s(0, 0, 0),
            s(0, 0, 1),
            s(0, 0, 0),
            s(1, 0, 0),
            s(1, 0, 1),
            s(1, 0, 0),
            s(0, 0, 0),
            s(0, 0, 1),
            s(0, 0, 2),
            s(0, 0, 1),
            s(0, 0, 0),
        ];
        assert_eq!(path, expected);
        assert_eq!(src.picks_used(), 7);
        let c = w.counters();
        assert_eq!(c.floor_hits, 5);
        assert_eq!(c.new_hits, 3);
        assert_eq!(c.distinct_floor, 2);
        assert_eq!(c.distinct_sites(), 5);
        assert_eq!(c.visits, vec![4, 2]);
        assert_eq!(c.drift_residual_x5(), 10);
        assert_eq!(w.store().sites(), vec![s(0, 0, 1), s(0, 0, 2), s(1, 0, 1)]);
    }

    #[test]
    fn start_on_target_counts_time_zero() {
        let w: Walk = Walk::new(StepRule::HalfSpace, &[Site::ORIGIN, s(1, 0, 0)]);
        assert_eq!(w.visits(), &[1, 0]);
    }

    #[test]
    fn fold_examples() {
        assert_eq!(
            fold(&[s(0, 0, 0), s(0, 0, -1)]),
            vec![s(0, 0, 0), s(0, 0, 1)]
        );
        let p = vec![s(0, 0, 0), s(1, 0, 0), s(1, 0, 2)];
        assert_eq!(fold(&p), p);
    }

    fn frequencies(rule: StepRule, kind: StepKind, z: i32, draws: usize, seed: u64) -> [u64; 6] {
        let mut rng = replica_rng(seed, 0);
        let mut counts = [0u64; 6];
        for _ in 0..draws {
            counts[choose_move(rule, kind, z, &mut rng) as usize] += 1;
        }
        counts
    }

    fn within_binomial(counts: &[u64; 6], probs: &[f64; 6], draws: usize) {
        let n = draws as f64;
        for (i, (&c, &p)) in counts.iter().zip(probs).enumerate() {
            let sd = (n * p * (1.0 - p)).sqrt();
            let dev = (c as f64 - n * p).abs();
            assert!(
                dev <= 4.0 * sd.max(1e-12),
                "direction {i}: count {c}, expected {}",
                n * p
            );
        }
    }

    #[test]
    fn floor_distribution() {
        let n = 1_000_000;
        let c = frequencies(StepRule::HalfSpace, StepKind::Floor, 0, n, 11);
        within_binomial(&c, &[0.2, 0.2, 0.2, 0.2, 0.2, 0.0], n);
    }

    #[test]
    fn visited_distribution() {
        let n = 1_000_000;
        let c = frequencies(StepRule::HalfSpace, StepKind::Visited, 3, n, 12);
        within_binomial(&c, &[1.0 / 6.0; 6], n);
    }

    #[test]
    fn symmetric_middle_plane_distribution() {
        let n = 1_000_000;
        let c = frequencies(StepRule::Symmetric, StepKind::Floor, 0, n, 13);
        within_binomial(&c, &[0.2, 0.2, 0.2, 0.2, 0.1, 0.1], n);
    }

    #[test]
    fn drift_mode_distribution() {
        let n = 1_000_000;
        let c = frequencies(StepRule::Drift { p: 0.7 }, StepKind::New, 4, n, 14);
        let side = 0.3 / 6.0;
        within_binomial(&c, &[side, side, side, side, side, 0.7 + side], n);
    }

    #[test]
    fn full_step_from_fixed_state_matches_rule() {
        let store = ColumnStore::from_sites([s(2, 2, 1), s(2, 2, 2)]).unwrap();
        let base: Walk =
            Walk::from_configuration(StepRule::HalfSpace, s(2, 2, 2), store, &[]).unwrap();
        let mut rng = replica_rng(5, 0);
        let mut counts = [0u64; 6];
        let n = 60_000;
        for _ in 0..n {
            let mut w = base.clone();
            w.step(&mut rng);
            let p = w.position();
            let d = Dir::ALL
                .iter()
                .position(|&d| s(2, 2, 2).shifted(d) == p)
                .unwrap();
            counts[d] += 1;
        }
        within_binomial(&counts, &[1.0 / 6.0; 6], n);
    }

    #[test]
    fn half_space_walk_never_goes_below_floor_and_stays_closed() {
        let mut rng = replica_rng(99, 3);
        let mut w: Walk = Walk::new(StepRule::HalfSpace, &[]);
        for _ in 0..200_000 {
            w.step(&mut rng);
            assert!(w.position().z >= 0);
            if w.kind() != StepKind::New {
                assert!(w.store().is_downward_closed(), "t = {}", w.time());
            }
        }
    }

    #[test]
    fn symmetric_fold_takes_excited_steps_toward_plane() {
        let mut rng = replica_rng(4, 4);
        let mut w: Walk = Walk::new(StepRule::Symmetric, &[]);
        let mut prev = w.position();
        for _ in 0..100_000 {
            let k = w.step(&mut rng);
            let now = w.position();
            assert!(now.folded().z >= 0);
            if k == StepKind::New {
                assert_eq!(now.folded().z, prev.folded().z - 1);
            }
            prev = now;
        }
    }

    #[test]
    fn identical_streams_give_identical_walks() {
        let run = || {
            let mut rng = replica_rng(2024, 17);
            let mut w: Walk = Walk::new(StepRule::HalfSpace, &[Site::ORIGIN]);
            let mut snaps = Vec::new();
            w.run_checkpoints(&[10, 1000, 50_000], &mut rng, |_, w| {
                snaps.push(w.counters())
            });
            (snaps, w.store().sites())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn drift_rejects_bad_probability() {
        let r: Result<Walk> = Walk::from_configuration(
            StepRule::Drift { p: 1.5 },
            Site::ORIGIN,
            ColumnStore::default(),
            &[],
        );
        assert!(r.is_err());
    }
}
