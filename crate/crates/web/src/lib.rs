//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Everything crossing the boundary is a number or a flat `Vec<f64>`, so the
//! same functions run (and are tested) on the host.

use erw_core::bdchain::{hit_probs_exact, BdChain};
use erw_core::experiments::{log_t, returns_table, run_replicas, EnsembleConfig, EnsembleStats};
use erw_core::{replica_rng, ReplicaRng, Site, StepKind, StepRule, VisitedStore, Walk};
use wasm_bindgen::prelude::*;

/// A single half-space walk that the page advances in slices.
#[wasm_bindgen]
pub struct WalkView {
    walk: Walk,
    rng: ReplicaRng,
}

#[wasm_bindgen]
impl WalkView {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64) -> WalkView {
        WalkView {
            walk: Walk::new(StepRule::HalfSpace, &[Site::ORIGIN]),
            rng: replica_rng(seed, 0),
        }
    }

    /// Run `steps` more steps.
    pub fn advance(&mut self, steps: u32) {
        let t = self.walk.time() + u64::from(steps);
        self.walk.run_to(t, &mut self.rng);
    }

    /// `[t, V(t;0), F, N, DF, z, x, y]`.
    pub fn counters(&self) -> Vec<f64> {
        let c = self.walk.counters();
        let p = self.walk.position();
        vec![
            c.t as f64,
            c.visits[0] as f64,
            c.floor_hits as f64,
            c.distinct_sites() as f64,
            c.distinct_floor as f64,
            p.z as f64,
            p.x as f64,
            p.y as f64,
        ]
    }

    /// Column heights on the square `|x|, |y| <= radius`, row by row from
    /// `y = -radius`. A visited floor point with an empty column reports
    /// 0.5 so the page can tell it from an untouched one.
    pub fn heights(&self, radius: u32) -> Vec<f64> {
        let r = radius as i32;
        let store = self.walk.store();
        let mut out = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
        for y in -r..=r {
            for x in -r..=r {
                let h = store.column_height(x, y);
                out.push(if h == 0 && store.floor_marked(x, y) {
                    0.5
                } else {
                    h as f64
                });
            }
        }
        out
    }

    /// True when the walker stands on a vertex it has not visited before.
    pub fn on_new_vertex(&self) -> bool {
        self.walk.kind() == StepKind::New
    }
}

/// Hitting probabilities `r_1..r_n` of the chain on `{1..n}` with constant
/// up-probability `q`. Empty on invalid input.
#[wasm_bindgen]
pub fn bd_curve(n: usize, q: f64) -> Vec<f64> {
    match BdChain::constant(n, q, 1) {
        Ok(c) => hit_probs_exact(&c),
        Err(_) => vec![],
    }
}

/// Upper envelope `r_j <= (1 + c)^(j - n)` implied by the growth ratio with
/// `c = (1 - 2q) / (1 - q)`, for `q < 1/2`.
#[wasm_bindgen]
pub fn bd_growth_envelope(n: usize, q: f64) -> Vec<f64> {
    if !(q > 0.0 && q < 0.5) || n < 3 {
        return vec![];
    }
    let c = (1.0 - 2.0 * q) / (1.0 - q);
    (1..=n)
        .map(|j| {
            if j == 1 {
                0.0
            } else {
                (1.0 + c).powi(j as i32 - n as i32)
            }
        })
        .collect()
}

/// Returns-to-origin ensemble on horizons `2^6..2^max_pow`, grown in
/// batches so the page stays responsive.
#[wasm_bindgen]
pub struct ReturnsEnsemble {
    config: EnsembleConfig,
    stats: EnsembleStats,
    done: u64,
}

#[wasm_bindgen]
impl ReturnsEnsemble {
    #[wasm_bindgen(constructor)]
    pub fn new(max_pow: u32, seed: u64) -> ReturnsEnsemble {
        let top = max_pow.clamp(7, 24);
        let config = EnsembleConfig::new((6..=top).map(|k| 1u64 << k).collect(), u64::MAX, seed);
        let stats = EnsembleStats::empty(config.identity());
        ReturnsEnsemble {
            config,
            stats,
            done: 0,
        }
    }

    /// Add `count` more replicas.
    pub fn add(&mut self, count: u32) {
        let range = self.done..self.done + u64::from(count);
        let batch = run_replicas(&self.config, range).expect("fixed valid configuration");
        let so_far = std::mem::replace(
            &mut self.stats,
            EnsembleStats::empty(self.config.identity()),
        );
        self.stats = so_far.merge(&batch).expect("same configuration");
        self.done += u64::from(count);
    }

    pub fn replicas(&self) -> f64 {
        self.done as f64
    }

    /// Rows `[t, sqrt(log t), mean, ci_lo, ci_hi]`, flattened. Empty until
    /// two replicas have run.
    pub fn table(&self) -> Vec<f64> {
        if self.done < 2 {
            return vec![];
        }
        returns_table(&self.stats)
            .iter()
            .flat_map(|r| [r.t as f64, log_t(r.t).sqrt(), r.mean, r.ci_lo, r.ci_hi])
            .collect()
    }
}
