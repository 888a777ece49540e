//! Per-replica random streams.
//!
//! Each replica gets a Xoshiro256++ generator. Its 64-bit key is
//! `mix(mix(seed) ^ replica)` where `mix` is the SplitMix64 finalizer, a
//! bijection on u64; for a fixed master seed, distinct replica indices
//! therefore get distinct keys. The key is expanded into the 256-bit state by
//! SplitMix64 (`seed_from_u64`). A given `(seed, replica)` pair always
//! reproduces the same variates.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type ReplicaRng = Xoshiro256PlusPlus;

#[inline]
fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replica_key(master_seed: u64, replica: u64) -> u64 {
    splitmix_finalize(splitmix_finalize(master_seed) ^ replica)
}

pub fn replica_rng(master_seed: u64, replica: u64) -> ReplicaRng {
    Xoshiro256PlusPlus::seed_from_u64(replica_key(master_seed, replica))
}

/// Source of the variates a walk consumes. Implemented for every [`Rng`];
/// [`Scripted`] replays a fixed list of choices.
pub trait MoveSource {
    /// Uniform integer in `0..n`.
    fn pick(&mut self, n: u32) -> u32;

    /// Uniform real in `[0, 1)`.
    fn unit(&mut self) -> f64;
}

impl<R: Rng> MoveSource for R {
    #[inline]
    fn pick(&mut self, n: u32) -> u32 {
        // Lemire's multiply-shift with rejection; the division only runs on
        // the rare near-boundary draw.
        let mut m = u64::from(self.next_u32()) * u64::from(n);
        if (m as u32) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u32) < threshold {
                m = u64::from(self.next_u32()) * u64::from(n);
            }
        }
        (m >> 32) as u32
    }

    #[inline]
    fn unit(&mut self) -> f64 {
        self.gen()
    }
}

/// Replays predetermined choices, for hand-checked trajectories.
#[derive(Clone, Debug, Default)]
pub struct Scripted {
    picks: Vec<u32>,
    units: Vec<f64>,
    next_pick: usize,
    next_unit: usize,
}

impl Scripted {
    pub fn new(picks: Vec<u32>) -> Self {
        Scripted {
            picks,
            ..Default::default()
        }
    }

    pub fn with_units(mut self, units: Vec<f64>) -> Self {
        self.units = units;
        self
    }

    pub fn picks_used(&self) -> usize {
        self.next_pick
    }
}

impl MoveSource for Scripted {
    fn pick(&mut self, n: u32) -> u32 {
        let v = *self
            .picks
            .get(self.next_pick)
            .expect("scripted source ran out of picks");
        assert!(v < n, "scripted pick {v} out of range 0..{n}");
        self.next_pick += 1;
        v
    }

    fn unit(&mut self) -> f64 {
        let v = *self
            .units
            .get(self.next_unit)
            .expect("scripted source ran out of units");
        self.next_unit += 1;
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_index_reproduce() {
        let mut a = replica_rng(42, 7);
        let mut b = replica_rng(42, 7);
        let va: Vec<u32> = (0..32).map(|_| a.pick(6)).collect();
        let vb: Vec<u32> = (0..32).map(|_| b.pick(6)).collect();
        assert_eq!(va, vb);
    }

    #[test]
    fn replica_keys_are_distinct() {
        let keys: std::collections::HashSet<u64> =
            (0..100_000).map(|i| replica_key(7, i)).collect();
        assert_eq!(keys.len(), 100_000);
    }

    #[test]
    fn pick_is_uniform_for_small_ranges() {
        let mut rng = replica_rng(3, 0);
        let n = 600_000;
        let mut counts = [0u32; 5];
        for _ in 0..n {
            counts[rng.pick(5) as usize] += 1;
        }
        let sd = (n as f64 * 0.2 * 0.8).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * 0.2).abs() < 4.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn different_index_or_seed_differs() {
        let draw = |s, i| -> Vec<u64> {
            let mut r = replica_rng(s, i);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_ne!(draw(42, 0), draw(42, 1));
        assert_ne!(draw(42, 0), draw(43, 0));
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn scripted_rejects_out_of_range() {
        Scripted::new(vec![5]).pick(5);
    }
}
