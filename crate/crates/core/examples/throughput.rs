//! Steps per second of a single long walk, and store footprints.
//!
//!     cargo run --release -p erw-core --example throughput -- 16777216

use std::time::Instant;

use erw_core::{replica_rng, ColumnStore, NaiveSet, Site, StepRule, VisitedStore, Walk};

fn main() {
    let t: u64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(1 << 22);

    let mut rng = replica_rng(1, 0);
    let mut w: Walk<ColumnStore> = Walk::new(StepRule::HalfSpace, &[Site::ORIGIN]);
    let start = Instant::now();
    w.run_to(t, &mut rng);
    let secs = start.elapsed().as_secs_f64();
    let c = w.counters();
    println!(
        "column store: {t} steps in {secs:.2}s ({:.1} Msteps/s); V0={} N={} DF={} F={} |Vis|={} columns={} mem={} B",
        t as f64 / secs / 1e6,
        c.visits[0],
        c.distinct_sites(),
        c.distinct_floor,
        c.floor_hits,
        w.store().len(),
        w.store().columns(),
        w.store().memory_bytes()
    );

    let mut rng = replica_rng(1, 0);
    let mut w: Walk<NaiveSet> = Walk::new(StepRule::HalfSpace, &[Site::ORIGIN]);
    let start = Instant::now();
    w.run_to(t, &mut rng);
    let secs = start.elapsed().as_secs_f64();
    println!(
        "naive set:    {t} steps in {secs:.2}s ({:.1} Msteps/s); mem={} B",
        t as f64 / secs / 1e6,
        w.store().memory_bytes()
    );
}
