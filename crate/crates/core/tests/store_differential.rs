use erw_core::{replica_rng, ColumnStore, NaiveSet, Site, StepRule, VisitedStore, Walk};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Op {
    Insert(Site),
    Mark(i32, i32),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (-20i32..20, -20i32..20, 1i32..140).prop_map(|(x, y, z)| Op::Insert(Site::new(x, y, z))),
        1 => (-20i32..20, -20i32..20).prop_map(|(x, y)| Op::Mark(x, y)),
    ]
}

/// Descending runs in one column, the shape a walk produces.
fn descent() -> impl Strategy<Value = Vec<Op>> {
    (-6i32..6, -6i32..6, 1i32..200, 1i32..60).prop_map(|(x, y, top, len)| {
        (0..len.min(top))
            .map(|k| Op::Insert(Site::new(x, y, top - k)))
            .collect()
    })
}

fn compare(ops: &[Op]) {
    let mut a = ColumnStore::default();
    let mut b = NaiveSet::default();
    for o in ops {
        match *o {
            Op::Insert(s) => assert_eq!(a.insert(s), b.insert(s), "insert {s}"),
            Op::Mark(x, y) => assert_eq!(a.mark_floor(x, y), b.mark_floor(x, y)),
        }
    }
    assert_eq!(a.len(), b.len());
    assert_eq!(a.sites(), b.sites());
    for x in -21..21 {
        for y in -21..21 {
            assert_eq!(a.floor_marked(x, y), b.floor_marked(x, y));
            for z in 0..150 {
                let s = Site::new(x, y, z);
                assert_eq!(a.contains(s), b.contains(s), "contains {s}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arbitrary_histories_agree(ops in prop::collection::vec(op(), 0..300)) {
        compare(&ops);
    }

    #[test]
    fn interleaved_descents_agree(runs in prop::collection::vec(descent(), 1..12)) {
        let ops: Vec<Op> = runs.into_iter().flatten().collect();
        compare(&ops);
    }
}

#[test]
fn floor_inserts_rejected_by_both() {
    assert!(ColumnStore::default().insert(Site::ORIGIN).is_err());
    assert!(NaiveSet::default().insert(Site::ORIGIN).is_err());
}

#[test]
fn walks_agree_step_by_step() {
    for rule in [
        StepRule::HalfSpace,
        StepRule::Symmetric,
        StepRule::Drift { p: 0.7 },
    ] {
        for i in 0..6 {
            let mut ra = replica_rng(2024, i);
            let mut rb = replica_rng(2024, i);
            let mut a: Walk<ColumnStore> = Walk::new(rule, &[Site::ORIGIN]);
            let mut b: Walk<NaiveSet> = Walk::new(rule, &[Site::ORIGIN]);
            for step in 0..20_000 {
                let ka = a.step(&mut ra);
                let kb = b.step(&mut rb);
                assert_eq!(ka, kb, "{rule:?} replica {i} step {step}");
                let p = a.position().folded();
                for s in [
                    p,
                    p.below(),
                    Site::new(p.x + 1, p.y, p.z),
                    Site::new(p.x, p.y - 1, p.z + 1),
                ] {
                    assert_eq!(a.store().contains(s), b.store().contains(s));
                }
            }
            assert_eq!(a.counters(), b.counters());
            assert_eq!(a.store().sites(), b.store().sites());
        }
    }
}
