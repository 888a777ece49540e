use erw_core::coupling::{
    conditioned_visit_bound_experiment, dominance_ensemble, replay_transcript, run_coupling,
    CouplingParams, CouplingState,
};
use erw_core::{replica_rng, ColumnStore, NaiveSet, Site, StepKind, StepRule, VisitedStore, Walk};

/// Visited sets of one walk at two times, both taken off new vertices, so
/// the earlier one is a legal subset of the later one. Also returns the
/// later position.
fn nested_prefixes(seed: u64, t1: u64, t2: u64) -> (Vec<Site>, Vec<Site>, Site) {
    let mut rng = replica_rng(seed, 0);
    let mut w: Walk = Walk::new(StepRule::HalfSpace, &[]);
    let mut settle = |w: &mut Walk, t: u64| {
        w.run_to(t, &mut rng);
        while w.kind() == StepKind::New {
            w.step(&mut rng);
        }
        w.store().sites()
    };
    let r = settle(&mut w, t1);
    let s = settle(&mut w, t2);
    (r, s, w.position())
}

#[test]
fn checked_couplings_from_walk_prefixes() {
    for seed in 0..6 {
        let (vis_r, vis_s, start) = nested_prefixes(seed, 200, 3000);
        let target = Site::new(start.x, start.y, 0);
        let params = CouplingParams {
            start,
            vis_r,
            vis_s,
            t: 20_000,
            target,
            checked: true,
        };
        let rep = dominance_ensemble(&params, 40, seed).unwrap();
        assert!(
            rep.claim_violations.is_empty(),
            "{:?}",
            rep.claim_violations
        );
        assert_eq!(rep.path_violations, 0);
        assert!(rep.mean_v_r >= rep.mean_v_s);
    }
}

#[test]
fn both_store_backends_produce_the_same_coupling() {
    let (vis_r, vis_s, start) = nested_prefixes(9, 100, 1500);
    for i in 0..10 {
        let a = run_coupling::<ColumnStore, _>(
            start,
            &vis_r,
            &vis_s,
            5000,
            Site::ORIGIN,
            true,
            &mut replica_rng(3, i),
        );
        let b = run_coupling::<NaiveSet, _>(
            start,
            &vis_r,
            &vis_s,
            5000,
            Site::ORIGIN,
            true,
            &mut replica_rng(3, i),
        );
        assert_eq!(a.unwrap(), b.unwrap());
    }
}

#[test]
fn containment_holds_along_the_whole_run() {
    let (vis_r, vis_s, start) = nested_prefixes(4, 300, 2000);
    let mut st: CouplingState = CouplingState::new(start, &vis_r, &vis_s, true).unwrap();
    let mut rng = replica_rng(4, 1);
    for k in 0..20_000 {
        st.coupled_step(&mut rng).unwrap();
        assert!(st.t_r() + st.wait_r() == st.tau() && st.t_s() + st.wait_s() == st.tau());
        if k % 1000 == 0 && st.s().kind() != StepKind::New {
            assert!(
                st.full_containment_check(),
                "containment failed at tau = {}",
                st.tau()
            );
        }
        let (r, s) = (st.r().position(), st.s().position());
        assert_eq!((r.x, r.y), (s.x, s.y));
        assert!(r.z <= s.z);
    }
}

#[test]
fn equal_configurations_never_wait() {
    let (_, vis, start) = nested_prefixes(5, 10, 800);
    let params = CouplingParams {
        start,
        vis_r: vis.clone(),
        vis_s: vis,
        t: 5000,
        target: Site::ORIGIN,
        checked: true,
    };
    let rep = dominance_ensemble(&params, 20, 1).unwrap();
    assert_eq!(rep.equal_runs, 20);
    assert_eq!(rep.total_wait_r + rep.total_wait_s, 0);
}

#[test]
fn transcript_replays_the_run() {
    let (vis_r, vis_s, start) = nested_prefixes(6, 50, 400);
    let params = CouplingParams {
        start,
        vis_r,
        vis_s,
        t: 500,
        target: Site::ORIGIN,
        checked: true,
    };
    let (a, err) = replay_transcript(&params, 2, 3).unwrap();
    assert!(err.is_none());
    let (b, _) = replay_transcript(&params, 2, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.len() as u64 >= params.t);
}

#[test]
fn illegal_or_unnested_configurations_are_rejected() {
    let s = vec![Site::new(0, 0, 1)];
    assert!(
        CouplingState::<ColumnStore>::new(Site::ORIGIN, &[Site::new(0, 0, 2)], &s, false).is_err()
    );
    assert!(
        CouplingState::<ColumnStore>::new(Site::ORIGIN, &[Site::new(1, 0, 1)], &s, false).is_err()
    );
    assert!(run_coupling::<ColumnStore, _>(
        Site::ORIGIN,
        &[],
        &s,
        10,
        Site::new(0, 0, 1),
        false,
        &mut replica_rng(0, 0)
    )
    .is_err());
}

#[test]
fn conditioned_bound_at_small_scale() {
    let rep = conditioned_visit_bound_experiment(Site::new(1, 0, 0), 5000, 600, 8).unwrap();
    assert!(rep.hits > 100);
    assert!(rep.holds, "{rep:?}");
    let same = conditioned_visit_bound_experiment(Site::ORIGIN, 2000, 50, 8).unwrap();
    assert_eq!(same.lhs_mean, same.rhs_mean);
}
