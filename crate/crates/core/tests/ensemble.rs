use erw_core::experiments::{
    compare_returns, csv_rows, martingale_table, returns_table, run_ensemble, run_replicas,
    write_csv, EnsembleConfig, Mode, RunOptions,
};
use erw_core::Site;

fn csv_of(cfg: &EnsembleConfig, threads: usize) -> Vec<u8> {
    let stats = run_ensemble(
        cfg,
        RunOptions {
            threads: Some(threads),
            progress: None,
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    write_csv(&csv_rows(&stats), &mut buf).unwrap();
    buf
}

#[test]
fn split_ensembles_merge_to_the_single_run() {
    let cfg = EnsembleConfig::new(vec![64, 512, 2048], 1000, 17)
        .with_targets(vec![Site::new(1, 0, 0)])
        .with_cylinder(3);
    let whole = run_replicas(&cfg, 0..1000).unwrap();
    let parts = run_replicas(&cfg, 0..313)
        .unwrap()
        .merge(&run_replicas(&cfg, 313..700).unwrap())
        .unwrap()
        .merge(&run_replicas(&cfg, 700..1000).unwrap())
        .unwrap();
    assert_eq!(whole, parts);
    let reversed = run_replicas(&cfg, 500..1000)
        .unwrap()
        .merge(&run_replicas(&cfg, 0..500).unwrap())
        .unwrap();
    assert_eq!(whole, reversed);
}

#[test]
fn merging_different_configurations_fails() {
    let a = EnsembleConfig::new(vec![64], 4, 1);
    let b = EnsembleConfig::new(vec![64], 4, 2);
    assert!(run_replicas(&a, 0..2)
        .unwrap()
        .merge(&run_replicas(&b, 2..4).unwrap())
        .is_err());
}

#[test]
fn csv_is_byte_identical_across_thread_counts() {
    let cfg = EnsembleConfig::new(vec![100, 1000, 5000], 64, 5).with_cylinder(2);
    let one = csv_of(&cfg, 1);
    assert_eq!(one, csv_of(&cfg, 3));
    assert_eq!(one, csv_of(&cfg, 8));
}

#[test]
fn symmetric_walk_matches_half_space_walk_in_law() {
    let horizons = vec![64, 256, 1024, 4096];
    let a = EnsembleConfig::new(horizons.clone(), 4000, 11);
    let b = EnsembleConfig::new(horizons, 4000, 12).with_mode(Mode::Symmetric);
    let ra = returns_table(&run_ensemble(&a, RunOptions::default()).unwrap());
    let rb = returns_table(&run_ensemble(&b, RunOptions::default()).unwrap());
    for row in compare_returns(&ra, &rb).unwrap() {
        assert!(row.z.abs() < 4.0, "t = {}: z = {}", row.t, row.z);
    }
}

#[test]
fn drift_residual_has_mean_zero() {
    let cfg = EnsembleConfig::new(vec![100, 1000, 10_000], 3000, 23);
    for row in martingale_table(&run_ensemble(&cfg, RunOptions::default()).unwrap()) {
        assert!(
            row.mean.abs() <= 4.0 * row.se,
            "t = {}: {} +- {}",
            row.t,
            row.mean,
            row.se
        );
    }
}

#[test]
fn returns_grow_with_time() {
    let cfg = EnsembleConfig::new(vec![16, 4096], 3000, 31);
    let rows = returns_table(&run_ensemble(&cfg, RunOptions::default()).unwrap());
    assert!(rows[1].mean > rows[0].mean + 3.0 * (rows[0].se + rows[1].se));
}
