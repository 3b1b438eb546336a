//! The degradation LP against a 0.01 Gbps grid search.

mod common;

use common::oracle::lp_trial;

#[test]
fn lp_matches_grid_search() {
    let mut feasible = 0;
    for seed in 0..250 {
        let t = lp_trial(seed);
        assert_eq!(t.lp_objective.is_some(), t.grid_objective.is_some(), "seed {seed}");
        if let (Some(lp), Some(grid)) = (t.lp_objective, t.grid_objective) {
            assert!(lp <= grid + 1e-4, "seed {seed}: lp {lp} grid {grid}");
            assert!(t.residual <= 1e-9, "seed {seed}: residual {}", t.residual);
            feasible += 1;
        }
    }
    assert!(feasible >= 100, "only {feasible} feasible instances");
}
