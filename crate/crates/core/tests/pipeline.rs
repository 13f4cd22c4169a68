use swarm_mimo::experiments::{monte_carlo, run_trial, sweep, AlgorithmKind, Scenario, SweepAxis};

fn short(algorithm: AlgorithmKind, max_iterations: u32) -> Scenario {
    Scenario {
        algorithm,
        max_iterations,
        ..Scenario::default()
    }
}

#[test]
fn bf_ignores_localization_error() {
    let s = short(AlgorithmKind::Bf, 40);
    let result = sweep(
        &s,
        SweepAxis::SigmaLoc,
        &[0.0, 0.01, 1.0],
        &[AlgorithmKind::Bf],
        3,
        0,
    )
    .unwrap();
    let first = &result.rows[0];
    for row in &result.rows[1..] {
        assert_eq!(row.mean_final_sinr_nv_db, first.mean_final_sinr_nv_db);
        assert_eq!(row.mean_dist_to_icn095_m, first.mean_dist_to_icn095_m);
    }
}

#[test]
fn zero_sigma_cell_matches_error_free_ensemble() {
    let s = short(AlgorithmKind::Gd, 30);
    let result = sweep(
        &s,
        SweepAxis::SigmaAct,
        &[0.0, 0.1],
        &[AlgorithmKind::Gd],
        2,
        42,
    )
    .unwrap();
    assert_eq!(
        result.rows[0],
        monte_carlo(&s, SweepAxis::SigmaAct, 2, 42).unwrap()
    );
}

#[test]
fn same_placement_across_algorithms() {
    let gd = run_trial(&short(AlgorithmKind::Gd, 1)).unwrap();
    let bf = run_trial(&short(AlgorithmKind::Bf, 1)).unwrap();
    let ura = run_trial(&short(AlgorithmKind::Ura, 1)).unwrap();
    assert_eq!(gd.output.world.initial_rx, bf.output.world.initial_rx);
    assert_eq!(gd.output.world.initial_rx, ura.output.world.initial_rx);
    assert_eq!(gd.output.initial, bf.output.initial);
}

#[test]
fn traveled_distance_bounds_net_displacement() {
    for s in [
        Scenario {
            sigma_act_m: 0.01,
            ..short(AlgorithmKind::Gd, 50)
        },
        Scenario {
            sigma_act_m: 0.01,
            ..short(AlgorithmKind::Bf, 20)
        },
        Scenario {
            sigma_loc_m: 0.05,
            ..short(AlgorithmKind::Ura, 20)
        },
    ] {
        let t = run_trial(&s).unwrap();
        let w = &t.output.world;
        for d in 0..w.n_drones() {
            let net = (w.geom.rx_positions[d] - w.initial_rx[d]).norm();
            assert!(w.traveled[d] + 1e-9 >= net, "{:?} drone {d}", s.algorithm);
            assert!(w.traveled[d] + 1e-9 >= w.net_traveled[d]);
        }
        let last = t.output.trace.last().unwrap();
        assert!(last.mean_traveled_m >= last.mean_net_traveled_m - 1e-9);
        for it in std::iter::once(&t.output.initial).chain(&t.output.trace) {
            assert!(it.sinr_mf_db + 1e-9 >= it.sinr_zf_db);
            assert!(it.sinr_mf_db + 1e-9 >= it.sinr_nv_db);
        }
    }
}
